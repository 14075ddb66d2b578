"""Tabular dataset loading, validation, encoding and splitting.

CSV files come with a JSON schema sidecar naming each column's kind
(numeric / categorical / binary), optional value bounds (required later by
DP training), the label column and the protected attribute columns.
Rows containing a missing-value sentinel ("?" or empty cell) are dropped
and the drop count is surfaced for audit.
"""

import csv
import json
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import errors
from .rngutil import derive_rng

MISSING_SENTINELS = {"?", ""}


@dataclass(frozen=True)
class ColumnSpec:
    name: str
    kind: str  # numeric | categorical | binary
    bounds: tuple | None = None
    categories: tuple | None = None

    def __post_init__(self):
        if self.kind not in ("numeric", "categorical", "binary"):
            raise ValueError(f"unknown column kind {self.kind!r}")
        if self.bounds is not None:
            lo, hi = self.bounds
            if not lo < hi:
                raise ValueError(f"column {self.name!r}: bounds must satisfy low < high")
            object.__setattr__(self, "bounds", (float(lo), float(hi)))
        if self.kind == "categorical":
            if not self.categories:
                raise ValueError(f"categorical column {self.name!r} needs categories")
            if len(set(self.categories)) != len(self.categories):
                raise ValueError(f"column {self.name!r}: duplicate categories")
            object.__setattr__(self, "categories", tuple(self.categories))


@dataclass(frozen=True)
class TabularDataset:
    schema: tuple
    rows: tuple  # tuple of row tuples, values typed per ColumnSpec
    label: str
    protected: tuple
    n_dropped: int = 0

    def __post_init__(self):
        names = [c.name for c in self.schema]
        if len(set(names)) != len(names):
            raise ValueError("duplicate column names in schema")
        for name in (self.label, *self.protected):
            if name not in names:
                raise errors.UnknownColumn(name)
        if not self.protected:
            raise ValueError("protected attribute list must be non-empty")
        if len(self.rows) < 1:
            raise errors.EmptyDataset("dataset has no rows")
        label_spec = self.column_spec(self.label)
        if label_spec.kind != "binary":
            raise ValueError(f"label column {self.label!r} must be binary")

    @property
    def n(self) -> int:
        return len(self.rows)

    def column_index(self, name: str) -> int:
        for i, c in enumerate(self.schema):
            if c.name == name:
                return i
        raise errors.UnknownColumn(name)

    def column_spec(self, name: str) -> ColumnSpec:
        return self.schema[self.column_index(name)]

    def column(self, name: str) -> list:
        i = self.column_index(name)
        return [row[i] for row in self.rows]

    def labels(self) -> np.ndarray:
        return np.asarray(self.column(self.label), dtype=int)

    def subset(self, indices) -> "TabularDataset":
        rows = tuple(self.rows[i] for i in indices)
        return TabularDataset(self.schema, rows, self.label, self.protected)


def _parse_value(raw: str, spec: ColumnSpec, row_idx: int):
    if spec.kind == "numeric":
        try:
            return float(raw)
        except ValueError:
            raise errors.TypeMismatch(row_idx, spec.name, raw) from None
    if spec.kind == "binary":
        if raw in ("0", "1"):
            return int(raw)
        raise errors.TypeMismatch(row_idx, spec.name, raw)
    if raw not in spec.categories:
        raise errors.TypeMismatch(row_idx, spec.name, raw)
    return raw


def load_csv(path, schema, label, protected, delimiter=",") -> TabularDataset:
    """Load and validate a CSV file against a schema.

    Rows containing a missing-value sentinel in any cell are dropped; the
    count of dropped rows is recorded on the returned dataset.
    """
    schema = tuple(schema)
    by_name = {c.name: c for c in schema}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh, delimiter=delimiter)
        try:
            header = next(reader)
        except StopIteration:
            raise errors.MissingHeader(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        if set(header) != set(by_name):
            unknown = set(header) - set(by_name)
            missing = set(by_name) - set(header)
            if unknown:
                raise errors.UnknownColumn(f"unexpected columns: {sorted(unknown)}")
            raise errors.MissingHeader(f"missing columns: {sorted(missing)}")
        col_specs = [by_name[h] for h in header]
        order = [header.index(c.name) for c in schema]

        rows = []
        dropped = 0
        for row_idx, raw_row in enumerate(reader):
            if len(raw_row) != len(header):
                raise errors.TypeMismatch(row_idx, "<row>", raw_row)
            cells = [c.strip() for c in raw_row]
            if any(c in MISSING_SENTINELS for c in cells):
                dropped += 1
                continue
            parsed = [_parse_value(cells[j], col_specs[j], row_idx) for j in range(len(cells))]
            rows.append(tuple(parsed[j] for j in order))
    if not rows:
        raise errors.EmptyDataset(f"{path}: all rows dropped or file empty")
    return TabularDataset(schema, tuple(rows), label, tuple(protected), n_dropped=dropped)


def load_schema_file(path):
    """Read the JSON schema sidecar; returns (schema, label, protected)."""
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    schema = []
    for col in doc["columns"]:
        schema.append(ColumnSpec(
            name=col["name"],
            kind=col["kind"],
            bounds=tuple(col["bounds"]) if col.get("bounds") else None,
            categories=tuple(col["categories"]) if col.get("categories") else None,
        ))
    return tuple(schema), doc["label"], tuple(doc["protected"])


def dataset_to_doc(ds: TabularDataset) -> dict:
    """Canonical JSON document for a dataset; its digest is the dataset id."""
    return {
        "schema": [{"name": c.name, "kind": c.kind,
                    "bounds": list(c.bounds) if c.bounds else None,
                    "categories": list(c.categories) if c.categories else None}
                   for c in ds.schema],
        "rows": [list(r) for r in ds.rows],
        "label": ds.label,
        "protected": list(ds.protected),
    }


def dataset_from_doc(doc: dict) -> TabularDataset:
    schema = tuple(ColumnSpec(
        name=c["name"], kind=c["kind"],
        bounds=tuple(c["bounds"]) if c.get("bounds") else None,
        categories=tuple(c["categories"]) if c.get("categories") else None)
        for c in doc["schema"])
    rows = tuple(tuple(r) for r in doc["rows"])
    return TabularDataset(schema, rows, doc["label"], tuple(doc["protected"]))


@dataclass
class _EncodedColumn:
    source: str
    kind: str
    width: int
    categories: tuple | None = None
    mean: float = 0.0
    std: float = 1.0
    bounds: tuple | None = None


@dataclass
class DatasetEncoder:
    """Reversible schema -> feature-column mapping fit on training data."""

    columns: list  # of _EncodedColumn, feature columns only
    protected: tuple
    label: str
    standardize: bool
    include_protected: bool
    group_categories: dict  # protected attr -> ordered category tuple

    @property
    def width(self) -> int:
        return sum(c.width for c in self.columns)

    def feature_bounds(self):
        """Per encoded feature column: (low, high) or None if unknown."""
        out = []
        for col in self.columns:
            if col.kind in ("categorical", "binary"):
                out.extend([(0.0, 1.0)] * col.width)
            elif col.bounds is not None:
                lo, hi = col.bounds
                out.append(((lo - col.mean) / col.std, (hi - col.mean) / col.std))
            else:
                out.append(None)
        return out

    def transform(self, ds: TabularDataset) -> "EncodedMatrix":
        blocks = []
        for col in self.columns:
            values = ds.column(col.source)
            if col.kind == "numeric":
                arr = (np.asarray(values, dtype=float) - col.mean) / col.std
                blocks.append(arr[:, None])
            elif col.kind == "binary":
                blocks.append(np.asarray(values, dtype=float)[:, None])
            else:
                idx = np.empty(len(values), dtype=int)
                lut = {c: i for i, c in enumerate(col.categories)}
                for i, v in enumerate(values):
                    if v not in lut:
                        raise errors.UnseenCategory(f"{col.source}: {v!r}")
                    idx[i] = lut[v]
                onehot = np.zeros((len(values), col.width))
                onehot[np.arange(len(values)), idx] = 1.0
                blocks.append(onehot)
        features = np.hstack(blocks) if blocks else np.zeros((ds.n, 0))

        groups = {}
        for attr in self.protected:
            cats = self.group_categories[attr]
            lut = {c: i for i, c in enumerate(cats)}
            values = ds.column(attr)
            ids = np.empty(ds.n, dtype=int)
            for i, v in enumerate(values):
                if v not in lut:
                    raise errors.UnseenCategory(f"{attr}: {v!r}")
                ids[i] = lut[v]
            groups[attr] = ids
        return EncodedMatrix(features=features, labels=ds.labels(), groups=groups, encoder=self)

    def decode(self, features: np.ndarray):
        """Invert the feature encoding; returns a list of per-row dicts."""
        rows = [dict() for _ in range(features.shape[0])]
        j = 0
        for col in self.columns:
            block = features[:, j:j + col.width]
            if col.kind == "numeric":
                vals = block[:, 0] * col.std + col.mean
                for r, v in zip(rows, vals):
                    r[col.source] = float(v)
            elif col.kind == "binary":
                for r, v in zip(rows, block[:, 0]):
                    r[col.source] = int(round(v))
            else:
                idx = np.argmax(block, axis=1)
                for r, i in zip(rows, idx):
                    r[col.source] = col.categories[i]
            j += col.width
        return rows


@dataclass
class EncodedMatrix:
    features: np.ndarray  # n x p
    labels: np.ndarray    # n, binary
    groups: dict          # protected attr -> n group-id vector
    encoder: DatasetEncoder

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def p(self) -> int:
        return self.features.shape[1]

    def group_vector(self, attr=None) -> np.ndarray:
        if attr is None:
            attr = self.encoder.protected[0]
        return self.groups[attr]


def encode_dataset(ds: TabularDataset, standardize=True,
                   include_protected_as_feature=False) -> EncodedMatrix:
    """One-hot / standardize a dataset; fits encoding statistics on `ds`.

    Protected columns are excluded from the feature matrix unless
    `include_protected_as_feature` is set; group-id vectors are populated
    either way. Reuse `result.encoder.transform(test_ds)` so test data is
    encoded with training statistics.
    """
    group_categories = {}
    for attr in ds.protected:
        spec = ds.column_spec(attr)
        if spec.kind == "categorical":
            group_categories[attr] = spec.categories
        elif spec.kind == "binary":
            group_categories[attr] = (0, 1)
        else:
            raise ValueError(f"protected column {attr!r} must be categorical or binary")

    columns = []
    for spec in ds.schema:
        if spec.name == ds.label:
            continue
        if spec.name in ds.protected and not include_protected_as_feature:
            continue
        if spec.kind == "numeric":
            values = np.asarray(ds.column(spec.name), dtype=float)
            if standardize:
                mean = float(values.mean())
                std = float(values.std())
                if std == 0.0:
                    warnings.warn(f"column {spec.name!r} is constant; centered only")
                    std = 1.0
            else:
                mean, std = 0.0, 1.0
            columns.append(_EncodedColumn(spec.name, "numeric", 1,
                                          mean=mean, std=std, bounds=spec.bounds))
        elif spec.kind == "binary":
            columns.append(_EncodedColumn(spec.name, "binary", 1, bounds=(0.0, 1.0)))
        else:
            columns.append(_EncodedColumn(spec.name, "categorical", len(spec.categories),
                                          categories=spec.categories))
    encoder = DatasetEncoder(columns=columns, protected=ds.protected, label=ds.label,
                             standardize=standardize,
                             include_protected=include_protected_as_feature,
                             group_categories=group_categories)
    return encoder.transform(ds)


def split_dataset(ds: TabularDataset, test_fraction: float, seed: int,
                  stratify=False):
    """Deterministic train/test split; stratified mode preserves the label
    ratio within one sample per class."""
    if not 0.0 < test_fraction < 1.0:
        raise errors.FractionOutOfRange(str(test_fraction))
    if ds.n < 2:
        raise errors.TooFewRows(str(ds.n))
    rng = derive_rng(seed, "split")
    if stratify:
        y = ds.labels()
        test_idx = []
        for cls in sorted(set(y.tolist())):
            cls_idx = np.flatnonzero(y == cls)
            perm = rng.permutation(cls_idx)
            n_test = int(round(test_fraction * len(cls_idx)))
            n_test = min(max(n_test, 0), len(cls_idx))
            test_idx.extend(perm[:n_test].tolist())
        test_set = set(test_idx)
    else:
        perm = rng.permutation(ds.n)
        n_test = int(round(test_fraction * ds.n))
        n_test = min(max(n_test, 1), ds.n - 1)
        test_set = set(perm[:n_test].tolist())
    if not test_set or len(test_set) == ds.n:
        raise errors.TooFewRows("split would leave an empty side")
    train_idx = [i for i in range(ds.n) if i not in test_set]
    test_idx = [i for i in range(ds.n) if i in test_set]
    return ds.subset(train_idx), ds.subset(test_idx)
