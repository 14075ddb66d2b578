import numpy as np
import pytest

from fairplai import errors
from fairplai.dataset import (ColumnSpec, TabularDataset, dataset_from_doc,
                              dataset_to_doc, encode_dataset, load_csv,
                              load_schema_file, split_dataset)

SCHEMA = (
    ColumnSpec("age", "numeric", bounds=(0, 100)),
    ColumnSpec("job", "categorical", categories=("a", "b")),
    ColumnSpec("sex", "categorical", categories=("m", "f")),
    ColumnSpec("y", "binary"),
)


def _write(tmp_path, text, name="d.csv"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_load_csv_basic(tmp_path):
    p = _write(tmp_path, "age,job,sex,y\n30,a,m,1\n40,b,f,0\n")
    ds = load_csv(p, SCHEMA, "y", ("sex",))
    assert ds.n == 2 and ds.n_dropped == 0
    assert ds.rows[0] == (30.0, "a", "m", 1)


def test_header_order_independent(tmp_path):
    p = _write(tmp_path, "y,sex,job,age\n1,m,a,30\n")
    ds = load_csv(p, SCHEMA, "y", ("sex",))
    assert ds.rows[0] == (30.0, "a", "m", 1)


def test_missing_rows_dropped_and_counted(tmp_path):
    p = _write(tmp_path, "age,job,sex,y\n30,a,m,1\n?,b,f,0\n50,,m,1\n60,b,f,0\n")
    ds = load_csv(p, SCHEMA, "y", ("sex",))
    assert ds.n == 2 and ds.n_dropped == 2


def test_unknown_column(tmp_path):
    p = _write(tmp_path, "age,job,sex,y,extra\n30,a,m,1,x\n")
    with pytest.raises(errors.UnknownColumn):
        load_csv(p, SCHEMA, "y", ("sex",))


def test_missing_header_column(tmp_path):
    p = _write(tmp_path, "age,job,y\n30,a,1\n")
    with pytest.raises(errors.MissingHeader):
        load_csv(p, SCHEMA, "y", ("sex",))


def test_type_mismatch_names_row_and_column(tmp_path):
    p = _write(tmp_path, "age,job,sex,y\nthirty,a,m,1\n")
    with pytest.raises(errors.TypeMismatch) as exc:
        load_csv(p, SCHEMA, "y", ("sex",))
    assert "age" in str(exc.value)


def test_all_rows_dropped_is_empty(tmp_path):
    p = _write(tmp_path, "age,job,sex,y\n?,a,m,1\n")
    with pytest.raises(errors.EmptyDataset):
        load_csv(p, SCHEMA, "y", ("sex",))


def test_schema_sidecar_round_trip(tmp_path):
    p = _write(tmp_path, """{
      "columns": [
        {"name": "age", "kind": "numeric", "bounds": [0, 100]},
        {"name": "sex", "kind": "categorical", "categories": ["m", "f"]},
        {"name": "y", "kind": "binary"}],
      "label": "y", "protected": ["sex"]}""", name="s.json")
    schema, label, protected = load_schema_file(p)
    assert label == "y" and protected == ("sex",)
    assert schema[0].bounds == (0.0, 100.0)
    assert schema[1].categories == ("m", "f")


def _tiny(n=40, seed=0):
    rng = np.random.default_rng(seed)
    rows = tuple((float(rng.integers(0, 100)),
                  ["a", "b"][rng.integers(0, 2)],
                  ["m", "f"][rng.integers(0, 2)],
                  int(rng.integers(0, 2))) for _ in range(n))
    return TabularDataset(SCHEMA, rows, "y", ("sex",))


def test_doc_round_trip():
    ds = _tiny()
    back = dataset_from_doc(dataset_to_doc(ds))
    assert back.rows == ds.rows
    assert back.schema == ds.schema
    assert back.label == ds.label and back.protected == ds.protected


def test_encode_shapes_and_exclusion():
    ds = _tiny()
    enc = encode_dataset(ds)
    # age (1) + job one-hot (2); sex excluded by default
    assert enc.p == 3
    assert set(enc.group_vector("sex").tolist()) <= {0, 1}
    enc2 = encode_dataset(ds, include_protected_as_feature=True)
    assert enc2.p == 5


def test_standardization_and_decode_round_trip():
    ds = _tiny()
    enc = encode_dataset(ds)
    age_col = enc.features[:, 0]
    assert abs(age_col.mean()) < 1e-9
    decoded = enc.encoder.decode(enc.features)
    ages = [r["age"] for r in decoded]
    assert np.allclose(ages, [row[0] for row in ds.rows])
    assert [r["job"] for r in decoded] == [row[1] for row in ds.rows]


def test_feature_bounds_follow_standardization():
    ds = _tiny()
    enc = encode_dataset(ds)
    lo, hi = enc.encoder.feature_bounds()[0]
    col = enc.encoder.columns[0]
    assert lo == (0.0 - col.mean) / col.std and hi == (100.0 - col.mean) / col.std


def test_transform_rejects_unseen_category():
    ds = _tiny()
    enc = encode_dataset(ds)
    bad = TabularDataset(
        (ColumnSpec("age", "numeric", bounds=(0, 100)),
         ColumnSpec("job", "categorical", categories=("a", "b", "zz")),
         ColumnSpec("sex", "categorical", categories=("m", "f")),
         ColumnSpec("y", "binary")),
        ((10.0, "zz", "m", 1),), "y", ("sex",))
    with pytest.raises(errors.UnseenCategory):
        enc.encoder.transform(bad)


def test_split_disjoint_exhaustive_deterministic():
    ds = _tiny(n=60)
    tr, te = split_dataset(ds, 0.25, seed=5)
    assert tr.n + te.n == ds.n
    # multiset union of the two sides is exactly the dataset
    assert sorted(tr.rows + te.rows) == sorted(ds.rows)
    tr2, te2 = split_dataset(ds, 0.25, seed=5)
    assert tr.rows == tr2.rows and te.rows == te2.rows
    tr3, _ = split_dataset(ds, 0.25, seed=6)
    assert tr3.rows != tr.rows


def test_split_stratified_preserves_ratio():
    ds = _tiny(n=200, seed=3)
    tr, te = split_dataset(ds, 0.25, seed=0, stratify=True)
    y = ds.labels()
    for cls in (0, 1):
        total = int((y == cls).sum())
        in_test = sum(1 for r in te.rows if r[3] == cls)
        assert abs(in_test - 0.25 * total) <= 1.0


def test_split_fraction_out_of_range():
    ds = _tiny()
    with pytest.raises(errors.FractionOutOfRange):
        split_dataset(ds, 1.5, seed=0)
