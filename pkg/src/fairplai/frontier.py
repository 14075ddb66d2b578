"""Build, persist and query the privacy-fairness-accuracy frontier.

A frontier is the full grid product of privacy budgets x fairness
constraints x model kinds, each cell trained once per seed and evaluated on
a held-out test split. Failed cells are kept as flagged points with
diagnostics rather than dropped, so infeasibility stays visible.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import errors, metrics, models
from .canonical import canonical_bytes, canonical_loads, digest_of
from .config import DEFAULT_CONFIG, TrainingConfig
from .dataset import (TabularDataset, dataset_to_doc, encode_dataset,
                      split_dataset)
from .dp import NON_PRIVATE, PrivacyAccount, PrivacyBudget, default_delta
from .fair import (FairnessConstraint, exponentiated_gradient,
                   predict_randomized, threshold_optimize)
from .rngutil import derive_rng, derive_seed

FRONTIER_VERSION = "frontier-v1"
DEFAULT_EPSILONS = (0.1, 0.5, 1.0, 5.0, 10.0)
METRIC_NAMES = ("accuracy", "precision", "recall", "f1", "auc",
                "dir", "dpd", "eo", "eopp")
INTERVENTIONS = ("none", "reduction", "postprocess", "reduction+dp",
                 "postprocess+dp")
DISPARITY_FOR = {"DemographicParity": "dpd", "EqualizedOdds": "eo",
                 "EqualOpportunity": "eopp", None: "dpd"}


def dataset_digest(ds: TabularDataset) -> str:
    return digest_of(dataset_to_doc(ds))


@dataclass(frozen=True)
class GridSpec:
    epsilons: tuple           # floats, math.inf = NON_PRIVATE, strictly increasing
    constraints: tuple        # FairnessConstraint or None (unconstrained)
    model_kinds: tuple
    seeds: tuple
    intervention: str = "none"

    def __post_init__(self):
        if not (self.epsilons and self.constraints and self.model_kinds and self.seeds):
            raise errors.InvalidGrid("every grid axis must be non-empty")
        eps = list(self.epsilons)
        if any(e <= 0 for e in eps):
            raise errors.InvalidGrid("epsilons must be positive")
        if eps != sorted(eps) or len(set(eps)) != len(eps):
            raise errors.InvalidGrid("epsilons must be strictly increasing")
        if self.intervention not in INTERVENTIONS:
            raise errors.InvalidGrid(f"unknown intervention {self.intervention!r}")
        for kind in self.model_kinds:
            if kind not in ("logreg", "gnb", "forest", "knn"):
                raise errors.InvalidGrid(f"unknown model kind {kind!r}")

    def cells(self):
        for eps in self.epsilons:
            for cons in self.constraints:
                for kind in self.model_kinds:
                    yield eps, cons, kind

    @property
    def n_cells(self) -> int:
        return len(self.epsilons) * len(self.constraints) * len(self.model_kinds)

    def to_dict(self) -> dict:
        return {
            "epsilons": list(self.epsilons),
            "constraints": [None if c is None else {"kind": c.kind, "delta": c.delta}
                            for c in self.constraints],
            "model_kinds": list(self.model_kinds),
            "seeds": list(self.seeds),
            "intervention": self.intervention,
        }

    @staticmethod
    def from_dict(d: dict) -> "GridSpec":
        return GridSpec(
            epsilons=tuple(float(e) for e in d["epsilons"]),
            constraints=tuple(None if c is None
                              else FairnessConstraint(c["kind"], float(c["delta"]))
                              for c in d["constraints"]),
            model_kinds=tuple(d["model_kinds"]),
            seeds=tuple(int(s) for s in d["seeds"]),
            intervention=d.get("intervention", "none"),
        )


def default_grid(seeds=range(10), intervention="none",
                 constraints=(None,), model_kinds=("logreg",)) -> GridSpec:
    return GridSpec(epsilons=DEFAULT_EPSILONS, constraints=tuple(constraints),
                    model_kinds=tuple(model_kinds), seeds=tuple(seeds),
                    intervention=intervention)


@dataclass
class FrontierPoint:
    point_id: str
    epsilon: float            # math.inf for non-private
    constraint: FairnessConstraint | None
    model_kind: str
    intervention: str
    status: str               # ok | failed
    achieved: dict            # metric -> {"mean", "std"}
    per_seed: list            # list of metric dicts, one per seed
    model_refs: list
    certified_budget: dict    # {"epsilon", "delta"}
    diagnostics: dict = field(default_factory=dict)

    @property
    def disparity_metric(self) -> str:
        return DISPARITY_FOR[self.constraint.kind if self.constraint else None]

    def mean(self, metric: str) -> float:
        return self.achieved[metric]["mean"]

    def to_dict(self) -> dict:
        return {
            "point_id": self.point_id,
            "epsilon": self.epsilon,
            "constraint": None if self.constraint is None else
                {"kind": self.constraint.kind, "delta": self.constraint.delta},
            "model_kind": self.model_kind,
            "intervention": self.intervention,
            "status": self.status,
            "achieved": self.achieved,
            "per_seed": self.per_seed,
            "model_refs": self.model_refs,
            "certified_budget": self.certified_budget,
            "diagnostics": self.diagnostics,
        }

    @staticmethod
    def from_dict(d: dict) -> "FrontierPoint":
        cons = d["constraint"]
        return FrontierPoint(
            point_id=d["point_id"], epsilon=float(d["epsilon"]),
            constraint=None if cons is None
                else FairnessConstraint(cons["kind"], float(cons["delta"])),
            model_kind=d["model_kind"], intervention=d["intervention"],
            status=d["status"], achieved=d["achieved"], per_seed=d["per_seed"],
            model_refs=d["model_refs"], certified_budget=d["certified_budget"],
            diagnostics=d["diagnostics"])


@dataclass
class Frontier:
    dataset_digest: str
    grid: GridSpec
    points: list
    master_seed: int
    config: TrainingConfig
    protected: tuple = ()
    version: str = FRONTIER_VERSION

    def point(self, point_id: str) -> FrontierPoint:
        for p in self.points:
            if p.point_id == point_id:
                return p
        raise KeyError(point_id)

    def to_dict(self) -> dict:
        return {
            "version": self.version,
            "protected": list(self.protected),
            "dataset_digest": self.dataset_digest,
            "grid": self.grid.to_dict(),
            "master_seed": self.master_seed,
            "config": self.config.to_dict(),
            "points": [p.to_dict() for p in self.points],
        }

    def digest(self) -> str:
        return digest_of(self.to_dict())

    @staticmethod
    def from_dict(d: dict) -> "Frontier":
        return Frontier(
            dataset_digest=d["dataset_digest"],
            grid=GridSpec.from_dict(d["grid"]),
            points=[FrontierPoint.from_dict(p) for p in d["points"]],
            master_seed=int(d["master_seed"]),
            config=TrainingConfig.from_dict(d["config"]),
            protected=tuple(d.get("protected", ())),
            version=d["version"])


# ---------------------------------------------------------------------------
# training one cell


def _plain_factory(kind, cfg):
    def factory(data, sample_weight, seed):
        if kind == "logreg":
            return models.train_logreg(data, lr=cfg.logreg_lr,
                                       epochs=cfg.logreg_epochs,
                                       l2=cfg.logreg_l2, seed=seed,
                                       sample_weight=sample_weight)
        if kind == "gnb":
            return models.train_gnb(data, sample_weight=sample_weight)
        raise errors.OracleFailure(
            f"model kind {kind!r} has no weighted learner for the reduction")
    return factory


def _dp_factory(kind, cfg, per_call_budget, shared_account):
    if kind != "logreg":
        raise errors.OracleFailure(
            f"model kind {kind!r} has no DP learner for the reduction")

    def factory(data, sample_weight, seed):
        model = models.train_logreg_dp(
            data, per_call_budget, clip_norm=cfg.dpsgd_clip_norm,
            lr=cfg.dpsgd_lr, epochs=cfg.dpsgd_epochs, batch=cfg.dpsgd_batch,
            seed=seed, sample_weight=sample_weight)
        for mech, e, d in model.account.ledger:
            shared_account.spend(mech, e, d)
        return model
    return factory


def _train_base(kind, em, budget, cfg, seed):
    if budget.is_non_private:
        if kind == "logreg":
            return models.train_logreg(em, lr=cfg.logreg_lr,
                                       epochs=cfg.logreg_epochs,
                                       l2=cfg.logreg_l2, seed=seed)
        if kind == "gnb":
            return models.train_gnb(em)
        if kind == "forest":
            return models.train_forest_dp(em, NON_PRIVATE,
                                          n_trees=cfg.forest_trees,
                                          depth=cfg.forest_depth, seed=seed)
        return models.train_knn(em, min(cfg.knn_k, em.n))
    if kind == "logreg":
        return models.train_logreg_dp(em, budget, clip_norm=cfg.dpsgd_clip_norm,
                                      lr=cfg.dpsgd_lr, epochs=cfg.dpsgd_epochs,
                                      batch=cfg.dpsgd_batch, seed=seed)
    if kind == "gnb":
        return models.train_gnb_dp(em, budget, seed=seed)
    if kind == "forest":
        return models.train_forest_dp(em, budget, n_trees=cfg.forest_trees,
                                      depth=cfg.forest_depth, seed=seed)
    raise errors.InvalidGrid("KNN has no DP variant; use NON_PRIVATE cells")


def _run_seed(ds, epsilon, constraint, kind, intervention, cfg, master_seed,
              seed, store=None, schema_dg=""):
    train, test = split_dataset(ds, cfg.test_fraction,
                                derive_seed(master_seed, "split", seed),
                                stratify=True)
    budget = NON_PRIVATE if math.isinf(epsilon) else \
        PrivacyBudget(epsilon, default_delta(round(train.n * (1 - cfg.calibration_fraction))
                                             if intervention.startswith("postprocess")
                                             else train.n))
    private = not budget.is_non_private
    use_reduction = constraint is not None and intervention.startswith("reduction")
    use_postproc = constraint is not None and intervention.startswith("postprocess")

    account = None
    thresholds = None
    rc = None
    if use_postproc:
        fit_ds, cal_ds = split_dataset(train, cfg.calibration_fraction,
                                       derive_seed(master_seed, "cal", seed),
                                       stratify=True)
        em_fit = encode_dataset(fit_ds, standardize=cfg.standardize,
                                include_protected_as_feature=cfg.include_protected_as_feature)
        em_cal = em_fit.encoder.transform(cal_ds)
        model = _train_base(kind, em_fit, budget, cfg, derive_seed(master_seed, "train", seed))
        thresholds = threshold_optimize(model, em_cal, constraint)
        encoder = em_fit.encoder
    else:
        em_train = encode_dataset(train, standardize=cfg.standardize,
                                  include_protected_as_feature=cfg.include_protected_as_feature)
        encoder = em_train.encoder
        if use_reduction:
            T = cfg.reduction_rounds_dp if private else cfg.reduction_rounds
            if private:
                account = PrivacyAccount(composition_rule="basic")
                # small shave so the float-summed composed ledger stays
                # strictly within the requested budget
                per_call = PrivacyBudget(budget.epsilon / T * (1 - 1e-9),
                                         budget.delta / T * (1 - 1e-9))
                factory = _dp_factory(kind, cfg, per_call, account)
            else:
                factory = _plain_factory(kind, cfg)
            rc = exponentiated_gradient(
                em_train, factory, constraint, B=cfg.reduction_bound,
                T=T, nu=cfg.reduction_nu, seed=derive_seed(master_seed, "train", seed),
                enrich=not private)
            model = rc
        else:
            model = _train_base(kind, em_train, budget, cfg,
                                derive_seed(master_seed, "train", seed))

    em_test = encoder.transform(test)
    X, y, g = em_test.features, em_test.labels, em_test.group_vector()
    rng = derive_rng(master_seed, "predict", seed)
    if rc is not None:
        yhat = predict_randomized(rc, X, rng)
        scores = rc.expected_score(X)
    elif thresholds is not None:
        scores = model.predict_score(X)
        yhat = thresholds.apply(scores, g, rng)
    else:
        yhat = model.predict(X)
        scores = model.predict_score(X)

    perf = metrics.evaluate_performance(y, yhat, scores)
    fr = metrics.fairness_report(y, yhat, g)
    vals = {**perf.to_dict(), "dir": fr.dir, "dpd": fr.dpd,
            "eo": fr.eo, "eopp": fr.eopp}

    if rc is not None:
        certified = account.total() if account is not None else NON_PRIVATE
        artifact = {"format": "model-v1", "kind": "mixture",
                    "components": [
                        {"weight": w, "model": models.serialize_model(m, seed, schema_dg)}
                        for w, m in rc.components],
                    "budget": certified.to_dict(),
                    "diagnostics": rc.diagnostics, "seed": seed,
                    "schema_digest": schema_dg}
    else:
        certified = getattr(model, "trained_budget", NON_PRIVATE)
        artifact = models.serialize_model(model, seed, schema_dg)
        if thresholds is not None:
            artifact["thresholds"] = thresholds.to_dict()
    ref = store.put_model(artifact) if store is not None else digest_of(artifact)
    diag = dict(rc.diagnostics) if rc is not None else {}
    return vals, ref, certified, diag


def build_frontier(ds: TabularDataset, grid: GridSpec, config=None,
                   master_seed=0, store=None,
                   progress_callback=None) -> Frontier:
    """Train and evaluate the full grid; one FrontierPoint per cell."""
    cfg = config or DEFAULT_CONFIG
    schema_dg = dataset_digest(ds)

    finite_eps = [e for e in grid.epsilons if not math.isinf(e)]
    if finite_eps and any(k in ("gnb", "forest") for k in grid.model_kinds):
        bounds_missing = [c.name for c in ds.schema
                          if c.kind == "numeric" and c.bounds is None
                          and c.name != ds.label and c.name not in ds.protected]
        if bounds_missing:
            raise errors.MissingBounds(
                f"DP cells need bounds on numeric columns: {bounds_missing}")

    points = []
    for cell_idx, (eps, cons, kind) in enumerate(grid.cells()):
        if kind == "knn" and not math.isinf(eps):
            points.append(_failed_point(cell_idx, eps, cons, kind, grid,
                                        "KNN has no DP variant", len(grid.seeds)))
            if progress_callback:
                progress_callback(cell_idx + 1, grid.n_cells)
            continue
        per_seed = []
        refs = []
        certified = []
        diags = {}
        try:
            for seed in grid.seeds:
                vals, ref, cert, diag = _run_seed(
                    ds, eps, cons, kind, grid.intervention, cfg,
                    master_seed, seed, store=store, schema_dg=schema_dg)
                per_seed.append(vals)
                refs.append(ref)
                certified.append(cert)
                if diag:
                    diags[str(seed)] = diag
            achieved = {
                m: {"mean": float(np.mean([v[m] for v in per_seed])),
                    "std": float(np.std([v[m] for v in per_seed]))}
                for m in METRIC_NAMES}
            worst = max(certified, key=lambda b: b.epsilon)
            points.append(FrontierPoint(
                point_id=f"p{cell_idx:04d}", epsilon=eps, constraint=cons,
                model_kind=kind, intervention=grid.intervention, status="ok",
                achieved=achieved, per_seed=per_seed, model_refs=refs,
                certified_budget=worst.to_dict(), diagnostics=diags))
        except errors.FairplaiError as exc:
            points.append(_failed_point(cell_idx, eps, cons, kind, grid,
                                        f"{type(exc).__name__}: {exc}",
                                        len(grid.seeds)))
        if progress_callback:
            progress_callback(cell_idx + 1, grid.n_cells)
    return Frontier(dataset_digest=schema_dg, grid=grid, points=points,
                    master_seed=master_seed, config=cfg, protected=ds.protected)


def _failed_point(cell_idx, eps, cons, kind, grid, message, n_seeds):
    return FrontierPoint(
        point_id=f"p{cell_idx:04d}", epsilon=eps, constraint=cons,
        model_kind=kind, intervention=grid.intervention, status="failed",
        achieved={}, per_seed=[], model_refs=[],
        certified_budget={"epsilon": 0.0, "delta": 0.0},
        diagnostics={"error": message, "expected_seeds": n_seeds})


# ---------------------------------------------------------------------------
# queries and persistence


PARETO_AXES = ("accuracy", "epsilon", "disparity")


def _axis_value(point: FrontierPoint, axis: str) -> float:
    if axis == "accuracy":
        return -point.mean("accuracy")       # maximize -> minimize negative
    if axis == "epsilon":
        return point.epsilon
    if axis == "disparity":
        return point.mean(point.disparity_metric)
    raise errors.EmptyAxes(f"unknown axis {axis!r}")


def pareto_filter(frontier: Frontier, axes) -> list:
    """Points not strictly dominated on every selected axis; ties retained."""
    axes = tuple(axes)
    if not axes:
        raise errors.EmptyAxes("select at least one axis")
    for a in axes:
        if a not in PARETO_AXES:
            raise errors.EmptyAxes(f"unknown axis {a!r}")
    ok_points = [p for p in frontier.points if p.status == "ok"]
    vals = {p.point_id: [_axis_value(p, a) for a in axes] for p in ok_points}
    out = []
    for p in ok_points:
        dominated = any(
            all(vals[q.point_id][i] < vals[p.point_id][i] for i in range(len(axes)))
            for q in ok_points if q.point_id != p.point_id)
        if not dominated:
            out.append(p)
    return out


def serialize_frontier(frontier: Frontier, path):
    doc = frontier.to_dict()
    payload = {"digest": digest_of(doc), "frontier": doc}
    with open(path, "wb") as fh:
        fh.write(canonical_bytes(payload))


def load_frontier(path) -> Frontier:
    try:
        with open(path, "rb") as fh:
            payload = canonical_loads(fh.read())
    except ValueError as exc:
        raise errors.CorruptFile(str(exc)) from exc
    if not isinstance(payload, dict) or "frontier" not in payload:
        raise errors.CorruptFile("missing frontier body")
    doc = payload["frontier"]
    if doc.get("version") != FRONTIER_VERSION:
        raise errors.VersionMismatch(str(doc.get("version")))
    if digest_of(doc) != payload.get("digest"):
        raise errors.CorruptFile("digest mismatch")
    return Frontier.from_dict(doc)


CSV_COLUMNS = ["point_id", "epsilon", "constraint_kind", "delta_target",
               "model", "intervention", "status"] + \
    [f"{m}_{s}" for m in METRIC_NAMES for s in ("mean", "std")]


def export_csv(frontier: Frontier) -> str:
    lines = [",".join(CSV_COLUMNS)]
    for p in frontier.points:
        row = [p.point_id,
               "inf" if math.isinf(p.epsilon) else repr(p.epsilon),
               p.constraint.kind if p.constraint else "none",
               repr(p.constraint.delta) if p.constraint else "",
               p.model_kind, p.intervention, p.status]
        for m in METRIC_NAMES:
            if p.status == "ok":
                row.append(repr(p.achieved[m]["mean"]))
                row.append(repr(p.achieved[m]["std"]))
            else:
                row.extend(["", ""])
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"
