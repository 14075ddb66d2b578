"""Fairness interventions: in-processing via the exponentiated-gradient
reduction and post-processing via group-specific decision thresholds.

The reduction plays a Lagrangian saddle-point game: a multiplier vector on
signed disparity moments is updated multiplicatively while a cost-sensitive
oracle best-responds each round; the result is a weighted mixture of base
classifiers. A final linear program over the collected iterates picks the
lowest-error mixture that meets the constraint (dropping it when no
feasible mixture exists, with a diagnostic flag).
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from . import errors
from .dataset import EncodedMatrix
from .rngutil import derive_rng, derive_seed

CONSTRAINT_KINDS = ("DemographicParity", "EqualizedOdds", "EqualOpportunity")
WEIGHT_TRIM = 1e-3


@dataclass(frozen=True)
class FairnessConstraint:
    kind: str
    delta: float

    def __post_init__(self):
        if self.kind not in CONSTRAINT_KINDS:
            raise ValueError(f"unknown fairness constraint {self.kind!r}")
        if not 0.0 <= self.delta <= 1.0:
            raise ValueError(f"delta={self.delta} outside [0, 1]")


@dataclass
class RandomizedClassifier:
    components: list  # (weight, Predictor)
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.components:
            raise ValueError("mixture needs at least one component")
        total = sum(w for w, _ in self.components)
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"weights sum to {total}, not 1")

    def expected_positive(self, X) -> np.ndarray:
        """Probability of a positive prediction under the mixture."""
        out = np.zeros(np.atleast_2d(X).shape[0])
        for w, model in self.components:
            out += w * model.predict(X)
        return out

    def expected_score(self, X) -> np.ndarray:
        out = np.zeros(np.atleast_2d(X).shape[0])
        for w, model in self.components:
            out += w * model.predict_score(X)
        return out


def predict_randomized(rc: RandomizedClassifier, X, rng: np.random.Generator):
    """Sample one component per row by weight and return its prediction."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    weights = np.array([w for w, _ in rc.components])
    choice = rng.choice(len(weights), size=X.shape[0], p=weights)
    preds = np.vstack([model.predict(X) for _, model in rc.components])
    return preds[choice, np.arange(X.shape[0])]


def _with_labels(data: EncodedMatrix, labels) -> EncodedMatrix:
    return EncodedMatrix(features=data.features, labels=np.asarray(labels, dtype=int),
                         groups=data.groups, encoder=data.encoder)


def cost_sensitive_oracle(data: EncodedMatrix, weights, learner_factory, seed=0):
    """Train the base learner on signed-weight examples.

    A negative weight on (x, y) trains as (x, 1-y) with weight |w|.
    """
    weights = np.asarray(weights, dtype=float)
    if not np.all(np.isfinite(weights)):
        raise errors.OracleFailure("non-finite oracle weights")
    if np.all(weights == 0):
        raise errors.AllZeroWeights("all oracle weights are zero")
    labels = np.where(weights >= 0, data.labels, 1 - data.labels)
    try:
        return learner_factory(_with_labels(data, labels), np.abs(weights), seed)
    except errors.FairplaiError:
        raise
    except Exception as exc:  # noqa: BLE001 - oracle wraps learner errors
        raise errors.OracleFailure(str(exc)) from exc


def _majority_id(groups) -> int:
    ids, counts = np.unique(groups, return_counts=True)
    order = sorted(zip(ids.tolist(), counts.tolist()), key=lambda t: (-t[1], str(t[0])))
    return order[0][0]


def build_moments(constraint: FairnessConstraint, y, groups):
    """Signed disparity moments as a (m x n) matrix G with violation
    v(h) = G @ h; the constraint is v_j(h) <= delta for all j.

    Moments compare each non-majority group to the majority group:
    selection rates for demographic parity, per-label positive rates
    (TPR and FPR) for equalized odds, TPR only for equal opportunity.
    """
    y = np.asarray(y)
    groups = np.asarray(groups)
    n = len(y)
    maj = _majority_id(groups)
    rows = []
    label_slices = {"DemographicParity": (None,),
                    "EqualizedOdds": (1, 0),
                    "EqualOpportunity": (1,)}[constraint.kind]
    for g in np.unique(groups):
        if g == maj:
            continue
        for y_val in label_slices:
            if y_val is None:
                in_g = groups == g
                in_maj = groups == maj
            else:
                in_g = (groups == g) & (y == y_val)
                in_maj = (groups == maj) & (y == y_val)
            if not in_g.any() or not in_maj.any():
                continue  # rate undefined for this slice; cannot constrain it
            row = np.zeros(n)
            row[in_g] = 1.0 / in_g.sum()
            row[in_maj] = -1.0 / in_maj.sum()
            rows.append(row)
            rows.append(-row)
    return np.vstack(rows) if rows else np.zeros((0, n))


def _mixture_lp(errs, viols, delta):
    """min error over mixture weights subject to all moment violations
    <= delta; returns (weights, feasible, duals).

    `duals` is (mu, pi) with mu >= 0 the moment prices and pi the price of
    the sum-to-one constraint, or None when the LP was infeasible.
    """
    T = len(errs)
    m = viols.shape[1] if viols.size else 0
    a_eq = np.ones((1, T))
    if m:
        res = linprog(c=errs, A_ub=viols.T, b_ub=np.full(m, delta),
                      A_eq=a_eq, b_eq=[1.0], bounds=[(0, None)] * T,
                      method="highs")
        if res.status == 0:
            duals = (-np.asarray(res.ineqlin.marginals),
                     float(res.eqlin.marginals[0]))
            return res.x, True, duals
        # infeasible: minimize the worst violation instead (best effort)
        c = np.zeros(T + 1)
        c[-1] = 1.0
        a_ub = np.hstack([viols.T, -np.ones((m, 1))])
        a_eq2 = np.hstack([a_eq, np.zeros((1, 1))])
        res = linprog(c=c, A_ub=a_ub, b_ub=np.zeros(m), A_eq=a_eq2, b_eq=[1.0],
                      bounds=[(0, None)] * T + [(None, None)], method="highs")
        if res.status == 0:
            return res.x[:-1], False, None
    weights = np.zeros(T)
    weights[int(np.argmin(errs))] = 1.0
    return weights, m == 0, None


def exponentiated_gradient(data: EncodedMatrix, learner_factory,
                           constraint: FairnessConstraint, B=100.0, eta=None,
                           T=50, nu=1e-3, seed=0, attr=None,
                           enrich=True) -> RandomizedClassifier:
    """Lagrangian saddle-point reduction to cost-sensitive classification.

    With `enrich` (default), the final LP refinement runs column
    generation: the LP's dual prices are fed back to the cost-sensitive
    oracle (the exact pricing problem) and its best response joins the
    candidate pool until no classifier improves the mixture. This costs
    extra oracle calls but makes the returned mixture optimal over the
    hypothesis class up to LP tolerance; disable when each oracle call
    spends privacy budget.
    """
    if T < 1:
        raise ValueError("T must be >= 1")
    X = data.features
    y = data.labels
    groups = data.group_vector(attr)
    if len(np.unique(y)) < 2:
        raise errors.SingleClassData("both labels must be present")
    if len(np.unique(groups)) < 2:
        raise errors.SingleGroup("need at least two groups")
    G = build_moments(constraint, y, groups)
    m, n = G.shape
    if eta is None:
        eta = 2.0 / np.sqrt(T)

    theta = np.zeros(m)
    lam_sum = np.zeros(m)
    models_seen = []
    preds = []     # per-iterate predictions on training rows
    errs = []
    viols = []     # per-iterate moment violations
    gap = np.inf

    def oracle_for(lam, round_idx):
        c1 = (1.0 - y) / n + (G.T @ lam if m else 0.0)
        c0 = y / n
        mag = np.abs(c0 - c1)
        desired = (c1 < c0).astype(int)
        signed = np.where(desired == y, mag, -mag)
        if np.all(signed == 0):
            signed = np.full(n, 1.0 / n)  # costs tied: fall back to plain training
        return cost_sensitive_oracle(data, signed, learner_factory,
                                     seed=derive_seed(seed, "oracle", round_idx))

    for t in range(T):
        if m:
            e = np.exp(theta - theta.max())
            lam = B * e / (np.exp(-theta.max()) + e.sum())
        else:
            lam = np.zeros(0)
        lam_sum += lam
        model = oracle_for(lam, t)
        h = model.predict(X)
        models_seen.append(model)
        preds.append(h)
        errs.append(float(np.mean(h != y)))
        v = G @ h if m else np.zeros(0)
        viols.append(v)
        if m:
            theta = theta + eta * (v - constraint.delta)

        if m and (t + 1) % 5 == 0:
            q = np.full(t + 1, 1.0 / (t + 1))
            err_bar = float(q @ np.array(errs))
            v_bar = q @ np.vstack(viols)
            upper = err_bar + B * max(0.0, float(np.max(v_bar - constraint.delta)))
            lam_bar = lam_sum / (t + 1)
            br = oracle_for(lam_bar, 10_000 + t)
            hb = br.predict(X)
            lower = float(np.mean(hb != y) + lam_bar @ (G @ hb - constraint.delta))
            gap = upper - lower
            if gap <= nu:
                break

    n_rounds = len(errs)
    weights, feasible, duals = _mixture_lp(
        np.array(errs), np.vstack(viols) if m else np.zeros((len(errs), 0)),
        constraint.delta)
    if m and enrich:
        seen = {np.asarray(h).tobytes() for h in preds}
        for it in range(100):
            if not feasible or duals is None:
                break
            mu, pi = duals
            model = oracle_for(np.maximum(mu, 0.0), 20_000 + it)
            h = model.predict(X)
            reduced = float(np.mean(h != y) + mu @ (G @ h)) - pi
            key = np.asarray(h).tobytes()
            if reduced >= -1e-9 or key in seen:
                break
            seen.add(key)
            models_seen.append(model)
            preds.append(h)
            errs.append(float(np.mean(h != y)))
            viols.append(G @ h)
            weights, feasible, duals = _mixture_lp(
                np.array(errs), np.vstack(viols), constraint.delta)

    errs = np.array(errs)
    viol_mat = np.vstack(viols) if m else np.zeros((len(errs), 0))
    keep = weights > WEIGHT_TRIM
    if not keep.any():
        keep = weights == weights.max()
    weights = weights * keep
    weights = weights / weights.sum()
    components = [(float(w), models_seen[i])
                  for i, w in enumerate(weights) if w > 0]
    mix_err = float(weights @ errs)
    mix_viol = float(np.max(weights @ viol_mat)) if m else 0.0
    return RandomizedClassifier(components=components, diagnostics={
        "feasible": bool(feasible),
        "duality_gap": float(gap) if np.isfinite(gap) else None,
        "rounds": n_rounds,
        "train_error": mix_err,
        "train_violation": mix_viol,
        "no_feasible_point": not feasible,
    })


# ---------------------------------------------------------------------------
# threshold post-processing


@dataclass
class GroupThresholds:
    per_group: dict          # group id -> (threshold, boundary probability)
    mode: str                # constraint kind
    common_target: float     # equalized rate (DP/EOpp) or FPR slice (EO)
    degenerate_groups: tuple = ()

    def positive_probability(self, scores, groups) -> np.ndarray:
        scores = np.asarray(scores, dtype=float)
        groups = np.asarray(groups)
        out = np.zeros(len(scores))
        for g, (t, p) in self.per_group.items():
            mask = groups == g
            s = scores[mask]
            out[mask] = np.where(s > t, 1.0, np.where(s == t, p, 0.0))
        return out

    def apply(self, scores, groups, rng: np.random.Generator) -> np.ndarray:
        prob = self.positive_probability(scores, groups)
        return (rng.random(len(prob)) < prob).astype(int)

    def to_dict(self) -> dict:
        return {"mode": self.mode, "common_target": self.common_target,
                "per_group": {str(g): [t, p] for g, (t, p) in self.per_group.items()},
                "degenerate_groups": [str(g) for g in self.degenerate_groups]}


def _rate_threshold(scores, rate):
    """(t, p) such that frac(s > t) + p * frac(s == t) == rate, exactly,
    on the given score sample."""
    n = len(scores)
    if rate <= 0:
        return float(np.max(scores)), 0.0
    uniq = np.unique(scores)[::-1]
    frac_gt = 0.0
    for u in uniq:
        frac_eq = float(np.mean(scores == u))
        if frac_gt + frac_eq >= rate - 1e-12:
            p = (rate - frac_gt) / frac_eq
            return float(u), float(min(max(p, 0.0), 1.0))
        frac_gt += frac_eq
    return float(np.min(scores)) - 1.0, 0.0  # rate 1: everything above t


def _expected_objective(y, prob, objective):
    y = np.asarray(y)
    if objective == "accuracy":
        return float(np.mean(np.where(y == 1, prob, 1.0 - prob)))
    if objective == "f1":
        tp = float(np.sum(prob[y == 1]))
        fp = float(np.sum(prob[y == 0]))
        fn = float(np.sum((1 - prob)[y == 1]))
        denom = 2 * tp + fp + fn
        return 2 * tp / denom if denom else 0.0
    raise ValueError(f"unsupported objective {objective!r}")


def threshold_optimize(model, calibration: EncodedMatrix,
                       constraint: FairnessConstraint, objective="accuracy",
                       attr=None, rate_grid=101) -> GroupThresholds:
    """Choose per-group randomized thresholds on the model's scores.

    DemographicParity equalizes selection rates; EqualOpportunity equalizes
    TPR; EqualizedOdds equalizes FPR exactly along a grid of FPR slices and
    picks the slice with the smallest residual TPR gap (objective breaking
    ties). The underlying model is never modified.
    """
    scores = model.predict_score(calibration.features)
    y = calibration.labels
    groups = calibration.group_vector(attr)
    attr_name = attr or calibration.encoder.protected[0]
    expected = set(range(len(calibration.encoder.group_categories[attr_name])))
    present = set(np.unique(groups).tolist())
    if not expected <= present:
        raise errors.GroupMissingScores(f"groups absent from calibration: "
                                        f"{sorted(expected - present)}")
    gids = sorted(present)
    degenerate = tuple(g for g in gids if len(np.unique(scores[groups == g])) == 1)

    if constraint.kind == "DemographicParity":
        pool = {g: scores[groups == g] for g in gids}
    elif constraint.kind == "EqualOpportunity":
        pool = {}
        for g in gids:
            mask = (groups == g) & (y == 1)
            if not mask.any():
                raise errors.UndefinedRate(g, "positive")
            pool[g] = scores[mask]
    else:
        return _threshold_optimize_eo(scores, y, groups, gids, objective,
                                      degenerate, rate_grid)

    candidates = sorted(set(np.concatenate(
        [np.linspace(0.0, 1.0, rate_grid)]
        + [np.arange(1, len(s) + 1) / len(s) for s in pool.values()]).tolist()))
    best = None
    for r in candidates:
        per_group = {g: _rate_threshold(pool[g], r) for g in gids}
        gt = GroupThresholds(per_group=per_group, mode=constraint.kind,
                             common_target=float(r), degenerate_groups=degenerate)
        prob = gt.positive_probability(scores, groups)
        obj = _expected_objective(y, prob, objective)
        if best is None or obj > best[0] + 1e-12:
            best = (obj, gt)
    return best[1]


def _threshold_optimize_eo(scores, y, groups, gids, objective, degenerate,
                           rate_grid):
    # equalize FPR exactly per slice; among slices prefer small TPR gap,
    # then high objective
    neg_pool, pos_pool = {}, {}
    for g in gids:
        neg = (groups == g) & (y == 0)
        pos = (groups == g) & (y == 1)
        if not neg.any():
            raise errors.UndefinedRate(g, "negative")
        if not pos.any():
            raise errors.UndefinedRate(g, "positive")
        neg_pool[g] = scores[neg]
        pos_pool[g] = scores[pos]

    best = None
    for f in np.linspace(0.0, 1.0, rate_grid):
        per_group = {g: _rate_threshold(neg_pool[g], f) for g in gids}
        gt = GroupThresholds(per_group=per_group, mode="EqualizedOdds",
                             common_target=float(f), degenerate_groups=degenerate)
        tprs = []
        for g in gids:
            t, p = per_group[g]
            s = pos_pool[g]
            tprs.append(float(np.mean(s > t) + p * np.mean(s == t)))
        tpr_gap = max(tprs) - min(tprs)
        prob = gt.positive_probability(scores, groups)
        obj = _expected_objective(y, prob, objective)
        key = (round(tpr_gap, 6), -obj)
        if best is None or key < best[0]:
            best = (key, gt)
    return best[1]
