"""Performance and group-fairness metrics.

Fairness disparities (DPD, EO, EOpp, DIR) are computed directly between the
two groups when there are exactly two, and pairwise relative to the majority
group, averaged, when there are more. The majority group is the largest
group, ties broken by the lexicographically smallest id.
"""

from dataclasses import dataclass, asdict

import numpy as np
from scipy.stats import rankdata

from . import errors


@dataclass(frozen=True)
class GroupCounts:
    tp: int = 0
    fp: int = 0
    tn: int = 0
    fn: int = 0

    @property
    def n(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    @property
    def selection_rate(self) -> float:
        return (self.tp + self.fp) / self.n

    @property
    def positives(self) -> int:
        return self.tp + self.fn

    @property
    def negatives(self) -> int:
        return self.fp + self.tn

    def tpr(self) -> float:
        if self.positives == 0:
            raise errors.UndefinedRate("?", "positive")
        return self.tp / self.positives

    def fpr(self) -> float:
        if self.negatives == 0:
            raise errors.UndefinedRate("?", "negative")
        return self.fp / self.negatives


@dataclass(frozen=True)
class PerformanceReport:
    accuracy: float
    precision: float
    recall: float
    f1: float
    auc: float

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class FairnessReport:
    dir: float
    dpd: float
    eo: float
    eopp: float
    per_group_rates: dict  # group -> {selection_rate, tpr, fpr}
    aggregation: str       # binary_pair | pairwise_vs_majority

    def to_dict(self) -> dict:
        return {
            "dir": self.dir, "dpd": self.dpd, "eo": self.eo, "eopp": self.eopp,
            "per_group_rates": {str(g): dict(r) for g, r in self.per_group_rates.items()},
            "aggregation": self.aggregation,
        }


def confusion_by_group(y, yhat, groups) -> dict:
    """Exact confusion counts per group; empty groups are absent."""
    y = np.asarray(y)
    yhat = np.asarray(yhat)
    groups = np.asarray(groups)
    if not (len(y) == len(yhat) == len(groups)) or len(y) == 0:
        raise errors.LengthMismatch(f"{len(y)}, {len(yhat)}, {len(groups)}")
    out = {}
    for g in np.unique(groups):
        mask = groups == g
        yg, pg = y[mask], yhat[mask]
        key = g.item() if hasattr(g, "item") else g
        out[key] = GroupCounts(
            tp=int(np.sum((yg == 1) & (pg == 1))),
            fp=int(np.sum((yg == 0) & (pg == 1))),
            tn=int(np.sum((yg == 0) & (pg == 0))),
            fn=int(np.sum((yg == 1) & (pg == 0))),
        )
    return out


def _majority_group(counts: dict):
    return min(counts, key=lambda g: (-counts[g].n, str(g)))


def aggregate_pairwise(per_group_values: dict, group_sizes: dict) -> float:
    """Mean absolute gap between each non-majority group and the majority.

    For exactly two groups this equals the direct pairwise gap.
    """
    if len(per_group_values) < 2:
        raise errors.SingleGroup(str(list(per_group_values)))
    maj = min(group_sizes, key=lambda g: (-group_sizes[g], str(g)))
    ref = per_group_values[maj]
    gaps = [abs(per_group_values[g] - ref) for g in per_group_values if g != maj]
    return float(np.mean(gaps))


def _sizes(counts: dict) -> dict:
    return {g: c.n for g, c in counts.items()}


def metric_dpd(counts: dict) -> float:
    """Demographic parity difference on selection rates."""
    if len(counts) < 2:
        raise errors.SingleGroup(str(list(counts)))
    rates = {g: c.selection_rate for g, c in counts.items()}
    return aggregate_pairwise(rates, _sizes(counts))


def metric_dir(counts: dict) -> float:
    """Disparate impact ratio: mean non-majority selection rate over the
    majority (reference) selection rate, pairwise-averaged for >2 groups."""
    if len(counts) < 2:
        raise errors.SingleGroup(str(list(counts)))
    maj = _majority_group(counts)
    ref_rate = counts[maj].selection_rate
    if ref_rate == 0:
        raise errors.ZeroReferenceRate(str(maj))
    ratios = [counts[g].selection_rate / ref_rate for g in counts if g != maj]
    return float(np.mean(ratios))


def _rate_map(counts: dict, which: str) -> dict:
    out = {}
    for g, c in counts.items():
        try:
            out[g] = c.tpr() if which == "tpr" else c.fpr()
        except errors.UndefinedRate:
            raise errors.UndefinedRate(g, "positive" if which == "tpr" else "negative") from None
    return out


def metric_eopp(counts: dict) -> float:
    """Equal-opportunity difference: aggregated TPR gap."""
    if len(counts) < 2:
        raise errors.SingleGroup(str(list(counts)))
    return aggregate_pairwise(_rate_map(counts, "tpr"), _sizes(counts))


def metric_eo(counts: dict) -> float:
    """Equalized-odds difference: max of the aggregated TPR and FPR gaps."""
    if len(counts) < 2:
        raise errors.SingleGroup(str(list(counts)))
    tpr_gap = aggregate_pairwise(_rate_map(counts, "tpr"), _sizes(counts))
    fpr_gap = aggregate_pairwise(_rate_map(counts, "fpr"), _sizes(counts))
    return max(tpr_gap, fpr_gap)


def fairness_report(y, yhat, groups) -> FairnessReport:
    counts = confusion_by_group(y, yhat, groups)
    per_group = {}
    for g, c in counts.items():
        per_group[g] = {
            "selection_rate": c.selection_rate,
            "tpr": c.tp / c.positives if c.positives else None,
            "fpr": c.fp / c.negatives if c.negatives else None,
        }
    return FairnessReport(
        dir=metric_dir(counts),
        dpd=metric_dpd(counts),
        eo=metric_eo(counts),
        eopp=metric_eopp(counts),
        per_group_rates=per_group,
        aggregation="binary_pair" if len(counts) == 2 else "pairwise_vs_majority",
    )


def auc_score(y, scores) -> float:
    """Mann-Whitney rank AUC; ties counted half."""
    y = np.asarray(y)
    scores = np.asarray(scores, dtype=float)
    n_pos = int(np.sum(y == 1))
    n_neg = int(np.sum(y == 0))
    if n_pos == 0 or n_neg == 0:
        raise errors.UndefinedRate("all", "positive" if n_pos == 0 else "negative")
    ranks = rankdata(scores)
    rank_sum = float(np.sum(ranks[y == 1]))
    return (rank_sum - n_pos * (n_pos + 1) / 2) / (n_pos * n_neg)


def evaluate_performance(y, yhat, scores=None) -> PerformanceReport:
    y = np.asarray(y)
    yhat = np.asarray(yhat)
    if len(y) != len(yhat) or len(y) == 0:
        raise errors.LengthMismatch(f"{len(y)} vs {len(yhat)}")
    accuracy = float(np.mean(y == yhat))
    pred_pos = int(np.sum(yhat == 1))
    actual_pos = int(np.sum(y == 1))
    tp = int(np.sum((y == 1) & (yhat == 1)))
    precision = tp / pred_pos if pred_pos else 0.0
    recall = tp / actual_pos if actual_pos else 0.0
    f1 = (2 * precision * recall / (precision + recall)) if (precision + recall) else 0.0
    if scores is None:
        raise errors.AUCWithoutScores("scores are required for AUC")
    auc = auc_score(y, scores)
    return PerformanceReport(accuracy=accuracy, precision=precision,
                             recall=recall, f1=f1, auc=auc)
