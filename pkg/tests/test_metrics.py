import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fairplai import errors, metrics

# ---------------------------------------------------------------------------
# independent brute-force oracles (pure counting, no shared code paths)


def oracle_counts(y, yhat, groups):
    out = {}
    for g in sorted(set(groups)):
        tp = fp = tn = fn = 0
        for yi, pi, gi in zip(y, yhat, groups):
            if gi != g:
                continue
            if yi == 1 and pi == 1:
                tp += 1
            elif yi == 0 and pi == 1:
                fp += 1
            elif yi == 0 and pi == 0:
                tn += 1
            else:
                fn += 1
        out[g] = (tp, fp, tn, fn)
    return out


def oracle_majority(counts):
    best = None
    for g, (tp, fp, tn, fn) in counts.items():
        n = tp + fp + tn + fn
        if best is None or n > best[0] or (n == best[0] and str(g) < str(best[1])):
            best = (n, g)
    return best[1]


def oracle_gap(values, counts):
    maj = oracle_majority(counts)
    others = [abs(values[g] - values[maj]) for g in values if g != maj]
    return sum(others) / len(others)


def oracle_dpd(counts):
    rates = {g: (tp + fp) / (tp + fp + tn + fn)
             for g, (tp, fp, tn, fn) in counts.items()}
    return oracle_gap(rates, counts)


def oracle_dir(counts):
    maj = oracle_majority(counts)

    def rate(g):
        tp, fp, tn, fn = counts[g]
        return (tp + fp) / (tp + fp + tn + fn)

    others = [rate(g) / rate(maj) for g in counts if g != maj]
    return sum(others) / len(others)


def oracle_eopp(counts):
    tprs = {g: tp / (tp + fn) for g, (tp, fp, tn, fn) in counts.items()}
    return oracle_gap(tprs, counts)


def oracle_eo(counts):
    tprs = {g: tp / (tp + fn) for g, (tp, fp, tn, fn) in counts.items()}
    fprs = {g: fp / (fp + tn) for g, (tp, fp, tn, fn) in counts.items()}
    return max(oracle_gap(tprs, counts), oracle_gap(fprs, counts))


def oracle_auc(y, scores):
    wins = ties = 0
    pos = [s for yi, s in zip(y, scores) if yi == 1]
    neg = [s for yi, s in zip(y, scores) if yi == 0]
    for p in pos:
        for q in neg:
            if p > q:
                wins += 1
            elif p == q:
                ties += 1
    return (wins + 0.5 * ties) / (len(pos) * len(neg))


def _random_instance(rng, n_groups):
    """Every group has both labels so all rates are defined."""
    while True:
        n = int(rng.integers(4 * n_groups, 200))
        y = rng.integers(0, 2, n)
        yhat = rng.integers(0, 2, n)
        groups = rng.integers(0, n_groups, n)
        ok = all(((groups == g) & (y == 1)).any() and ((groups == g) & (y == 0)).any()
                 for g in range(n_groups))
        if ok and len(set(groups.tolist())) == n_groups:
            return y, yhat, groups


@pytest.mark.parametrize("n_groups", [2, 3, 4])
def test_fairness_metrics_match_oracle(n_groups):
    rng = np.random.default_rng(100 + n_groups)
    for _ in range(150):
        y, yhat, groups = _random_instance(rng, n_groups)
        counts = metrics.confusion_by_group(y, yhat, groups)
        ocounts = oracle_counts(y.tolist(), yhat.tolist(), groups.tolist())
        assert {g: (c.tp, c.fp, c.tn, c.fn) for g, c in counts.items()} == ocounts
        assert metrics.metric_dpd(counts) == pytest.approx(oracle_dpd(ocounts), abs=1e-12)
        assert metrics.metric_eopp(counts) == pytest.approx(oracle_eopp(ocounts), abs=1e-12)
        assert metrics.metric_eo(counts) == pytest.approx(oracle_eo(ocounts), abs=1e-12)
        if all((tp + fp) > 0 for g, (tp, fp, tn, fn) in ocounts.items()):
            assert metrics.metric_dir(counts) == pytest.approx(oracle_dir(ocounts), abs=1e-12)


def test_performance_matches_oracle():
    rng = np.random.default_rng(7)
    for _ in range(200):
        n = int(rng.integers(4, 150))
        y = rng.integers(0, 2, n)
        if y.sum() in (0, n):
            continue
        yhat = rng.integers(0, 2, n)
        scores = np.round(rng.random(n), 2)  # rounding forces ties
        rep = metrics.evaluate_performance(y, yhat, scores)
        acc = sum(int(a == b) for a, b in zip(y, yhat)) / n
        tp = sum(1 for a, b in zip(y, yhat) if a == 1 and b == 1)
        pp = int(yhat.sum())
        ap = int(y.sum())
        prec = tp / pp if pp else 0.0
        rec = tp / ap
        f1 = 2 * prec * rec / (prec + rec) if prec + rec else 0.0
        assert rep.accuracy == pytest.approx(acc, abs=1e-12)
        assert rep.precision == pytest.approx(prec, abs=1e-12)
        assert rep.recall == pytest.approx(rec, abs=1e-12)
        assert rep.f1 == pytest.approx(f1, abs=1e-12)
        assert rep.auc == pytest.approx(oracle_auc(y, scores), abs=1e-12)


# ---------------------------------------------------------------------------
# fixed hand-checked values


def test_known_two_group_values():
    # group 0: rates 3/4 selected; group 1: 1/4
    y = [1, 1, 0, 0, 1, 1, 0, 0]
    yhat = [1, 1, 1, 0, 1, 0, 0, 0]
    g = [0, 0, 0, 0, 1, 1, 1, 1]
    counts = metrics.confusion_by_group(y, yhat, g)
    assert metrics.metric_dpd(counts) == pytest.approx(0.5)
    assert metrics.metric_dir(counts) == pytest.approx((1 / 4) / (3 / 4))
    assert metrics.metric_eopp(counts) == pytest.approx(0.5)  # TPR 1 vs 0.5
    assert metrics.metric_eo(counts) == pytest.approx(0.5)


def test_dir_80_percent_rule_paper_style():
    # selection rates 0.4 vs 0.5 -> ratio 0.8 exactly on the threshold
    yhat = [1] * 5 + [0] * 5 + [1] * 4 + [0] * 6
    y = [1] * 20
    g = [0] * 10 + [1] * 10
    counts = metrics.confusion_by_group(y, yhat, g)
    assert metrics.metric_dir(counts) == pytest.approx(0.8)


# ---------------------------------------------------------------------------
# error paths and invariants


def test_single_group_raises():
    counts = metrics.confusion_by_group([0, 1], [0, 1], [0, 0])
    with pytest.raises(errors.SingleGroup):
        metrics.metric_dpd(counts)


def test_zero_reference_rate():
    counts = metrics.confusion_by_group([1, 0, 1, 0, 1], [0, 0, 0, 1, 0],
                                        [0, 0, 0, 1, 1])
    with pytest.raises(errors.ZeroReferenceRate):
        metrics.metric_dir(counts)


def test_undefined_rate_names_group():
    # group 1 has no negatives -> FPR undefined
    counts = metrics.confusion_by_group([1, 0, 1, 1], [1, 0, 1, 0], [0, 0, 1, 1])
    with pytest.raises(errors.UndefinedRate):
        metrics.metric_eo(counts)


def test_auc_requires_scores():
    with pytest.raises(errors.AUCWithoutScores):
        metrics.evaluate_performance([0, 1], [0, 1], scores=None)


def test_length_mismatch():
    with pytest.raises(errors.LengthMismatch):
        metrics.confusion_by_group([0, 1], [0], [0, 1])


def test_perfect_and_inverted_auc():
    assert metrics.auc_score([0, 0, 1, 1], [0.1, 0.2, 0.8, 0.9]) == 1.0
    assert metrics.auc_score([0, 0, 1, 1], [0.9, 0.8, 0.2, 0.1]) == 0.0
    assert metrics.auc_score([0, 1], [0.5, 0.5]) == 0.5


@settings(max_examples=60)
@given(st.integers(0, 2**32 - 1))
def test_symmetric_groups_give_zero_disparity(seed):
    """Duplicating one group's rows under two labels means no disparity."""
    rng = np.random.default_rng(seed)
    n = int(rng.integers(4, 60))
    y = rng.integers(0, 2, n)
    if not (0 < y.sum() < n):
        return
    yhat = rng.integers(0, 2, n)
    y2 = np.concatenate([y, y])
    yhat2 = np.concatenate([yhat, yhat])
    g = np.concatenate([np.zeros(n, int), np.ones(n, int)])
    counts = metrics.confusion_by_group(y2, yhat2, g)
    assert metrics.metric_dpd(counts) == 0.0
    assert metrics.metric_eopp(counts) == 0.0
    assert metrics.metric_eo(counts) == 0.0


def test_report_aggregation_tag():
    y = [1, 0, 1, 0, 1, 0]
    yhat = [1, 0, 1, 0, 1, 0]
    rep2 = metrics.fairness_report(y, yhat, [0, 0, 0, 1, 1, 1])
    assert rep2.aggregation == "binary_pair"
    rep3 = metrics.fairness_report(y, yhat, [0, 0, 1, 1, 2, 2])
    assert rep3.aggregation == "pairwise_vs_majority"
