"""End-to-end acceptance checks. Each test prints one pass/fail line."""

import math
import time

import numpy as np
import pytest
from scipy import stats
from scipy.optimize import linprog

from fairplai import dp, errors, fair, metrics, models, policy
from fairplai.config import DEFAULT_CONFIG as CFG
from fairplai.dataset import encode_dataset, split_dataset
from fairplai.fair import FairnessConstraint
from fairplai.fixtures import (adult_like, biased_matrix, threshold_family,
                               threshold_oracle_factory)
from fairplai.frontier import GridSpec, build_frontier
from fairplai.rngutil import derive_rng
from fairplai.store import Store

from test_metrics import (oracle_auc, oracle_counts, oracle_dir, oracle_dpd,
                          oracle_eo, oracle_eopp, _random_instance)
from test_policy import _frontier, _point, _tup


def _report(num, name, ok, dt, limit):
    verdict = "PASS" if ok and dt < limit else "FAIL"
    print(f"criterion {num} ({name}): {verdict} [{dt:.1f}s / limit {limit}s]")
    assert ok
    assert dt < limit


def test_criterion_1_metric_oracle_equivalence():
    t0 = time.perf_counter()
    ok = True
    rng = np.random.default_rng(202)
    for trial in range(1000):
        n_groups = 2 + trial % 3
        y, yhat, groups = _random_instance(rng, n_groups)
        counts = metrics.confusion_by_group(y, yhat, groups)
        oc = oracle_counts(y.tolist(), yhat.tolist(), groups.tolist())
        ok &= abs(metrics.metric_dpd(counts) - oracle_dpd(oc)) <= 1e-12
        ok &= abs(metrics.metric_eopp(counts) - oracle_eopp(oc)) <= 1e-12
        ok &= abs(metrics.metric_eo(counts) - oracle_eo(oc)) <= 1e-12
        if all(tp + fp > 0 for tp, fp, tn, fn in oc.values()):
            ok &= abs(metrics.metric_dir(counts) - oracle_dir(oc)) <= 1e-12
        scores = np.round(rng.random(len(y)), 2)
        rep = metrics.evaluate_performance(y, yhat, scores)
        n = len(y)
        acc = sum(int(a == b) for a, b in zip(y, yhat)) / n
        tp = sum(1 for a, b in zip(y, yhat) if a == 1 and b == 1)
        pp, ap = int(yhat.sum()), int(y.sum())
        prec = tp / pp if pp else 0.0
        rec = tp / ap
        f1 = 2 * prec * rec / (prec + rec) if prec + rec else 0.0
        ok &= abs(rep.accuracy - acc) <= 1e-12
        ok &= abs(rep.precision - prec) <= 1e-12
        ok &= abs(rep.recall - rec) <= 1e-12
        ok &= abs(rep.f1 - f1) <= 1e-12
        ok &= abs(rep.auc - oracle_auc(y, scores)) <= 1e-12
    _report(1, "metric oracle equivalence", ok, time.perf_counter() - t0, 10)


def test_criterion_2_dp_mechanism_suite():
    t0 = time.perf_counter()
    ok = True
    rng = derive_rng(0, "acceptance-dp")
    # clip invariant on 1e4 random vectors
    for _ in range(10_000):
        v = rng.normal(0, rng.uniform(0.1, 10), size=rng.integers(1, 12))
        c = float(rng.uniform(0.05, 5.0))
        out = dp.clip_l2(v, c)
        norm = float(np.linalg.norm(out))
        ok &= norm <= c * (1 + 1e-9)
        if np.linalg.norm(v) <= c:
            ok &= bool(np.allclose(out, v))
    # distribution tests at alpha = 0.01 with 1e5 samples
    lap = dp.sample_laplace(2.0, 0.7, derive_rng(0, "acc-lap"), size=100_000)
    ok &= stats.kstest(lap, stats.laplace(scale=2.0 / 0.7).cdf).pvalue > 0.01
    sigma = dp.calibrate_gaussian_sigma(1.0, dp.PrivacyBudget(0.8, 1e-5))
    gau = derive_rng(0, "acc-gau").normal(0.0, sigma, size=100_000)
    ok &= stats.kstest(gau, stats.norm(scale=sigma).cdf).pvalue > 0.01
    # accountant closed forms
    acc = dp.PrivacyAccount()
    for _ in range(9):
        acc.spend("m", 0.25, 2e-7)
    ok &= abs(acc.total().epsilon - 9 * 0.25) <= 1e-12
    ok &= abs(acc.total().delta - 9 * 2e-7) <= 1e-15
    k, e = 30, 0.08
    adv = dp.PrivacyAccount(composition_rule="advanced")
    for _ in range(k):
        adv.spend("m", e, 1e-8)
    expected = (math.sqrt(2 * k * math.log(1 / dp.ADVANCED_DELTA_SLACK)) * e
                + k * e * (math.exp(e) - 1))
    ok &= abs(adv.total().epsilon - expected) <= 1e-12
    # every DP trainer certifies within the requested budget
    data = biased_matrix(n_per_group=120, seed=0)
    for eps in (0.3, 1.0, 4.0):
        budget = dp.PrivacyBudget(eps, dp.default_delta(data.n))
        for trainer in (
                lambda: models.train_logreg_dp(data, budget, epochs=8, seed=1),
                lambda: models.train_gnb_dp(data, budget, seed=1),
                lambda: models.train_forest_dp(data, budget, n_trees=3,
                                               depth=3, seed=1)):
            m = trainer()
            ok &= m.trained_budget.epsilon <= eps
            ok &= m.trained_budget.delta <= budget.delta
    _report(2, "DP mechanism suite", ok, time.perf_counter() - t0, 30)


def _tiny_instance(rng, encoder, n_max=8):
    while True:
        n = int(rng.integers(4, n_max + 1))
        g = rng.integers(0, 2, n)
        y = rng.integers(0, 2, n)
        if 0 < g.sum() < n and 0 < y.sum() < n:
            break
    x = np.round(rng.normal(size=n), 3)
    from fairplai.dataset import EncodedMatrix
    return EncodedMatrix(features=np.column_stack([x, g.astype(float)]),
                         labels=y, groups={"group": g}, encoder=encoder)


def _brute_force(data, constraint):
    X, y = data.features, data.labels
    G = fair.build_moments(constraint, y, data.group_vector("group"))
    family = threshold_family(X, 0)
    errs = np.array([np.mean(h.predict(X) != y) for h in family])
    viols = np.array([G @ h.predict(X).astype(float) for h in family]).T
    res = linprog(errs, A_ub=viols,
                  b_ub=np.full(viols.shape[0], constraint.delta),
                  A_eq=np.ones((1, len(family))), b_eq=[1.0],
                  bounds=[(0, 1)] * len(family), method="highs")
    return res.fun if res.success else None


def test_criterion_3_reduction_soundness():
    t0 = time.perf_counter()
    nu = 1e-3
    ok = True
    rng = np.random.default_rng(77)
    encoder = biased_matrix(n_per_group=4).encoder
    checked = 0
    while checked < 200:
        data = _tiny_instance(rng, encoder)
        constraint = FairnessConstraint(
            "DemographicParity", float(rng.choice([0.05, 0.1, 0.25])))
        opt = _brute_force(data, constraint)
        if opt is None:
            continue
        rc = fair.exponentiated_gradient(
            data, threshold_oracle_factory(0), constraint,
            T=50, nu=nu, seed=checked, attr="group")
        X, y = data.features, data.labels
        G = fair.build_moments(constraint, y, data.group_vector("group"))
        prob = rc.expected_positive(X)
        err = float(np.mean(np.where(y == 1, 1.0 - prob, prob)))
        viol = float(np.max(G @ prob))
        ok &= viol <= constraint.delta + nu
        ok &= err <= opt + nu + 1e-9
        checked += 1
    _report(3, "reduction soundness", ok, time.perf_counter() - t0, 120)


def test_criterion_4_intervention_efficacy():
    t0 = time.perf_counter()
    constraint = FairnessConstraint("DemographicParity", 0.05)
    red_dpds, gap_rates = [], []
    for seed in range(10):
        data = biased_matrix(seed=seed)

        def factory(d, w, s):
            return models.train_logreg(d, sample_weight=w, seed=s, epochs=100)

        rc = fair.exponentiated_gradient(data, factory, constraint,
                                         T=30, seed=seed, attr="group")
        prob = rc.expected_positive(data.features)
        g = data.group_vector("group")
        red_dpds.append(abs(prob[g == 0].mean() - prob[g == 1].mean()))

        model = models.train_logreg(data, seed=seed)
        gt = fair.threshold_optimize(model, data, constraint, attr="group")
        p = gt.positive_probability(model.predict_score(data.features), g)
        gap_rates.append(abs(p[g == 0].mean() - p[g == 1].mean()))
    ok = float(np.mean(red_dpds)) <= 0.07 and float(np.mean(gap_rates)) <= 0.01
    print(f"  reduction mean DPD {np.mean(red_dpds):.4f}, "
          f"postprocess mean gap {np.mean(gap_rates):.4f}")
    _report(4, "intervention efficacy", ok, time.perf_counter() - t0, 60)


def test_criterion_5_desk_scale_benchmark():
    t0 = time.perf_counter()
    ds = adult_like(n=5000, seed=0)
    grid = GridSpec(epsilons=(1.0,),
                    constraints=(FairnessConstraint("DemographicParity", 0.05),),
                    model_kinds=("logreg",), seeds=(0, 1, 2, 3, 4),
                    intervention="postprocess+dp")
    f = build_frontier(ds, grid, master_seed=0)
    p = f.points[0]
    dpd = p.achieved["dpd"]["mean"]
    acc = p.achieved["accuracy"]["mean"]
    ok = (p.status == "ok" and dpd <= 0.06 and acc >= 0.75
          and p.certified_budget["epsilon"] <= 1.0)
    print(f"  achieved DPD {dpd:.4f} (<=0.06), accuracy {acc:.4f} (>=0.75), "
          f"certified eps {p.certified_budget['epsilon']:.4f}")
    _report(5, "desk-scale benchmark", ok, time.perf_counter() - t0, 900)


def test_criterion_6_accuracy_rises_with_epsilon():
    t0 = time.perf_counter()
    ds = adult_like(n=3000, seed=0)
    train, test = split_dataset(ds, 0.25, 1, stratify=True)
    em = encode_dataset(train, standardize=CFG.standardize,
                        include_protected_as_feature=CFG.include_protected_as_feature)
    emt = em.encoder.transform(test)
    epsilons = (0.1, 0.5, 1.0, 5.0, 10.0)
    means = []
    for eps in epsilons:
        budget = dp.PrivacyBudget(eps, dp.default_delta(em.n))
        accs = [float(np.mean(
            models.train_logreg_dp(em, budget, clip_norm=CFG.dpsgd_clip_norm,
                                   lr=CFG.dpsgd_lr, epochs=CFG.dpsgd_epochs,
                                   batch=CFG.dpsgd_batch, seed=seed)
            .predict(emt.features) == emt.labels)) for seed in range(10)]
        means.append(float(np.mean(accs)))
    rho = stats.spearmanr(epsilons, means).statistic
    ok = rho > 0
    print(f"  10-seed mean accuracy by epsilon {[round(m, 3) for m in means]}, "
          f"spearman rho {rho:.2f}")
    _report(6, "accuracy rises with epsilon", ok, time.perf_counter() - t0, 900)


def test_criterion_7_translation_determinism_and_round_trip():
    t0 = time.perf_counter()
    lex = policy.DEFAULT_LEXICON
    ok = True
    suite = []
    for phrase, crit in lex.fairness_intents.items():
        for fword, delta in lex.fairness_descriptors.items():
            for pword, band in lex.privacy_descriptors.items():
                prompt = f"{phrase}, {fword}, {pword} privacy"
                suite.append((prompt, crit, delta, tuple(band)))
    assert len(suite) == 27
    for prompt, crit, delta, band in suite:
        for _ in range(100):
            p = policy.parse_policy_prompt(prompt)
            ok &= (p.criterion == crit and p.delta == delta
                   and tuple(p.epsilon_band) == band and p.unmatched == ())
    # parse . render reconstructs every band combination
    for _, crit, delta, band in suite:
        tup = policy.PolicyTuple(criterion=crit, delta=delta,
                                 epsilon_band=band, attributes=("sex",),
                                 metric=("accuracy", 0.7))
        text = policy.render_explanation(tup)
        back, _ = policy.construct_tuple(policy.parse_policy_prompt(text),
                                         ("sex",))
        ok &= back == tup
    _report(7, "translation determinism and round trip", ok,
            time.perf_counter() - t0, 5)


def test_criterion_8_selection_and_contract_integrity(tmp_path):
    t0 = time.perf_counter()
    ok = True
    rng = np.random.default_rng(13)
    for _ in range(100):
        n = int(rng.integers(3, 25))
        pts = [_point(i, float(rng.choice([0.3, 0.8, 1.0, 2.0, math.inf])),
                      float(np.round(rng.uniform(0.5, 1.0), 3)),
                      float(np.round(rng.uniform(0.0, 0.15), 3)))
               for i in range(n)]
        f = _frontier(pts)
        tup = _tup(delta=float(rng.choice([0.03, 0.05, 0.1])),
                   epsilon_band=tuple(rng.choice(
                       [(0.5, 1.0), (0.1, 0.5), (1.0, 3.0), (0.5, math.inf)])),
                   metric=("accuracy", float(rng.choice([0.6, 0.75, 0.9]))))
        cands = policy.filter_feasible(f, tup)
        expected = set()
        for p in pts:
            eps = p.certified_budget["epsilon"]
            lo, hi = tup.epsilon_band
            in_band = math.isinf(hi) if math.isinf(eps) else lo <= eps <= hi
            if (p.achieved["dpd"]["mean"] <= tup.delta and in_band
                    and p.achieved["accuracy"]["mean"] >= tup.metric[1]):
                expected.add(p.point_id)
        ok &= set(cands.ids) == expected
        chosen, _ = policy.select_model(cands, f, tup)
        if cands.ids:
            best = max(f.point(i).achieved["accuracy"]["mean"]
                       for i in cands.ids)
            ok &= f.point(chosen).achieved["accuracy"]["mean"] == best
        else:
            ok &= chosen is None

    # contract issues clean and any single-byte tamper fails the audit
    store = Store(tmp_path / "store")
    f = _frontier([_point(0, 0.8, 0.85, 0.02), _point(1, 0.6, 0.80, 0.01)])
    store.put_frontier(f)
    tup = _tup()
    cands = policy.filter_feasible(f, tup)
    chosen, rationale = policy.select_model(cands, f, tup)
    cid, _ = policy.issue_contract(tup, f, cands, chosen, rationale, store)
    ok &= policy.audit_contract(cid, store)["passed"]

    path = next((tmp_path / "store" / "contracts").iterdir())
    original = path.read_bytes()
    for pos in rng.choice(len(original), size=25, replace=False):
        blob = bytearray(original)
        blob[pos] ^= 0x01
        path.write_bytes(bytes(blob))
        try:
            ok &= not policy.audit_contract(cid, store)["passed"]
        except (errors.CorruptFile, errors.FairplaiError):
            pass  # unreadable tamper is detected too
    path.write_bytes(original)
    ok &= policy.audit_contract(cid, store)["passed"]
    _report(8, "selection and contract integrity", ok,
            time.perf_counter() - t0, 30)
