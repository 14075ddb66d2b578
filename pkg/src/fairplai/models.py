"""Baseline and differentially private classifiers.

Four model families: logistic regression (plain gradient descent and
DP-SGD), Gaussian naive Bayes (exact statistics and Laplace-perturbed
statistics), random forest (exact greedy splits or exponential-mechanism
splits with noisy leaf counts), and KNN (plain baseline only; there is no
DP variant for KNN).

Every DP trainer runs its budget pre-flight before touching data and
attaches the resulting ledger to the model, so the certified total never
exceeds the request.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import dp, errors
from .dataset import EncodedMatrix
from .dp import NON_PRIVATE, PrivacyAccount, PrivacyBudget
from .rngutil import derive_rng

VARIANCE_FLOOR = 1e-9
MIN_LEVEL_EPSILON = 1e-3


class Predictor:
    """Uniform prediction interface over all model families."""

    kind = "base"

    def predict_score(self, X) -> np.ndarray:
        raise NotImplementedError

    def predict(self, X) -> np.ndarray:
        return (self.predict_score(X) >= 0.5).astype(int)

    def _check_width(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.width:
            raise errors.DimensionMismatch(f"expected {self.width} features, got {X.shape[1]}")
        return X


def _check_binary_labels(y):
    present = set(np.unique(y).tolist())
    if present != {0, 1}:
        raise errors.SingleClassData(f"labels present: {sorted(present)}")


def _sigmoid(z):
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


# ---------------------------------------------------------------------------
# logistic regression


@dataclass
class LinearModel(Predictor):
    weights: np.ndarray
    bias: float
    trained_budget: PrivacyBudget = NON_PRIVATE
    account: PrivacyAccount | None = None
    kind = "logreg"

    @property
    def width(self) -> int:
        return len(self.weights)

    def logits(self, X) -> np.ndarray:
        X = self._check_width(X)
        return X @ self.weights + self.bias

    def predict_score(self, X) -> np.ndarray:
        return _sigmoid(self.logits(X))


def logistic_loss(weights, bias, X, y, l2=0.0, sample_weight=None) -> float:
    z = X @ weights + bias
    # log(1 + e^-z) written stably
    per = np.logaddexp(0.0, -z) * y + np.logaddexp(0.0, z) * (1 - y)
    if sample_weight is None:
        loss = float(np.mean(per))
    else:
        w = np.asarray(sample_weight, dtype=float)
        loss = float(np.sum(w * per) / np.sum(w))
    return loss + 0.5 * l2 * float(np.dot(weights, weights))


def _logreg_gradient(weights, bias, X, y, l2, sample_weight=None):
    z = X @ weights + bias
    resid = _sigmoid(z) - y
    if sample_weight is None:
        gw = X.T @ resid / len(y)
        gb = float(np.mean(resid))
    else:
        w = np.asarray(sample_weight, dtype=float)
        total = np.sum(w)
        gw = X.T @ (w * resid) / total
        gb = float(np.sum(w * resid) / total)
    return gw + l2 * weights, gb


def train_logreg(data: EncodedMatrix, lr=0.5, epochs=200, l2=1e-4, seed=0,
                 sample_weight=None) -> LinearModel:
    """Full-batch gradient descent on (optionally weighted) logistic loss."""
    X, y = data.features, data.labels
    if sample_weight is None:
        _check_binary_labels(y)
    if len(y) < 2:
        raise errors.SingleClassData("need at least 2 rows")
    if sample_weight is not None and np.all(np.asarray(sample_weight) == 0):
        raise errors.AllZeroWeights("all sample weights are zero")
    w = np.zeros(X.shape[1])
    b = 0.0
    for _ in range(epochs):
        gw, gb = _logreg_gradient(w, b, X, y, l2, sample_weight)
        w -= lr * gw
        b -= lr * gb
        if not (np.all(np.isfinite(w)) and math.isfinite(b)):
            raise errors.NonFiniteLoss("diverged; reduce the learning rate")
    return LinearModel(weights=w, bias=b)


def train_logreg_dp(data: EncodedMatrix, budget: PrivacyBudget, clip_norm=1.0,
                    lr=0.5, epochs=20, batch=None, seed=0,
                    sample_weight=None) -> LinearModel:
    """DP-SGD: per-example gradients clipped, Gaussian noise on the mean.

    The total budget is split evenly across steps (basic or advanced
    composition, whichever is tighter) with per-step epsilon <= 1 so the
    classic Gaussian calibration applies. Swapping one record changes the
    mean clipped gradient by at most 2*clip_norm/|batch|.
    """
    if clip_norm <= 0 or lr <= 0 or epochs < 1:
        raise errors.NonPositiveParameter("clip_norm, lr and epochs must be positive")
    n = data.n
    if budget.is_non_private:
        raise errors.BudgetExceeded("use train_logreg for non-private training")
    if budget.delta <= 0 or budget.delta >= 1.0 / n:
        raise errors.BudgetExceeded(
            f"delta={budget.delta} must lie in (0, 1/n) with n={n}")
    if batch is None:
        batch = n
    batch = min(batch, n)
    steps_per_epoch = math.ceil(n / batch)
    steps = epochs * steps_per_epoch
    eps_step, delta_step, rule = dp.per_step_budget(budget, steps)

    X, y = data.features, data.labels
    if sample_weight is None:
        _check_binary_labels(y)
    if sample_weight is not None:
        # per-example multipliers capped at 1 keep the clipped-gradient
        # sensitivity bound intact
        w_max = float(np.max(np.abs(sample_weight)))
        if w_max == 0:
            raise errors.AllZeroWeights("all sample weights are zero")
        example_weight = np.abs(np.asarray(sample_weight, dtype=float)) / w_max
    else:
        example_weight = None
    rng = derive_rng(seed, "dpsgd")
    account = PrivacyAccount(composition_rule=rule)
    w = np.zeros(X.shape[1])
    b = 0.0
    l2 = 0.0
    for _ in range(epochs):
        order = rng.permutation(n)
        for s in range(steps_per_epoch):
            idx = order[s * batch:(s + 1) * batch]
            Xb, yb = X[idx], y[idx]
            z = Xb @ w + b
            resid = _sigmoid(z) - yb
            grads = np.hstack([Xb * resid[:, None], resid[:, None]])
            norms = np.linalg.norm(grads, axis=1)
            scale = np.minimum(1.0, clip_norm / np.maximum(norms, 1e-12))
            if example_weight is not None:
                scale = scale * example_weight[idx]
            mean_grad = np.mean(grads * scale[:, None], axis=0)
            sensitivity = 2.0 * clip_norm / len(idx)
            sigma = dp.calibrate_gaussian_sigma(
                sensitivity, PrivacyBudget(eps_step, delta_step))
            noisy = mean_grad + rng.normal(0.0, sigma, size=mean_grad.shape)
            account.spend("dpsgd.step", eps_step, delta_step)
            w -= lr * (noisy[:-1] + l2 * w)
            b -= lr * noisy[-1]
    total = account.total()
    if total.epsilon > budget.epsilon + 1e-9 or total.delta > budget.delta + 1e-15:
        raise errors.BudgetExceeded("accountant total exceeds the request")
    return LinearModel(weights=w, bias=b, trained_budget=total, account=account)


# ---------------------------------------------------------------------------
# Gaussian naive Bayes


@dataclass
class GaussianNBModel(Predictor):
    class_priors: np.ndarray      # 2-vector
    means: np.ndarray             # 2 x p
    variances: np.ndarray         # 2 x p
    trained_budget: PrivacyBudget = NON_PRIVATE
    account: PrivacyAccount | None = None
    kind = "gnb"

    @property
    def width(self) -> int:
        return self.means.shape[1]

    def predict_score(self, X) -> np.ndarray:
        X = self._check_width(X)
        log_post = np.empty((X.shape[0], 2))
        for c in (0, 1):
            var = np.maximum(self.variances[c], VARIANCE_FLOOR)
            prior = max(self.class_priors[c], 1e-12)
            ll = -0.5 * np.sum(np.log(2 * np.pi * var)
                               + (X - self.means[c]) ** 2 / var, axis=1)
            log_post[:, c] = math.log(prior) + ll
        m = log_post.max(axis=1, keepdims=True)
        p = np.exp(log_post - m)
        return p[:, 1] / p.sum(axis=1)


def train_gnb(data: EncodedMatrix, sample_weight=None) -> GaussianNBModel:
    """Exact (optionally weighted) class priors and per-class feature
    means/variances."""
    X, y = data.features, data.labels
    if sample_weight is None:
        _check_binary_labels(y)
        sample_weight = np.ones(len(y))
    w = np.asarray(sample_weight, dtype=float)
    if np.all(w == 0):
        raise errors.AllZeroWeights("all sample weights are zero")
    priors = np.empty(2)
    means = np.empty((2, X.shape[1]))
    variances = np.empty((2, X.shape[1]))
    for c in (0, 1):
        wc = w * (y == c)
        total = wc.sum()
        priors[c] = total / w.sum()
        if total == 0:
            means[c] = 0.0
            variances[c] = VARIANCE_FLOOR
            continue
        means[c] = (wc @ X) / total
        variances[c] = (wc @ (X - means[c]) ** 2) / total
    return GaussianNBModel(class_priors=priors, means=means,
                           variances=np.maximum(variances, VARIANCE_FLOOR))


def train_gnb_dp(data: EncodedMatrix, budget: PrivacyBudget, bounds=None,
                 seed=0) -> GaussianNBModel:
    """Perturbed sufficient statistics: the budget is split evenly across
    class counts, means and variances (epsilon/3 each); mean/variance noise
    is further divided across features. Classes partition the rows, so
    noise across classes composes in parallel."""
    if budget.is_non_private:
        return train_gnb(data)
    if budget.epsilon <= 0:
        raise errors.NonPositiveParameter(f"epsilon={budget.epsilon}")
    if bounds is None:
        bounds = data.encoder.feature_bounds()
    if len(bounds) != data.p or any(b is None for b in bounds):
        raise errors.MissingBounds("every feature needs [low, high] bounds for DP GNB")

    X, y = data.features, data.labels
    _check_binary_labels(y)
    rng = derive_rng(seed, "gnb")
    eps_part = dp.even_split(budget.epsilon, 3)
    account = PrivacyAccount(composition_rule="basic")

    counts = np.array([np.sum(y == 0), np.sum(y == 1)], dtype=float)
    noisy_counts = counts + dp.sample_laplace(1.0, eps_part, rng, size=2)
    account.spend("gnb.priors", eps_part)
    noisy_counts = np.maximum(noisy_counts, 1.0)
    priors = noisy_counts / noisy_counts.sum()

    p = data.p
    eps_feat = eps_part / p
    widths = np.array([hi - lo for lo, hi in bounds])
    means = np.empty((2, p))
    variances = np.empty((2, p))
    for c in (0, 1):
        Xc = X[y == c]
        n_c = max(len(Xc), 1)
        mean_sens = widths / n_c
        var_sens = widths ** 2 / n_c
        means[c] = Xc.mean(axis=0) + np.array(
            [dp.sample_laplace(s, eps_feat, rng) for s in mean_sens])
        variances[c] = Xc.var(axis=0) + np.array(
            [dp.sample_laplace(s, eps_feat, rng) for s in var_sens])
    account.spend("gnb.means", eps_part)
    account.spend("gnb.variances", eps_part)

    total = account.total()
    if total.epsilon > budget.epsilon + 1e-9:
        raise errors.BudgetExceeded("accountant total exceeds the request")
    return GaussianNBModel(class_priors=priors, means=means,
                           variances=np.maximum(variances, VARIANCE_FLOOR),
                           trained_budget=total, account=account)


# ---------------------------------------------------------------------------
# random forest


def exponential_mechanism(utilities, epsilon: float, sensitivity: float,
                          rng: np.random.Generator) -> int:
    """Sample an index with probability proportional to
    exp(epsilon * u / (2 * sensitivity)); epsilon == 0 degenerates to a
    uniform draw."""
    utilities = np.asarray(utilities, dtype=float)
    if sensitivity <= 0:
        raise errors.NonPositiveParameter(f"sensitivity={sensitivity}")
    if epsilon < 0:
        raise errors.NonPositiveParameter(f"epsilon={epsilon}")
    if epsilon == 0:
        return int(rng.integers(len(utilities)))
    logits = epsilon * utilities / (2.0 * sensitivity)
    logits -= logits.max()
    probs = np.exp(logits)
    probs /= probs.sum()
    return int(rng.choice(len(utilities), p=probs))


def _gini(n0, n1) -> float:
    n = n0 + n1
    if n == 0:
        return 0.0
    p = n1 / n
    return 2.0 * p * (1.0 - p)


def _split_utility(y, mask) -> float:
    # Gini impurity decrease, weighted by child fractions. Values lie in
    # [0, 0.5]; under row-swap adjacency one changed row moves each count by
    # at most one, so the utility changes by O(1/n) <= 1. We use the coarse
    # sensitivity bound of 1.
    n = len(y)
    left, right = y[mask], y[~mask]
    parent = _gini(np.sum(y == 0), np.sum(y == 1))
    child = (len(left) / n) * _gini(np.sum(left == 0), np.sum(left == 1)) \
        + (len(right) / n) * _gini(np.sum(right == 0), np.sum(right == 1))
    return parent - child


@dataclass
class _TreeNode:
    feature: int = -1
    threshold: float = 0.0
    left: "._TreeNode | None" = None
    right: "._TreeNode | None" = None
    counts: tuple | None = None  # leaf: (n0, n1) after clamping

    @property
    def is_leaf(self) -> bool:
        return self.counts is not None


@dataclass
class ForestModel(Predictor):
    trees: list
    depth: int
    trained_budget: PrivacyBudget = NON_PRIVATE
    account: PrivacyAccount | None = None
    n_features: int = 0
    kind = "forest"

    @property
    def width(self) -> int:
        return self.n_features

    def predict_score(self, X) -> np.ndarray:
        X = self._check_width(X)
        scores = np.zeros(X.shape[0])
        for tree in self.trees:
            for i in range(X.shape[0]):
                node = tree
                while not node.is_leaf:
                    node = node.left if X[i, node.feature] <= node.threshold else node.right
                n0, n1 = node.counts
                total = n0 + n1
                scores[i] += (n1 / total) if total > 0 else 0.5
        return scores / len(self.trees)


def _grid_thresholds(bounds, n_cuts=8):
    out = []
    for j, b in enumerate(bounds):
        lo, hi = b
        for k in range(1, n_cuts + 1):
            out.append((j, lo + (hi - lo) * k / (n_cuts + 1)))
    return out


def _exact_thresholds(X, feat_subset):
    out = []
    for j in feat_subset:
        vals = np.unique(X[:, j])
        mids = (vals[:-1] + vals[1:]) / 2.0
        out.extend((j, float(t)) for t in mids)
    return out


def _build_tree(X, y, idx, depth_left, eps_split, eps_leaf, bounds, rng,
                feature_frac):
    yn = y[idx]
    n0, n1 = int(np.sum(yn == 0)), int(np.sum(yn == 1))
    private = eps_leaf is not None

    def make_leaf():
        if private:
            c0 = n0 + float(dp.sample_laplace(1.0, eps_leaf, rng))
            c1 = n1 + float(dp.sample_laplace(1.0, eps_leaf, rng))
            return _TreeNode(counts=(max(c0, 0.0), max(c1, 0.0)))
        return _TreeNode(counts=(float(n0), float(n1)))

    if depth_left == 0 or len(idx) < 2 or (not private and (n0 == 0 or n1 == 0)):
        return make_leaf()

    p = X.shape[1]
    n_feat = max(1, int(round(feature_frac * p)))
    feat_subset = sorted(rng.choice(p, size=n_feat, replace=False).tolist())
    if private:
        candidates = [(j, t) for j, t in _grid_thresholds(bounds) if j in set(feat_subset)]
    else:
        candidates = _exact_thresholds(X[idx], feat_subset)
    if not candidates:
        return make_leaf()

    utilities = np.array([_split_utility(yn, X[idx, j] <= t) for j, t in candidates])
    if private:
        choice = exponential_mechanism(utilities, eps_split, 1.0, rng)
    else:
        choice = int(np.argmax(utilities))
        if utilities[choice] <= 0:
            return make_leaf()
    j, t = candidates[choice]
    mask = X[idx, j] <= t
    if private and (mask.all() or not mask.any()):
        # degenerate split drawn by the mechanism: keep recursing on the
        # same data so the per-level budget accounting stays uniform
        pass
    elif mask.all() or not mask.any():
        return make_leaf()
    node = _TreeNode(feature=j, threshold=t)
    node.left = _build_tree(X, y, idx[mask], depth_left - 1, eps_split,
                            eps_leaf, bounds, rng, feature_frac)
    node.right = _build_tree(X, y, idx[~mask], depth_left - 1, eps_split,
                             eps_leaf, bounds, rng, feature_frac)
    return node


def train_forest_dp(data: EncodedMatrix, budget: PrivacyBudget, n_trees=8,
                    depth=4, seed=0, feature_frac=1.0) -> ForestModel:
    """Random forest; under a finite budget each tree gets epsilon/n_trees,
    split evenly across depth levels (exponential-mechanism split choice)
    plus one leaf-count level (Laplace noise). NON_PRIVATE yields exact
    greedy splits and exact counts."""
    if depth < 1:
        raise errors.DepthTooLarge(f"depth={depth}: minimum depth is 1")
    if n_trees < 1:
        raise errors.NonPositiveParameter(f"n_trees={n_trees}")

    private = not budget.is_non_private
    account = None
    eps_level = None
    bounds = None
    if private:
        if budget.epsilon <= 0:
            raise errors.NonPositiveParameter(f"epsilon={budget.epsilon}")
        eps_level = dp.even_split(budget.epsilon, n_trees * (depth + 1))
        if eps_level < MIN_LEVEL_EPSILON:
            raise errors.DepthTooLarge(
                f"per-level budget {eps_level:.2e} below {MIN_LEVEL_EPSILON}")
        bounds = data.encoder.feature_bounds()
        if any(b is None for b in bounds):
            raise errors.MissingBounds("DP forest needs bounds on every feature")
        account = PrivacyAccount(composition_rule="basic")

    X, y = data.features, data.labels
    _check_binary_labels(y)
    trees = []
    for t in range(n_trees):
        rng = derive_rng(seed, "forest", t)
        tree = _build_tree(X, y, np.arange(data.n), depth,
                           eps_level, eps_level if private else None,
                           bounds, rng, feature_frac)
        trees.append(tree)
        if private:
            # splits at one level act on disjoint rows (parallel composition),
            # so each level is one ledger entry; same for the leaf level
            for _ in range(depth + 1):
                account.spend("forest.level", eps_level)
    total = account.total() if private else NON_PRIVATE
    if private and total.epsilon > budget.epsilon + 1e-9:
        raise errors.BudgetExceeded("accountant total exceeds the request")
    return ForestModel(trees=trees, depth=depth, trained_budget=total,
                       account=account, n_features=X.shape[1])


# ---------------------------------------------------------------------------
# KNN


@dataclass
class KNNModel(Predictor):
    X: np.ndarray
    y: np.ndarray
    k: int
    trained_budget: PrivacyBudget = NON_PRIVATE
    kind = "knn"

    @property
    def width(self) -> int:
        return self.X.shape[1]

    def predict_score(self, X) -> np.ndarray:
        X = self._check_width(X)
        scores = np.empty(X.shape[0])
        for i in range(X.shape[0]):
            d = np.linalg.norm(self.X - X[i], axis=1)
            # stable sort: distance ties broken by row index
            nearest = np.argsort(d, kind="stable")[:self.k]
            scores[i] = float(np.mean(self.y[nearest]))
        return scores

    def predict(self, X) -> np.ndarray:
        # tied votes resolve to label 0, so the threshold is strict here
        return (self.predict_score(X) > 0.5).astype(int)


def train_knn(data: EncodedMatrix, k: int) -> KNNModel:
    if not 1 <= k <= data.n:
        raise errors.KOutOfRange(f"k={k} with n={data.n}")
    return KNNModel(X=data.features.copy(), y=data.labels.copy(), k=k)


# ---------------------------------------------------------------------------
# prediction + serialization


def predict_score(model: Predictor, x) -> np.ndarray:
    return model.predict_score(x)


def _tree_to_dict(node: _TreeNode) -> dict:
    if node.is_leaf:
        return {"counts": list(node.counts)}
    return {"feature": node.feature, "threshold": node.threshold,
            "left": _tree_to_dict(node.left), "right": _tree_to_dict(node.right)}


def _tree_from_dict(d: dict) -> _TreeNode:
    if "counts" in d:
        return _TreeNode(counts=tuple(d["counts"]))
    return _TreeNode(feature=int(d["feature"]), threshold=float(d["threshold"]),
                     left=_tree_from_dict(d["left"]),
                     right=_tree_from_dict(d["right"]))


def serialize_model(model: Predictor, seed=0, schema_digest="") -> dict:
    """Versioned JSON artifact for a trained model."""
    doc = {
        "format": "model-v1",
        "kind": model.kind,
        "seed": seed,
        "schema_digest": schema_digest,
        "budget": model.trained_budget.to_dict(),
        "ledger": model.account.to_dict() if getattr(model, "account", None) else None,
    }
    if isinstance(model, LinearModel):
        doc["params"] = {"weights": model.weights.tolist(), "bias": model.bias}
    elif isinstance(model, GaussianNBModel):
        doc["params"] = {"priors": model.class_priors.tolist(),
                         "means": model.means.tolist(),
                         "variances": model.variances.tolist()}
    elif isinstance(model, ForestModel):
        doc["params"] = {"trees": [_tree_to_dict(t) for t in model.trees],
                         "depth": model.depth, "n_features": model.n_features}
    elif isinstance(model, KNNModel):
        doc["params"] = {"X": model.X.tolist(), "y": model.y.tolist(), "k": model.k}
    else:
        raise TypeError(f"cannot serialize {type(model)!r}")
    return doc


def load_model(doc: dict) -> Predictor:
    if doc.get("format") != "model-v1":
        raise errors.VersionMismatch(str(doc.get("format")))
    budget = PrivacyBudget.from_dict(doc["budget"])
    params = doc["params"]
    kind = doc["kind"]
    if kind == "logreg":
        return LinearModel(weights=np.asarray(params["weights"], dtype=float),
                           bias=float(params["bias"]), trained_budget=budget)
    if kind == "gnb":
        return GaussianNBModel(class_priors=np.asarray(params["priors"]),
                               means=np.asarray(params["means"]),
                               variances=np.asarray(params["variances"]),
                               trained_budget=budget)
    if kind == "forest":
        return ForestModel(trees=[_tree_from_dict(t) for t in params["trees"]],
                           depth=int(params["depth"]), trained_budget=budget,
                           n_features=int(params["n_features"]))
    if kind == "knn":
        return KNNModel(X=np.asarray(params["X"], dtype=float),
                        y=np.asarray(params["y"], dtype=int), k=int(params["k"]))
    raise errors.VersionMismatch(f"unknown model kind {kind!r}")
