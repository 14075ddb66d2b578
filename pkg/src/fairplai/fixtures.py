"""Synthetic datasets used by tests, demos and the desk-scale benchmarks.

`adult_like` emits a census-style table (14 features + binary income label,
sex protected) with a built-in group gap in base rates; `biased_matrix`
constructs a two-group instance whose unconstrained classifier has a
demographic-parity difference of exactly 0.5 by construction.
"""

import numpy as np

from .dataset import (ColumnSpec, DatasetEncoder, EncodedMatrix,
                      TabularDataset, _EncodedColumn)
from .models import Predictor
from .rngutil import derive_rng


def biased_matrix(n_per_group=200, pos_rate_a=0.75, pos_rate_b=0.25, seed=0):
    """Separable two-group instance: the error-minimizing classifier
    predicts the label perfectly, so its selection rates equal the group
    base rates and DPD = pos_rate_a - pos_rate_b (0.5 by default).

    The group indicator is included as a feature so that in-processing can
    trade accuracy for parity.
    """
    rng = derive_rng(seed, "biased")
    n = 2 * n_per_group
    groups = np.repeat([0, 1], n_per_group)
    y = np.concatenate([
        (np.arange(n_per_group) < round(pos_rate_a * n_per_group)).astype(int),
        (np.arange(n_per_group) < round(pos_rate_b * n_per_group)).astype(int),
    ])
    x = (2.0 * y - 1.0) + rng.normal(0.0, 0.4, size=n)
    features = np.column_stack([x, groups.astype(float)])
    cols = [_EncodedColumn("signal", "numeric", 1, bounds=(-4.0, 4.0)),
            _EncodedColumn("group", "binary", 1, bounds=(0.0, 1.0))]
    encoder = DatasetEncoder(columns=cols, protected=("group",), label="outcome",
                             standardize=False, include_protected=True,
                             group_categories={"group": (0, 1)})
    return EncodedMatrix(features=features, labels=y,
                         groups={"group": groups}, encoder=encoder)


ADULT_SCHEMA = (
    ColumnSpec("age", "numeric", bounds=(17, 90)),
    ColumnSpec("workclass", "categorical",
               categories=("Private", "Self-emp", "Gov", "Other")),
    ColumnSpec("fnlwgt", "numeric", bounds=(1e4, 1.5e6)),
    ColumnSpec("education", "categorical",
               categories=("HS", "Some-college", "Bachelors", "Masters", "Doctorate")),
    ColumnSpec("education_num", "numeric", bounds=(1, 16)),
    ColumnSpec("marital_status", "categorical",
               categories=("Married", "Never-married", "Divorced")),
    ColumnSpec("occupation", "categorical",
               categories=("Tech", "Service", "Sales", "Exec", "Other")),
    ColumnSpec("relationship", "categorical",
               categories=("Husband", "Wife", "Not-in-family")),
    ColumnSpec("race", "categorical", categories=("White", "Black", "Other")),
    ColumnSpec("sex", "categorical", categories=("Male", "Female")),
    ColumnSpec("capital_gain", "numeric", bounds=(0, 99999)),
    ColumnSpec("capital_loss", "numeric", bounds=(0, 4356)),
    ColumnSpec("hours_per_week", "numeric", bounds=(1, 99)),
    ColumnSpec("native_country", "categorical", categories=("US", "MX", "Other")),
    ColumnSpec("income", "binary"),
)


def adult_like(n=3000, seed=0) -> TabularDataset:
    """Census-income-format dataset with a sex gap in positive rates."""
    rng = derive_rng(seed, "adult")
    age = np.clip(rng.normal(40, 12, n), 17, 90)
    edu_num = np.clip(np.round(rng.normal(10, 2.5, n)), 1, 16)
    hours = np.clip(np.round(rng.normal(40, 10, n)), 1, 99)
    sex = np.where(rng.random(n) < 0.65, "Male", "Female")
    cap_gain = np.where(rng.random(n) < 0.08,
                        rng.uniform(1000, 40000, n), 0.0)
    cap_loss = np.where(rng.random(n) < 0.04, rng.uniform(100, 4000, n), 0.0)

    logit = (1.1 * (edu_num - 10) + 0.1 * (hours - 40) + 0.06 * (age - 40)
             + 4.4e-4 * cap_gain - 2.8)
    logit = logit + np.where(sex == "Male", 1.8, 0.0)
    prob = 1.0 / (1.0 + np.exp(-logit))
    income = (rng.random(n) < prob).astype(int)

    def cat(name, probs):
        spec = next(c for c in ADULT_SCHEMA if c.name == name)
        return rng.choice(spec.categories, size=n, p=probs)

    rows = list(zip(
        age, cat("workclass", [0.7, 0.1, 0.15, 0.05]),
        rng.uniform(2e4, 8e5, n), cat("education", [0.35, 0.25, 0.25, 0.1, 0.05]),
        edu_num, cat("marital_status", [0.5, 0.35, 0.15]),
        cat("occupation", [0.25, 0.2, 0.2, 0.2, 0.15]),
        cat("relationship", [0.4, 0.2, 0.4]),
        cat("race", [0.8, 0.12, 0.08]), sex,
        cap_gain, cap_loss, hours, cat("native_country", [0.9, 0.05, 0.05]),
        income,
    ))
    rows = tuple(tuple(v.item() if hasattr(v, "item") else v for v in r) for r in rows)
    return TabularDataset(ADULT_SCHEMA, rows, label="income", protected=("sex",))


class ThresholdRule(Predictor):
    """predict 1{x_j > t} (or its complement); the brute-forceable base
    family used in tiny reduction-soundness checks."""

    kind = "threshold"

    def __init__(self, feature, threshold, flip=False):
        self.feature = feature
        self.threshold = threshold
        self.flip = flip
        self.width = None  # any width accepted

    def predict_score(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        pred = (X[:, self.feature] > self.threshold).astype(float)
        return 1.0 - pred if self.flip else pred


def threshold_family(X, feature=0):
    """All distinct threshold rules on one feature, both orientations."""
    values = np.unique(np.atleast_2d(X)[:, feature])
    cuts = [values[0] - 1.0] + ((values[:-1] + values[1:]) / 2.0).tolist() \
        + [values[-1] + 1.0]
    out = []
    for t in cuts:
        out.append(ThresholdRule(feature, t, flip=False))
        out.append(ThresholdRule(feature, t, flip=True))
    return out


def threshold_oracle_factory(feature=0):
    """Learner factory that exactly minimizes the weighted error over the
    threshold family; used where the reduction needs an exact oracle."""

    def factory(data, sample_weight, seed):
        X, y = data.features, data.labels
        best = None
        for rule in threshold_family(X, feature):
            cost = float(np.sum(sample_weight * (rule.predict(X) != y)))
            if best is None or cost < best[0] - 1e-15:
                best = (cost, rule)
        return best[1]

    return factory
