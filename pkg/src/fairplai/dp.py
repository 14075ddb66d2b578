"""Differential-privacy primitives: noise mechanisms, gradient clipping,
budget calibration and composition accounting.

The accountant supports basic composition (sum of epsilons and deltas) and
the advanced composition bound for k identical entries:

    eps_total = sqrt(2 k ln(1/delta')) * eps + k * eps * (e^eps - 1)
    delta_total = k * delta + delta'        with delta' fixed at 1e-6

This is looser than a Renyi accountant but easy to verify; certified
budgets are therefore conservative.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import errors

ADVANCED_DELTA_SLACK = 1e-6


@dataclass(frozen=True)
class PrivacyBudget:
    epsilon: float
    delta: float = 0.0

    def __post_init__(self):
        if math.isinf(self.epsilon):
            return  # NON_PRIVATE sentinel
        # epsilon == 0 is the zero-spend total of an empty ledger; requests
        # for actual training must be strictly positive.
        if self.epsilon < 0:
            raise errors.NonPositiveParameter(f"epsilon={self.epsilon}")
        if not 0.0 <= self.delta < 1.0:
            raise errors.DeltaOutOfRange(f"delta={self.delta}")

    @property
    def is_non_private(self) -> bool:
        return math.isinf(self.epsilon)

    def to_dict(self) -> dict:
        return {"epsilon": self.epsilon, "delta": self.delta}

    @staticmethod
    def from_dict(d: dict) -> "PrivacyBudget":
        return PrivacyBudget(float(d["epsilon"]), float(d["delta"]))


NON_PRIVATE = PrivacyBudget(epsilon=math.inf, delta=0.0)


def default_delta(n: int) -> float:
    """1e-5 for large datasets, else 1/(10n) so that delta < 1/n."""
    return 1e-5 if n >= 100_000 else 1.0 / (10 * n)


def sample_laplace(sensitivity: float, epsilon: float, rng: np.random.Generator,
                   size=None):
    """Laplace(0, sensitivity/epsilon) sample(s)."""
    if sensitivity <= 0 or epsilon <= 0:
        raise errors.NonPositiveParameter(f"sensitivity={sensitivity}, epsilon={epsilon}")
    return rng.laplace(0.0, sensitivity / epsilon, size=size)


def calibrate_gaussian_sigma(sensitivity: float, budget: PrivacyBudget) -> float:
    """Classic Gaussian-mechanism calibration, valid for 0 < epsilon <= 1."""
    if sensitivity <= 0:
        raise errors.NonPositiveParameter(f"sensitivity={sensitivity}")
    if not 0.0 < budget.delta < 1.0:
        raise errors.DeltaOutOfRange(f"delta={budget.delta}")
    if not 0.0 < budget.epsilon <= 1.0:
        raise errors.EpsilonOutOfRange(
            f"epsilon={budget.epsilon}: the classic bound needs 0 < epsilon <= 1; "
            "split the budget across steps instead")
    return sensitivity * math.sqrt(2.0 * math.log(1.25 / budget.delta)) / budget.epsilon


def clip_l2(v, clip_norm: float):
    """Scale v so its L2 norm is at most clip_norm; direction preserved."""
    if clip_norm <= 0:
        raise errors.NonPositiveParameter(f"clip_norm={clip_norm}")
    v = np.asarray(v, dtype=float)
    norm = float(np.linalg.norm(v))
    if norm <= clip_norm:
        return v.copy()
    return v * (clip_norm / norm)


def advanced_epsilon(k: int, epsilon: float, delta_slack: float = ADVANCED_DELTA_SLACK) -> float:
    return (math.sqrt(2.0 * k * math.log(1.0 / delta_slack)) * epsilon
            + k * epsilon * (math.expm1(epsilon)))


@dataclass
class PrivacyAccount:
    """Append-only ledger of mechanism invocations plus a composition rule."""

    composition_rule: str = "basic"  # basic | advanced
    ledger: list = field(default_factory=list)  # (mechanism_id, eps, delta)

    def spend(self, mechanism_id: str, epsilon: float, delta: float = 0.0):
        if epsilon <= 0:
            raise errors.NonPositiveParameter(f"epsilon={epsilon}")
        if not 0.0 <= delta < 1.0:
            raise errors.DeltaOutOfRange(f"delta={delta}")
        self.ledger.append((str(mechanism_id), float(epsilon), float(delta)))

    def total(self) -> PrivacyBudget:
        return compose_budget(self)

    def to_dict(self) -> dict:
        total = self.total()
        return {
            "rule": self.composition_rule,
            "ledger": [{"mechanism": m, "epsilon": e, "delta": d}
                       for m, e, d in self.ledger],
            "total": {"epsilon": total.epsilon, "delta": total.delta},
        }


def compose_budget(account: PrivacyAccount) -> PrivacyBudget:
    """Total (epsilon, delta) of the ledger under the declared rule."""
    entries = account.ledger
    if not entries:
        return PrivacyBudget(0.0, 0.0)
    if account.composition_rule == "basic":
        eps = sum(e for _, e, _ in entries)
        delta = sum(d for _, _, d in entries)
        return PrivacyBudget(eps, min(delta, 1.0 - 1e-15))
    if account.composition_rule != "advanced":
        raise ValueError(f"unknown composition rule {account.composition_rule!r}")
    eps0, delta0 = entries[0][1], entries[0][2]
    for _, e, d in entries:
        if e != eps0 or d != delta0:
            raise errors.MixedEntriesUnderAdvanced(
                "advanced composition requires identical entries")
    k = len(entries)
    eps = advanced_epsilon(k, eps0)
    delta = k * delta0 + ADVANCED_DELTA_SLACK
    return PrivacyBudget(eps, min(delta, 1.0 - 1e-15))


def even_split(epsilon: float, parts: int) -> float:
    """epsilon/parts, nudged down so a ledger of `parts` identical entries
    basic-composes to at most `epsilon` despite float summation."""
    if epsilon <= 0 or parts < 1:
        raise errors.NonPositiveParameter(f"epsilon={epsilon}, parts={parts}")
    part = epsilon / parts
    for _ in range(64):
        if sum([part] * parts) <= epsilon:
            return part
        part *= 1.0 - 1e-12
    return part


def per_step_budget(total: PrivacyBudget, steps: int) -> tuple:
    """Split a budget evenly across `steps` mechanism invocations.

    Evaluates both composition rules and returns (epsilon_step, delta_step,
    rule) for whichever allows the larger per-step epsilon (less noise),
    subject to epsilon_step <= 1 so the classic Gaussian bound applies and
    to the composed total never exceeding the request.
    """
    if total.is_non_private:
        raise errors.BudgetExceeded("cannot split a NON_PRIVATE budget")
    if steps < 1:
        raise errors.NonPositiveParameter(f"steps={steps}")
    candidates = []

    eps_basic = total.epsilon / steps
    if eps_basic <= 1.0:
        candidates.append((eps_basic, total.delta / steps, "basic"))

    if total.delta > ADVANCED_DELTA_SLACK:
        delta_step = (total.delta - ADVANCED_DELTA_SLACK) / steps
        lo, hi = 0.0, min(1.0, total.epsilon)
        for _ in range(200):
            mid = (lo + hi) / 2
            if advanced_epsilon(steps, mid) <= total.epsilon:
                lo = mid
            else:
                hi = mid
        if lo > 0 and advanced_epsilon(steps, lo) <= total.epsilon:
            candidates.append((lo, delta_step, "advanced"))

    if not candidates:
        raise errors.BudgetExceeded(
            f"cannot fit {steps} steps with epsilon_step <= 1 inside "
            f"(epsilon={total.epsilon}, delta={total.delta})")
    eps_step, delta_step, rule = max(candidates, key=lambda c: c[0])
    # nudge down so the float-summed ledger total never exceeds the request
    for _ in range(64):
        account = PrivacyAccount(composition_rule=rule)
        for _ in range(steps):
            account.spend("probe", eps_step, delta_step)
        composed = account.total()
        if composed.epsilon <= total.epsilon and composed.delta <= total.delta:
            break
        eps_step *= 1.0 - 1e-12
        delta_step *= 1.0 - 1e-12
    return eps_step, delta_step, rule
