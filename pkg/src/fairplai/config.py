"""Training defaults.

Hyperparameters live here in one place and are echoed verbatim into every
frontier artifact and selection contract so a reviewer can reconstruct any
run. Override per call via `TrainingConfig(...)` or `replace(cfg, ...)`.
"""

from dataclasses import dataclass, asdict, replace  # noqa: F401 (replace re-exported)


@dataclass(frozen=True)
class TrainingConfig:
    test_fraction: float = 0.25
    calibration_fraction: float = 0.2   # of the training split, post-processing only
    include_protected_as_feature: bool = False
    standardize: bool = True

    logreg_lr: float = 0.5
    logreg_epochs: int = 200
    logreg_l2: float = 1e-4

    dpsgd_clip_norm: float = 1.0
    dpsgd_lr: float = 0.5
    dpsgd_epochs: int = 25
    dpsgd_batch: int | None = None      # None = full batch

    forest_trees: int = 8
    forest_depth: int = 4

    knn_k: int = 15

    reduction_bound: float = 100.0      # multiplier L1 bound
    reduction_rounds: int = 50
    reduction_rounds_dp: int = 10       # fewer oracle calls when each is private
    reduction_nu: float = 1e-3

    def to_dict(self) -> dict:
        return asdict(self)

    @staticmethod
    def from_dict(d: dict) -> "TrainingConfig":
        return TrainingConfig(**d)


DEFAULT_CONFIG = TrainingConfig()
