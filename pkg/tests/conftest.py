import math

import pytest

from fairplai.fair import FairnessConstraint
from fairplai.fixtures import adult_like
from fairplai.frontier import GridSpec, build_frontier
from fairplai.store import Store


@pytest.fixture(scope="session")
def adult_ds():
    return adult_like(n=1500, seed=0)


@pytest.fixture(scope="session")
def small_frontier(adult_ds):
    """A 4-point frontier reused by frontier/policy/service/cli tests."""
    grid = GridSpec(
        epsilons=(1.0, math.inf),
        constraints=(None, FairnessConstraint("DemographicParity", 0.05)),
        model_kinds=("logreg",), seeds=(0, 1),
        intervention="postprocess+dp")
    return build_frontier(adult_ds, grid, master_seed=7)


@pytest.fixture()
def store(tmp_path):
    return Store(tmp_path / "store")
