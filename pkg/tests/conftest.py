import numpy as np
import pytest

from bidflow.diagnostics import feasibility_search
from bidflow.equilibrium import SolverConfig, extremal_equilibria
from bidflow.model import MarketParams


@pytest.fixture(scope="session")
def feasible_candidates():
    """Instances meeting every flag the solver relies on (see diagnostics)."""
    cands = feasibility_search(budget=4096)
    assert cands, "sweep found no solver-feasible instance"
    return cands


@pytest.fixture(scope="session")
def feasible(feasible_candidates):
    return feasible_candidates[0].params()


@pytest.fixture(scope="session")
def solved(feasible):
    return extremal_equilibria(feasible, SolverConfig())


@pytest.fixture(scope="session")
def small():
    """A cheap symmetric instance on the interior branch, 11 nodes."""
    return MarketParams.symmetric(1.0, 1.1, 0.9, 1.6, 1.0, 0.1, n_nodes=11)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
