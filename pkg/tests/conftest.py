"""
Shared fixtures for the test suite.
"""

import numpy as np
import pytest

from modules.bethe import MasterProblem, SolverConfig, sample_configuration


@pytest.fixture
def solver_config():
    """Solver settings with a shorter saturation window for quick runs."""
    return SolverConfig(seed=0, saturation_window=200)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def catalan_problem():
    """d=3 with four simple critical points: two classes."""
    z = sample_configuration(4, np.random.default_rng(42))
    return MasterProblem(tuple(z), (1, 1, 1, 1), 3)
