"""Shared fixtures: small hand-checkable plants and the bundled scenarios.

Synthesized controllers are session-scoped because each synthesis runs an SDP
(and the first simulation pays the JIT compile cost once per session).
"""

import numpy as np
import pytest

from homctl.homogenize import solve_homogenization
from homctl.plant import make_plant
from homctl.scenarios import scenario_plant, synthesize_scenario
from homctl.synthesis import synthesize_common


@pytest.fixture(scope="session")
def chain2_plant():
    """Single-mode double integrator chain: A = [[0,1],[0,0]], B = e2."""
    return make_plant([([[0.0, 1.0], [0.0, 0.0]], [[0.0], [1.0]])])


@pytest.fixture(scope="session")
def chain2_ctrl(chain2_plant):
    """Finite-time (mu = -0.5) controller for the 2-chain at rho = 1."""
    homog = solve_homogenization(chain2_plant, -0.5)
    return synthesize_common(homog, rho=1.0)


@pytest.fixture(scope="session")
def ft_plant():
    return scenario_plant("ft")


@pytest.fixture(scope="session")
def ft_ctrl():
    return synthesize_scenario("ft")


@pytest.fixture(scope="session")
def nfxt_plant():
    return scenario_plant("nfxt")


@pytest.fixture(scope="session")
def nfxt_ctrl():
    return synthesize_scenario("nfxt")


@pytest.fixture
def rng():
    return np.random.default_rng(0)
