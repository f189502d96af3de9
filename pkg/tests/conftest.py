import numpy as np
import pytest

from cavitate.constitutive import example42
from cavitate.geometry import (constant_curvature, curvature_of_revolution, log_bump_surface,
                               zero_curvature)
from cavitate.jacobi import solve_jacobi


@pytest.fixture(scope="session")
def flat3():
    return solve_jacobi(zero_curvature(), 3, 5.0)


@pytest.fixture(scope="session")
def flat2():
    return solve_jacobi(zero_curvature(), 2, 5.0)


@pytest.fixture(scope="session")
def law3():
    return example42(3)


@pytest.fixture(scope="session")
def law2():
    return example42(2, mu=1.0, nu=0.1, alpha=1.5, beta=0.5, k=2.0)


@pytest.fixture(scope="session")
def bump_curv():
    return curvature_of_revolution(log_bump_surface(0.5))


@pytest.fixture(scope="session")
def bump2(bump_curv):
    return solve_jacobi(bump_curv, 2, min(bump_curv.t_max, 10.0))


@pytest.fixture(scope="session")
def sphere2():
    return solve_jacobi(constant_curvature(1.0), 2, 3.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20261015)


@pytest.fixture(scope="session")
def cav3(flat3, law3):
    from cavitate.compressible import solve_cavitating
    return solve_cavitating(flat3, law3, 3.0)


@pytest.fixture(scope="session")
def reg3(flat3, law3):
    from cavitate.compressible import solve_regular
    return solve_regular(flat3, law3, 1.7)
