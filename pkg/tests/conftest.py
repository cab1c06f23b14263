import numpy as np
import pytest

import manyplan as mp


@pytest.fixture(scope="session")
def planar():
    return mp.planar_2dof()


@pytest.fixture(scope="session")
def six():
    return mp.generic_6dof()


@pytest.fixture(scope="session")
def seven():
    return mp.generic_7dof()


@pytest.fixture(scope="session", autouse=True)
def _warm_kernels(planar):
    # jit-compile the collision kernels once, outside any timed assertion
    mp.CollisionChecker(planar, None, mp.empty_world()).warmup()


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)
