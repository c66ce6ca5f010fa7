import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

import rotenberg as rt


@pytest.fixture(scope="session")
def params_12():
    """V = (1, 2), mass-preserving redistribution-only reproduction."""
    return rt.ModelParams(a=1.0, b=2.0, p=1.0, q=0.0)


@pytest.fixture(scope="session")
def space_12(params_12):
    return rt.VelocitySpace.midpoint(params_12, 100)


@pytest.fixture(scope="session")
def model_const_12(params_12, space_12):
    return rt.Model(params_12, space_12, rt.builtin_kernel("constant", params_12))


@pytest.fixture(scope="session")
def params_01():
    return rt.ModelParams(a=0.0, b=1.0, p=1.0, q=0.0)


@pytest.fixture(scope="session")
def space_01(params_01):
    return rt.VelocitySpace.midpoint(params_01, 200)


def make_model(a, b, p, q, kernel="constant", n_v=100):
    params = rt.ModelParams(a, b, p, q)
    space = rt.VelocitySpace.midpoint(params, n_v)
    return rt.Model(params, space, rt.builtin_kernel(kernel, params))


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
