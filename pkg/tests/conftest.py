import os
import sys
from fractions import Fraction as F
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from ddmlab.engine import Horizon
from ddmlab.markov import make_model

HALF = [[F(1, 2), F(1, 2)], [F(1, 2), F(1, 2)]]


@pytest.fixture(scope="session")
def property_seed():
    """Seed for the randomized property loops; override via DDM_LAB_TEST_SEED."""
    return int(os.environ.get("DDM_LAB_TEST_SEED", "20260810"))


@pytest.fixture(scope="session")
def reference_model():
    """pi=(3/4,1/4) started chain against the uniform stationary one."""
    return make_model(HALF, [F(3, 4), F(1, 4)], [F(1, 2), F(1, 2)])


@pytest.fixture(scope="session")
def stationary_model():
    """Trivial density: both laws uniform."""
    return make_model(HALF, [F(1, 2), F(1, 2)])


@pytest.fixture(scope="session")
def identity_model():
    """Identity transitions: the base law is shift-invariant but differs
    from the invariant law (both are stationary for the identity matrix)."""
    return make_model(
        [[F(1), F(0)], [F(0), F(1)]], [F(3, 4), F(1, 4)], [F(1, 2), F(1, 2)]
    )


@pytest.fixture(scope="session")
def h22():
    return Horizon(2, 2)
