import numpy as np
import pytest

from polynet.algebra import PrimeField

# A fixed prime in the production range, for tests that need one field.
P = 1_000_003


@pytest.fixture
def fp():
    return PrimeField(P)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
