import pytest

from prepsim.sampling import rng_from_seed


@pytest.fixture
def rng():
    return rng_from_seed(20261018)
