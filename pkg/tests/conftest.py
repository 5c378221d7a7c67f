import numpy as np
import pytest

from lcritlab.arith import primes_up_to


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance: criterion-level end-to-end checks")


@pytest.fixture(scope="session")
def prime_table_1e6():
    return primes_up_to(10**6)


@pytest.fixture(scope="session")
def prime_table_1e5():
    return primes_up_to(10**5)


@pytest.fixture(autouse=True)
def _seed_numpy():
    # tests use either lcritlab.rng or explicitly seeded generators; the
    # global state is pinned anyway so stray calls cannot flake
    np.random.seed(12345)
