import time

import pytest

from bethetq import SweepConfig, run_single, run_sweep


@pytest.fixture(scope="session")
def rec4():
    return run_single(4)


@pytest.fixture(scope="session")
def rec8():
    return run_single(8)


@pytest.fixture(scope="session")
def rec12():
    return run_single(12)


@pytest.fixture(scope="session")
def rec16():
    return run_single(16)


class SweepRun:
    def __init__(self, result, seconds, out_dir):
        self.result = result
        self.seconds = seconds
        self.out_dir = out_dir
        self.by_n = result.by_n()


@pytest.fixture(scope="session")
def sweep128(tmp_path_factory):
    """The full acceptance sweep, shared by every test that needs trend data."""
    out = tmp_path_factory.mktemp("sweep128")
    started = time.perf_counter()
    result = run_sweep(SweepConfig(n_from=4, n_to=128, output_dir=out))
    elapsed = time.perf_counter() - started
    assert not result.failures, f"sweep failures: {result.failures}"
    return SweepRun(result, elapsed, out)
