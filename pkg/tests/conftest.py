import numpy as np
import pytest

from holderlab.elliptic import make_lame, make_laplacian
from holderlab.poisson import PoissonKernel


@pytest.fixture(scope="session")
def lap2():
    return PoissonKernel(make_laplacian(2))


@pytest.fixture(scope="session")
def lame2():
    return PoissonKernel(make_lame(2, 1.0, 1.0)[0])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
