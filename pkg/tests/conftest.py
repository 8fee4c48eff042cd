import numpy as np
import pytest

from elsasser.littlewood_paley import build_partition
from elsasser.spectral import make_grid, to_spectral


@pytest.fixture(scope="session")
def grid32():
    return make_grid(32)


@pytest.fixture(scope="session")
def part32(grid32):
    return build_partition(grid32, -2, 3)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def sample(grid, fn):
    """Spectral field of fn(x1, x2, x3) evaluated on the grid."""
    x1, x2, x3 = grid.coordinates()
    return to_spectral(np.asarray(fn(x1, x2, x3), dtype=float))


def vector(grid, f1=None, f2=None, f3=None):
    x = grid.coordinates()
    zero = np.zeros(grid.shape)
    comps = [zero if f is None else f(*x) for f in (f1, f2, f3)]
    return to_spectral(np.stack(comps))


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
