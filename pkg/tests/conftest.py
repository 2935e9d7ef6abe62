import numpy as np
import pytest

from quasilattice import (
    RotationNumber,
    Sturmian,
    ThueMorse,
    build_sturmian_hamiltonian,
    build_tm_hamiltonian,
    load_tileset,
)


@pytest.fixture(scope="session")
def golden():
    return RotationNumber.golden()


@pytest.fixture(scope="session")
def golden_word(golden):
    return Sturmian(golden)


@pytest.fixture(scope="session")
def tm():
    return ThueMorse()


@pytest.fixture(scope="session")
def tm_spec():
    return build_tm_hamiltonian(0.25, 8, 8)


@pytest.fixture(scope="session")
def sturmian_spec(golden):
    return build_sturmian_hamiltonian(golden, 4.0, 64)


# checkerboard: A's east (1) meets B's west (1), A's south (2) meets B's north (2), ...
CHECKER_TILES = """\
# two-tile checkerboard
T A 0 1 2 3
T B 2 3 0 1
"""

SINGLE_TILE = "T 1 0 0 0 0\n"


@pytest.fixture
def checker():
    return load_tileset(CHECKER_TILES)


@pytest.fixture
def single():
    return load_tileset(SINGLE_TILE)


def checker_cells(width, height, first=0):
    y, x = np.mgrid[0:height, 0:width]
    return ((x + y + first) % 2).astype(np.int64)


# criterion number -> (passed, seconds, detail); filled by test_acceptance.py
ACCEPTANCE: dict[int, tuple[bool, float, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, seconds, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'} ({seconds:.2f} s) {detail}")
