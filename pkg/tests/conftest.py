import functools
import logging

import mpmath
import pytest

from toricmirror.chern import Chern
from toricmirror.cohomology import OrbifoldCohomology
from toricmirror.stack import StackInitialData, select_nef_basis, validate

# weights D_i (rows) and a stability parameter η
FAMILIES = {
    "P1": ([[1], [1]], [1]),
    "P12": ([[1], [2]], [1]),
    "P13": ([[1], [3]], [1]),
    "P23": ([[2], [3]], [1]),
    "P2": ([[1], [1], [1]], [1]),
    "P1xP1": ([[1, 0], [1, 0], [0, 1], [0, 1]], [1, 1]),
    "P112": ([[1], [2], [1]], [1]),
    "P112x": ([[1, 0], [0, 1], [1, 0], [-2, 1]], [-1, 1]),
    "P122": ([[1], [2], [2]], [1]),
    "P135": ([[1], [3], [5]], [1]),
    "F3": ([[1, 0], [1, 3], [0, 1], [0, 1]], [1, 4]),
    "G": ([[2], [2]], [1]),
}

WEAK_FANO = [k for k in FAMILIES if k != "F3"]


class Family:
    def __init__(self, name):
        D, eta = FAMILIES[name]
        self.name = name
        self.inertia = validate(StackInitialData.make(D, eta))
        self.basis = select_nef_basis(self.inertia, weak_fano=name != "F3")
        self.coh = OrbifoldCohomology(self.basis)
        self._chern = None

    @property
    def chern(self) -> Chern:
        if self._chern is None:
            self._chern = Chern(self.coh, 30)
        return self._chern


@functools.lru_cache(maxsize=None)
def family(name: str) -> Family:
    with mpmath.workdps(30):
        return Family(name)


@pytest.fixture(autouse=True)
def _precision():
    logging.getLogger("toricmirror").setLevel(logging.ERROR)
    with mpmath.workdps(30):
        yield


# one line per acceptance criterion, printed after the run
ACCEPTANCE: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for k in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[k])
