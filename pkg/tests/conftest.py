from fractions import Fraction

import numpy as np
import pytest

from babaipoint.basis import LatticeBasis

_ACCEPTANCE = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        detail = dict(report.user_properties).get("detail", "")
        _ACCEPTANCE[report.nodeid] = (report.outcome, detail)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for nodeid, (outcome, detail) in sorted(_ACCEPTANCE.items()):
        name = nodeid.split("::")[-1]
        verdict = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"{verdict} {name}: {detail}")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_basis(rng, n, cond_max=50.0):
    """A random nonsingular basis with bounded condition number."""
    while True:
        V = rng.normal(size=(n, n))
        if np.linalg.cond(V) < cond_max:
            return LatticeBasis.from_matrix(V)


def random_rational_basis(rng, n):
    """Upper-triangular basis with diagonal in [1/2, 2] and rational row ratios."""
    V = [[Fraction(0)] * n for _ in range(n)]  # V[i] is basis vector i
    for i in range(n):
        d = Fraction(int(rng.integers(1, 5)), int(rng.integers(1, 5)))
        V[i][i] = min(max(d, Fraction(1, 2)), Fraction(2))
        for j in range(i):
            V[i][j] = Fraction(int(rng.integers(-7, 8)), int(rng.integers(1, 8))) * V[j][j]
    return LatticeBasis.from_vectors(V)
