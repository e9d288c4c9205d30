"""Shared fixtures, the sympy bridge and the acceptance summary hook."""

from __future__ import annotations

import sympy as sp
import pytest
from hypothesis import settings

from reflekt.linalg import Matrix
from reflekt.qsp import a1_omega_datum, sklyanin_datum
from reflekt.reps import eval_rep, spin_rep
from reflekt.rmatrix import SPECTRAL
from reflekt.scalar import Scalar

settings.register_profile("ci", max_examples=40, deadline=None, derandomize=True)
settings.load_profile("ci")

SYM = {name: sp.Symbol(name) for name in ("v", "z", "y", "x", "w", "xi", "gamma", "sigma", "a", "b")}
SYM["q"] = SYM["v"] ** 2
SYM[SPECTRAL] = SYM["z"]


def to_sympy(x: Scalar):
    """Reparse the canonical text in sympy; the private spectral variable reads as z."""
    text = str(x).replace("^", "**")
    return sp.sympify(text, locals=SYM)


def mat_to_sympy(M: Matrix) -> sp.Matrix:
    return sp.Matrix(M.rows, M.cols, [to_sympy(e) for e in M.entries])


def sym_equal(a, b) -> bool:
    return sp.simplify(sp.together(a - b)) == 0


def sym_mat_equal(A: sp.Matrix, B: sp.Matrix) -> bool:
    return all(sym_equal(x, y) for x, y in zip(A, B))


@pytest.fixture(scope="session")
def sd():
    return sklyanin_datum()


@pytest.fixture(scope="session")
def ev_half(sd):
    return eval_rep(sd.datum, sd.shift, "1/2")


@pytest.fixture(scope="session")
def ev_one(sd):
    return eval_rep(sd.datum, sd.shift, 1)


@pytest.fixture(scope="session")
def fin_sd():
    return a1_omega_datum()


@pytest.fixture(scope="session")
def fin_half(fin_sd):
    return spin_rep(fin_sd.datum, "1/2")


@pytest.fixture(scope="session")
def fin_one(fin_sd):
    return spin_rep(fin_sd.datum, 1)


# -- acceptance summary ---------------------------------------------------------

_CRITERIA: dict[int, tuple[str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion number and title")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    n, title = mark.args
    if rep.when == "call" or (rep.when == "setup" and rep.failed):
        prev = _CRITERIA.get(n, (title, "PASS"))[1]
        status = "PASS" if rep.passed and prev == "PASS" else "FAIL"
        _CRITERIA[n] = (title, status)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        title, status = _CRITERIA[n]
        terminalreporter.write_line(f"criterion {n:>2}: {status}  {title}")
