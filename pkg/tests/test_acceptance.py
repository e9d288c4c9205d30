"""Acceptance criteria 1-11, one marker per criterion; the terminal summary prints one line each."""

import random
import time
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from reflekt.kmatrix import (dual_K, quasi_K_finite, quasi_K_residuals, solve_spectral_K, verify_dual_reflection,
                             verify_reflection)
from reflekt.linalg import Matrix, inverse, kron, partial_trace, partial_transpose
from reflekt.reps import eval_rep, sovereign_ops, spin_rep
from reflekt.rmatrix import spectral_R, verify_crossing, ybe_residual_finite, ybe_residual_spectral
from reflekt.scalar import ONE, S
from reflekt.transfer import (build_transfer, centrality_residuals, commutator_check, finite_transfer, hamiltonian,
                              multiplicativity_check)

from test_transfer import pauli_terms

crit = pytest.mark.criterion


def elapsed(fn):
    t0 = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - t0


@crit(1, "K-matrix reproduction")
def test_c1_kmatrix(sd, ev_half):
    K, dt = elapsed(lambda: solve_spectral_K(ev_half, sd))
    assert K.at("z") == Matrix.diag([1, "(xi - z^2)/(xi*z^2 - 1)"])
    assert dt < 1.0


@crit(2, "reflection equation, symbolic (v, xi, y, z)")
def test_c2_reflection(sd, ev_half):
    def go():
        K = solve_spectral_K(ev_half, sd)
        return verify_reflection(K, K, ev_half, ev_half, y="y", z="z")
    res, dt = elapsed(go)
    assert res.shape == (4, 4)
    assert res.is_zero()
    assert dt < 30


@crit(3, "crossing symmetry: residual 0 and scale 1")
def test_c3_crossing(sd, ev_half):
    def go():
        D = sovereign_ops(ev_half, sd.shift).Dbar
        assert D == Matrix.identity(2)
        return verify_crossing(spectral_R(ev_half, ev_half), D, S("1/q"))
    (res, scale), dt = elapsed(go)
    print(f"crossing scale: {scale}")
    assert dt < 30
    assert res.is_zero()
    assert scale == ONE, f"scale is {scale}"


@crit(4, "dual reflection equation and p -> 1 sabotage")
def test_c4_dual_reflection(sd, ev_half):
    K = solve_spectral_K(ev_half, sd)
    D = sovereign_ops(ev_half, sd.shift).Dbar
    p = S("1/q")
    Kt = dual_K(K, D, p)
    assert Kt.at("z") == inverse(K.at(S("z/q")))
    assert verify_dual_reflection(Kt, Kt, ev_half, ev_half, D, D, p).is_zero()
    bad = dual_K(K, D, 1)
    assert verify_dual_reflection(bad, bad, ev_half, ev_half, D, D, p).nonzero_count() > 0


@crit(5, "transfer commutativity N = 1, 2 symbolic, N = 3 seeded draws")
def test_c5_commutativity(sd, ev_half):
    for n in (1, 2):
        def go(n=n):
            t = build_transfer([ev_half] * n, ev_half, sd)
            return commutator_check(t.at("y"), t.at("z"))
        res, dt = elapsed(go)
        assert res.is_zero()
        assert dt < 300
    rng = random.Random(5)
    t0 = time.perf_counter()
    for _ in range(5):
        b = {k: Fraction(rng.randint(-97, 97) or 1, rng.randint(2, 97)) for k in ("v", "xi", "y", "z")}
        t = build_transfer([ev_half] * 3, ev_half, sd, bindings={"v": b["v"], "xi": b["xi"]})
        assert commutator_check(t.at(b["y"]), t.at(b["z"])).is_zero()
    assert time.perf_counter() - t0 < 120


@crit(6, "multiplicativity, auxiliary spin1/2 (x) spin1/2, N = 1")
def test_c6_multiplicativity(sd, ev_half):
    res, scale = multiplicativity_check(ev_half, ev_half, [ev_half], sd)
    print(f"multiplicativity scale: {scale}")
    assert res.is_zero()


@crit(7, "finite-type triviality")
def test_c7_trivial(fin_sd, fin_half, fin_one):
    t = finite_transfer(fin_half, fin_sd, "dualK", fin_half)
    assert t == Matrix.identity(2).scale(S("q + 1/q"))
    assert finite_transfer(fin_half, fin_sd, "dualK", fin_one).is_scalar()
    assert finite_transfer(fin_one, fin_sd, "dualK", fin_half).is_scalar()
    assert finite_transfer(fin_one, fin_sd, "dualK", fin_one).is_scalar()


@crit(8, "quasi K-matrix, spin <= 3/2")
@pytest.mark.parametrize("j", ["1/2", "1", "3/2"])
def test_c8_quasi_k(fin_sd, j):
    V = spin_rep(fin_sd.datum, j)
    U = quasi_K_finite(V, fin_sd)
    assert all(m.is_zero() for m in quasi_K_residuals(U, V, fin_sd).values())
    assert U.diagonal() == [ONE] * V.dim


@crit(9, "Kolb-map centrality on spin1/2 and spin1 probes")
def test_c9_kolb(fin_sd, fin_half, fin_one):
    for probe in (fin_half, fin_one):
        t = finite_transfer(fin_half, fin_sd, "kolb", probe)
        assert all(m.is_zero() for m in centrality_residuals(t, probe, fin_sd).values())


@crit(10, "XXZ Hamiltonian with diagonal boundary fields")
def test_c10_hamiltonian(sd, ev_half):
    Vs = [ev_half] * 2
    H = hamiltonian(Vs, sd)
    assert not H.is_scalar()
    terms = pauli_terms(H, 2)
    assert set(terms) == {"+-", "-+", "ZZ", "ZI", "IZ"}
    assert terms["+-"] == terms["-+"]
    t = build_transfer(Vs, ev_half, sd)
    assert commutator_check(H, t.at("z")).is_zero()


# -- criterion 11: kernel property suites with seeded draws --------------------

ENTRY = st.sampled_from(["0", "1", "-3/2", "z", "v", "xi + 1", "1/(z - 2)", "q*z - xi", "v^3/(xi + 3)"])


def sq(n):
    return st.lists(ENTRY, min_size=n * n, max_size=n * n).map(lambda es: Matrix(n, n, [S(e) for e in es]))


@crit(11, "kernel properties: field axioms, linear algebra identities, Yang-Baxter")
@given(ENTRY.map(S), ENTRY.map(S), ENTRY.map(S))
def test_c11_field_axioms(a, b, c):
    assert (a + b) * c == a * c + b * c
    assert a * (b * c) == (a * b) * c
    if not a.is_zero():
        assert a * a.inverse() == ONE


@crit(11, "kernel properties: field axioms, linear algebra identities, Yang-Baxter")
@given(sq(2), sq(2), sq(2), sq(2))
def test_c11_linalg(A, B, C, D):
    assert kron(A, B) * kron(C, D) == kron(A * C, B * D)
    T = kron(A, B)
    assert partial_trace(T, 2) == A.scale(B.trace())
    assert partial_transpose(T, 1) == kron(A.T, B)


@crit(11, "kernel properties: field axioms, linear algebra identities, Yang-Baxter")
@settings(max_examples=10)
@given(st.lists(st.sampled_from(["1/2", "1"]), min_size=3, max_size=3),
       st.fractions(Fraction(-5), Fraction(5), max_denominator=7).filter(lambda x: x not in (0, 1, -1)),
       st.fractions(Fraction(-5), Fraction(5), max_denominator=7).filter(lambda x: x not in (0, 1, -1)))
def test_c11_yang_baxter(sd, fin_sd, spins, y, z):
    U, V, W = (spin_rep(fin_sd.datum, j) for j in spins)
    assert ybe_residual_finite(U, V, W).is_zero()
    U, V, W = (eval_rep(sd.datum, sd.shift, j) for j in spins)
    assert ybe_residual_spectral(U, V, W, y, z).is_zero()
