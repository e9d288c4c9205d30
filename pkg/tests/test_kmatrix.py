import pytest
import sympy as sp

from reflekt.errors import DatumMismatch
from reflekt.kmatrix import (dual_K, quasi_K_finite, quasi_K_residuals, solve_spectral_K, tensor_K,
                             tensor_K_coproduct_residual, tensor_K_intertwining, verify_dual_reflection,
                             verify_reflection)
from reflekt.linalg import Matrix
from reflekt.reps import E, eval_rep, sovereign_ops, spin_rep
from reflekt.scalar import S

import oracle
from conftest import mat_to_sympy, sym_mat_equal


def test_K_spin_half(sd, ev_half):
    K = solve_spectral_K(ev_half, sd)
    assert K.mat == Matrix.diag([1, "(xi - _s^2)/(xi*_s^2 - 1)"])


def test_K_against_sympy(sd, ev_half):
    assert sym_mat_equal(mat_to_sympy(solve_spectral_K(ev_half, sd).mat), oracle.solve_K())


def test_K_routes_agree(sd, ev_one):
    a = solve_spectral_K(ev_one, sd, route="operational")
    b = solve_spectral_K(ev_one, sd, route="explicit")
    assert a.mat == b.mat


def test_dual_K(sd, ev_half):
    K = solve_spectral_K(ev_half, sd)
    Kt = dual_K(K, sovereign_ops(ev_half, sd.shift).Dbar, sd.shift.p)
    assert Kt.mat == Matrix.diag([1, "(_s^2*xi - q^2)/(q^2*xi - _s^2)"])
    assert Kt.at("z") * K.at(S("z/q")) == Matrix.identity(2)


def test_reflection_equation(sd, ev_half):
    K = solve_spectral_K(ev_half, sd)
    assert verify_reflection(K, K, ev_half, ev_half).is_zero()
    assert verify_reflection(K, K, ev_half, ev_half, sd, mode="twisted").is_zero()


def test_reflection_equation_mixed_spins(sd, ev_half, ev_one):
    KV, KW = solve_spectral_K(ev_half, sd), solve_spectral_K(ev_one, sd)
    assert verify_reflection(KV, KW, ev_half, ev_one, y="2/3", z="5/7").is_zero()


def test_twisted_equation_needs_the_twist(sd):
    V = eval_rep(sd.datum, sd.shift, "1/2", a=-1)
    K = solve_spectral_K(V, sd)
    assert verify_reflection(K, K, V, V, sd, mode="twisted").is_zero()
    assert not verify_reflection(K, K, V, V).is_zero()


def test_dual_reflection_and_sabotage(sd, ev_half):
    K = solve_spectral_K(ev_half, sd)
    D = sovereign_ops(ev_half, sd.shift).Dbar
    p = sd.shift.p
    Kt = dual_K(K, D, p)
    assert verify_dual_reflection(Kt, Kt, ev_half, ev_half, D, D, p).is_zero()
    bad = dual_K(K, D, 1)
    assert verify_dual_reflection(bad, bad, ev_half, ev_half, D, D, p).nonzero_count() > 0


@pytest.mark.parametrize("j", ["1/2", "1", "3/2"])
def test_quasi_K(fin_sd, j):
    V = spin_rep(fin_sd.datum, j)
    U = quasi_K_finite(V, fin_sd)
    assert all(m.is_zero() for m in quasi_K_residuals(U, V, fin_sd).values())
    assert U.diagonal() == [S(1)] * V.dim
    # upper triangular: a polynomial in E
    assert all(U[r, c].is_zero() for r in range(V.dim) for c in range(r))


def test_quasi_K_spin_half_against_sympy(fin_sd, fin_half):
    v, gamma, sigma = sp.symbols("v gamma sigma")
    q = v ** 2
    a = sp.Symbol("a")
    U = sp.Matrix([[1, a], [0, 1]])
    e, f, k = sp.Matrix([[0, 1], [0, 0]]), sp.Matrix([[0, 0], [1, 0]]), sp.diag(q, 1 / q)
    B = f - gamma / q * e * k.inv() + sigma * k.inv()
    c = -gamma / q
    psiB = c * k * e - gamma / q * (f * k.inv() / c) * k + sigma * k
    sol = sp.solve(list(U * B - psiB * U), a, dict=True)
    assert len(sol) == 1
    want = U.subs(sol[0])
    assert sym_mat_equal(mat_to_sympy(quasi_K_finite(fin_half, fin_sd)), want)
    assert quasi_K_finite(fin_half, fin_sd) == Matrix.identity(2) + fin_half.gens[E(1)].scale("sigma*(q - 1/q)")


def test_tensor_K_intertwines(sd, ev_half, ev_one):
    for M, V in ((ev_half, ev_half), (ev_one, ev_half)):
        TK = tensor_K(M, V, solve_spectral_K(V, sd), sd)
        assert all(m.is_zero() for m in tensor_K_intertwining(TK, M, V, sd).values())


def test_tensor_K_coproduct(sd, ev_half):
    assert tensor_K_coproduct_residual(ev_half, ev_half, ev_half, sd, "y", "z").is_zero()


def test_datum_mismatch(sd, fin_half):
    with pytest.raises(DatumMismatch):
        solve_spectral_K(fin_half, sd)
