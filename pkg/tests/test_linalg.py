
import pytest
from hypothesis import given, strategies as st

from reflekt.errors import LegMismatch, ShapeMismatch, Singular
from reflekt.linalg import (Matrix, embed, flip, inverse, kron, kron_all, mat_product, nullspace, partial_trace,
                            partial_transpose, solve_intertwiner, swap_legs)
from reflekt.scalar import S

from conftest import mat_to_sympy, sym_mat_equal

ENTRY = st.sampled_from(["0", "1", "-2", "1/3", "z", "v", "xi - 1", "1/(z + 2)", "q*z", "z^2 - v"])


def mats(n, m=None):
    m = n if m is None else m
    return st.lists(ENTRY, min_size=n * m, max_size=n * m).map(
        lambda es: Matrix(n, m, [S(e) for e in es]))


@given(mats(2), mats(2), mats(3), mats(3))
def test_kron_mixed_product(A, B, C, D):
    assert kron(A, C) * kron(B, D) == kron(A * B, C * D)


@given(mats(2), mats(3))
def test_partial_trace_of_kron(A, B):
    T = kron(A, B)
    assert partial_trace(T, 2) == A.scale(B.trace())
    assert partial_trace(T, 1) == B.scale(A.trace())


@given(mats(6))
def test_partial_trace_composition_is_full_trace(M):
    M = M.with_legs((2, 3))
    assert partial_trace(partial_trace(M, 2).with_legs((2,)), 1)[0, 0] == M.trace()


@given(mats(2), mats(3))
def test_partial_transpose_of_kron(A, B):
    T = kron(A, B)
    assert partial_transpose(T, 2) == kron(A, B.T)
    assert partial_transpose(T, 1) == kron(A.T, B)


@given(mats(6))
def test_partial_transposes(M):
    M = M.with_legs((2, 3))
    assert partial_transpose(partial_transpose(M, 1), 1) == M
    assert partial_transpose(partial_transpose(M, 1), 2) == M.T


@given(mats(2), mats(3))
def test_flip_conjugates_kron(A, B):
    P = flip(2, 3)
    assert P * kron(A, B) * P.T == kron(B, A)
    assert swap_legs(kron(A, B), 2, 3) == kron(B, A)
    assert P * P.T == Matrix.identity(6)


@given(mats(2), mats(2), mats(2))
def test_embed_matches_kron(A, B, C):
    dims = (2, 2, 2)
    assert embed(A, (1,), dims) * embed(B, (2,), dims) * embed(C, (3,), dims) == kron_all(A, B, C)
    AB = kron(A, B)
    assert embed(AB, (1, 3), dims) == kron_all(A, Matrix.identity(2), B)
    assert embed(AB, (3, 1), dims) == kron_all(B, Matrix.identity(2), A)


@given(mats(3))
def test_inverse(M):
    try:
        Mi = inverse(M)
    except Singular:
        assert not nullspace(M) == []
        return
    assert M * Mi == Matrix.identity(3)
    assert Mi * M == Matrix.identity(3)


@given(mats(3, 4))
def test_nullspace(M):
    basis = nullspace(M)
    assert len(basis) >= 1
    for vec in basis:
        assert (M * vec).is_zero()


def test_symbolic_inverse_against_sympy():
    M = Matrix.from_rows([["z", "1", "0"], ["v", "xi", "1"], ["1", "0", "q*z"]])
    ref = mat_to_sympy(M).inv()
    assert sym_mat_equal(mat_to_sympy(inverse(M)), ref)


def test_intertwiner_solver():
    # commutant of a single Jordan block is polynomials in it
    J = Matrix.from_rows([["z", "1"], ["0", "z"]])
    sols = solve_intertwiner([(J, J)], 2, 2)
    assert len(sols) == 2
    for X in sols:
        assert X * J == J * X


def test_mat_product_and_power():
    A = Matrix.from_rows([["1", "z"], ["0", "1"]])
    assert mat_product(A, A, A) == A ** 3 == Matrix.from_rows([["1", "3*z"], ["0", "1"]])


def test_errors():
    A = Matrix.identity(2)
    B = Matrix.identity(3)
    with pytest.raises(ShapeMismatch):
        A * B
    with pytest.raises(ShapeMismatch):
        A + B
    with pytest.raises(LegMismatch):
        Matrix.identity(4, legdims=(3, 2))
    with pytest.raises(LegMismatch):
        partial_trace(Matrix.identity(4), 2)
    with pytest.raises(Singular):
        inverse(Matrix.from_rows([["1", "z"], ["1/z", "1"]]))
    with pytest.raises(LegMismatch):
        embed(A, (1, 2), (2, 2))
