from fractions import Fraction

import pytest

from reflekt.cartan import build_datum, parse_tau
from reflekt.errors import InvalidDatum
from reflekt.scalar import S


def test_finite_a1():
    dat, shift = build_datum("A1")
    assert shift is None
    assert dat.gcm == ((2,),)
    assert not dat.affine
    assert dat.rho == (1,)
    assert dat.pairing((1,), (1,)) == Fraction(1, 2)
    assert dat.root(1) == (2,)


def test_affine_a1_roots():
    dat, _ = build_datum("A1affine", "(0 1)")
    assert dat.gcm == ((2, -2), (-2, 2))
    assert dat.root(1) == (2,)
    assert dat.root(0) == (-2,)
    assert dat.t(0) == 1 and dat.t(1) == 0
    assert dat.tau_weight((1,)) == (Fraction(-1),)


def test_tau_minimal_shift():
    _, shift = build_datum("a1-affine", "(0 1)")
    assert shift.s == {0: 1, 1: 1}
    assert shift.s_hom == {0: 1, 1: 0}
    assert shift.f == 2
    assert shift.hvee == 2
    assert shift.hvee_phi == 1
    assert shift.p == S("1/q")
    # s - f s_hom vanishes on delta and is linear on the finite lattice
    assert shift.shift_value((2,)) == 2 * shift.shift_value((1,))


def test_identity_tau_shift():
    _, shift = build_datum("A1affine")
    assert shift.s == {0: 1, 1: 0}
    assert shift.f == 1
    assert shift.hvee_phi == 2


def test_parse_tau():
    assert parse_tau("(0 1)", (0, 1)) == (1, 0)
    assert parse_tau("id", (0, 1)) == (0, 1)
    with pytest.raises(InvalidDatum):
        parse_tau("(0 2)", (0, 1))
    with pytest.raises(InvalidDatum):
        parse_tau("(0 x)", (0, 1))


def test_invalid_data():
    with pytest.raises(InvalidDatum):
        build_datum("B7")
    with pytest.raises(InvalidDatum):
        build_datum("A1affine", (0, 0))
