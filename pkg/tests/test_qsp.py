import pytest

from reflekt.cartan import build_datum
from reflekt.errors import DatumMismatch, InvalidDatum, UnsupportedTwist
from reflekt.linalg import Matrix
from reflekt.qsp import (SatakeDatum, cartan_in_coideal, coideal_action, coideal_residuals, psi_rep,
                         twist_identification)
from reflekt.reps import E, F, K, Kinv, check_relations, eval_rep, spin_rep
from reflekt.scalar import S, ZERO


def test_sklyanin_generators(sd):
    gens = sd.generators()
    assert set(gens) == {"B0", "B1", "C0", "C1"}
    assert gens["B0"].terms == {(F(0),): S(1), (E(1), Kinv(0)): -S("q/xi")}
    assert gens["B1"].terms == {(F(1),): S(1), (E(0), Kinv(1)): -S("q*xi")}
    assert cartan_in_coideal(sd)


def test_finite_generator_on_spin_half(fin_sd, fin_half):
    B = coideal_action(fin_sd, fin_half)["B1"]
    assert B == Matrix.from_rows([["sigma/q", "-gamma"], [1, "sigma*q"]])


@pytest.mark.parametrize("j1,j2", [("1/2", "1/2"), ("1", "1/2"), ("1/2", "3/2")])
def test_coideal_property_affine(sd, j1, j2):
    V, W = eval_rep(sd.datum, sd.shift, j1), eval_rep(sd.datum, sd.shift, j2)
    assert all(m.is_zero() for m in coideal_residuals(sd, V, W).values())


def test_coideal_property_finite(fin_sd, fin_half, fin_one):
    assert all(m.is_zero() for m in coideal_residuals(fin_sd, fin_one, fin_half).values())


@pytest.mark.parametrize("j", ["1/2", "1", "3/2"])
def test_twist_is_trivial_on_eval_modules(sd, j):
    V = eval_rep(sd.datum, sd.shift, j)
    tw = twist_identification(sd, V)
    assert tw.G == Matrix.identity(V.dim)


def test_twist_at_minus_one(sd):
    V = eval_rep(sd.datum, sd.shift, "1/2", a=-1)
    assert twist_identification(sd, V).G == Matrix.diag([1, -1])


def test_twist_without_identification(sd):
    V = eval_rep(sd.datum, sd.shift, "1/2", a=2)
    with pytest.raises(UnsupportedTwist):
        twist_identification(sd, V)


def test_psi_is_an_automorphism(sd, fin_sd):
    # twisted modules satisfy the defining relations
    check_relations(psi_rep(sd, eval_rep(sd.datum, sd.shift, 1)), serre=True)
    check_relations(psi_rep(fin_sd, spin_rep(fin_sd.datum, 1)), serre=True)


def test_standard_twist_formulas(fin_sd):
    psi = fin_sd.psi()
    c = -S("gamma") / S("q")
    assert psi[E(1)].terms == {(F(1), Kinv(1)): c.inverse()}
    assert psi[F(1)].terms == {(K(1), E(1)): c}
    assert psi[K(1)].terms == {(Kinv(1),): S(1)}


def test_standard_twist_identification(fin_sd, fin_half):
    tw = twist_identification(fin_sd, fin_half)
    for name in ("E1", "F1", "K1"):
        lhs = tw.G * fin_half.gens[name] * tw.Ginv
        assert lhs == fin_half.act(fin_sd.psi()[name])


def test_invalid_data():
    dat, shift = build_datum("A1affine", "(0 1)")
    with pytest.raises(InvalidDatum):
        SatakeDatum(dat, shift, frozenset(), {0: S(1), 1: S(1)}, {0: S(1), 1: ZERO}, "semistandard")
    with pytest.raises(InvalidDatum):
        SatakeDatum(dat, shift, frozenset(), {0: ZERO, 1: S(1)}, {}, "semistandard")
    with pytest.raises(InvalidDatum):
        SatakeDatum(dat, shift, frozenset({1}), {0: S(1), 1: S(1)}, {}, "semistandard")
    with pytest.raises(InvalidDatum):
        SatakeDatum(dat, shift, frozenset(), {0: S(1), 1: S(1)}, {}, "other")


def test_datum_mismatch(sd, fin_half):
    with pytest.raises(DatumMismatch):
        coideal_action(sd, fin_half)
