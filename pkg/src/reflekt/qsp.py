"""Quantum symmetric pair data, coideal generators on modules and the twist psi.

Coideal generators (X empty):
    B_i = F_i - gamma_i q_i^{-a_{i,tau i}/2} E_{tau i} K_i^-1 + sigma_i K_i^-1
plus the Cartan part K_h for h fixed by -tau.

Two twists ship:
  semistandard  E_i -> F_{tau i}, F_i -> E_{tau i}, K_i -> K_{tau i}^-1   (affine)
  standard      the inverse of the map phi_q with phi_q(F_i) = -gamma_i q_i^{-1} E_i K_i^-1  (finite A1)
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

from .cartan import CartanDatum, GradingShift, build_datum
from .errors import DatumMismatch, InvalidDatum, UnsupportedTwist
from .linalg import Matrix, inverse, kron, solve_intertwiner
from .reps import E, F, K, Kinv, Elem, Rep, coproduct, qv, twisted_rep
from .scalar import ZERO, Scalar, S

TWISTS = ("semistandard", "standard")


@dataclass(frozen=True)
class SatakeDatum:
    datum: CartanDatum
    shift: GradingShift | None
    X: frozenset
    gamma: Mapping[int, Scalar]
    sigma: Mapping[int, Scalar]
    twist_kind: str
    cartan_part: tuple[Elem, ...] = field(default=())
    label: str = ""

    def __post_init__(self):
        dat = self.datum
        if self.X:
            raise InvalidDatum("only X = {} is supported")
        if self.twist_kind not in TWISTS:
            raise InvalidDatum(f"unknown twist kind {self.twist_kind!r}")
        for i in dat.nodes:
            if S(self.gamma[i]).is_zero():
                raise InvalidDatum(f"gamma_{i} must be invertible")
            if dat.t(i) != i and not S(self.sigma.get(i, 0)).is_zero():
                raise InvalidDatum(f"sigma_{i} must vanish since tau({i}) != {i}")

    def generators(self) -> dict[str, Elem]:
        dat = self.datum
        out = {}
        for i in dat.nodes:
            t = dat.t(i)
            c = S(self.gamma[i]) * qv(Fraction(-dat.dd(i) * dat.a(i, t), 2))
            b = Elem.gen(F(i)) - Elem.word(E(t), Kinv(i), coeff=c)
            sig = S(self.sigma.get(i, 0))
            if not sig.is_zero():
                b = b + Elem.word(Kinv(i), coeff=sig)
            out[f"B{i}"] = b
        for k, h in enumerate(self.cartan_part):
            out[f"C{k}"] = h
        return out

    def psi(self) -> dict[str, Elem]:
        """The twist on generators, as a map name -> Elem."""
        dat = self.datum
        out = {}
        if self.twist_kind == "semistandard":
            for i in dat.nodes:
                t = dat.t(i)
                out[E(i)] = Elem.gen(F(t))
                out[F(i)] = Elem.gen(E(t))
                out[K(i)] = Elem.gen(Kinv(t))
                out[Kinv(i)] = Elem.gen(K(t))
            return out
        for i in dat.nodes:
            if dat.t(i) != i:
                raise UnsupportedTwist("standard twist is implemented for tau = id")
            qi = qv(dat.dd(i))
            c = -S(self.gamma[i]) / qi
            out[E(i)] = Elem.word(F(i), Kinv(i), coeff=c.inverse())
            out[F(i)] = Elem.word(K(i), E(i), coeff=c)
            out[K(i)] = Elem.gen(Kinv(i))
            out[Kinv(i)] = Elem.gen(K(i))
        return out

    def apply_psi(self, x: Elem) -> Elem:
        table = self.psi()
        return x.map_gens(lambda g: table[g])


def sklyanin_datum(xi="xi", kind: str = "A1affine") -> SatakeDatum:
    """Quasi-split affine A1 with tau = (0 1): B_0 = F_0 - q xi^-1 E_1 K_0^-1, B_1 = F_1 - q xi E_0 K_1^-1."""
    dat, shift = build_datum(kind, "(0 1)")
    x = S(xi)
    cartan = (Elem.word(K(0), Kinv(1)), Elem.word(K(1), Kinv(0)))
    return SatakeDatum(dat, shift, frozenset(), {0: x.inverse(), 1: x}, {0: ZERO, 1: ZERO},
                       "semistandard", cartan, f"A1affine tau=(0 1) xi={x}")


def a1_omega_datum(gamma="gamma", sigma="sigma") -> SatakeDatum:
    """Finite A1 with phi = omega: B = F - gamma q^-1 E K^-1 + sigma K^-1."""
    dat, _ = build_datum("A1")
    g, s = S(gamma), S(sigma)
    return SatakeDatum(dat, None, frozenset(), {1: g}, {1: s}, "standard", (), f"A1 omega gamma={g} sigma={s}")


def coideal_action(sd: SatakeDatum, V: Rep, z=None) -> dict[str, Matrix]:
    """Matrices of the coideal generators on V, on V_z when z is given."""
    if V.datum != sd.datum:
        raise DatumMismatch(f"{V.label} is not over the datum of {sd.label}")
    z = None if z is None else S(z)
    return {name: V.act(b, z) for name, b in sd.generators().items()}


def coideal_residuals(sd: SatakeDatum, V: Rep, W: Rep) -> dict[str, Matrix]:
    """Delta(B_i) minus B_i (x) K_i^-1 + 1 (x) F_i - c K_{tau i} K_i^-1 (x) E_{tau i} K_i^-1 on V (x) W.

    Zero residuals exhibit Delta(B) inside B (x) A, with the Cartan factor K_{tau i} K_i^-1 in B.
    """
    dat = sd.datum
    gens = sd.generators()
    out = {}
    for i in dat.nodes:
        t = dat.t(i)
        c = S(sd.gamma[i]) * qv(Fraction(-dat.dd(i) * dat.a(i, t), 2))
        b = gens[f"B{i}"]
        lhs = V.act2(W, coproduct(b))
        rhs = (kron(V.act(b), W.gens[Kinv(i)]) + kron(Matrix.identity(V.dim), W.gens[F(i)])
               - kron(V.act(Elem.word(K(t), Kinv(i))), W.act(Elem.word(E(t), Kinv(i)))).scale(c))
        out[f"B{i}"] = lhs - rhs.with_legs(lhs.legs)
    return out


def cartan_in_coideal(sd: SatakeDatum) -> bool:
    """K_{tau i} K_i^-1 lies in the Cartan part whenever tau(i) != i."""
    words = {tuple(h.terms) for h in sd.cartan_part}
    for i in sd.datum.nodes:
        t = sd.datum.t(i)
        if t != i and (((K(t), Kinv(i)),) not in words):
            return False
    return True


@dataclass(frozen=True)
class TwistIdentification:
    """G with psi(x)_V = G x_V G^-1, so pi_{V,z}(psi(b)) = G pi_{V,1/z}(b) G^-1."""

    rep: Rep
    G: Matrix
    Ginv: Matrix
    rule: str = "z -> 1/z"


def twist_identification(sd: SatakeDatum, V: Rep) -> TwistIdentification:
    if V.datum != sd.datum:
        raise DatumMismatch(f"{V.label} is not over the datum of {sd.label}")
    psi = sd.psi()
    pairs = [(V.gens[n], V.act(psi[n])) for n in V.gens]
    sols = solve_intertwiner(pairs, V.dim, V.dim)
    if len(sols) != 1:
        raise UnsupportedTwist(f"no unique identification of {V.label}^psi with {V.label} ({len(sols)} solutions)")
    G = sols[0]
    k = next(k for k, x in enumerate(G.entries) if not x.is_zero())
    G = G.scale(G.entries[k].inverse()).with_legs(V.legs)
    try:
        Ginv = inverse(G)
    except Exception as exc:
        raise UnsupportedTwist(f"identification of {V.label}^psi is not invertible") from exc
    return TwistIdentification(V, G, Ginv)


def psi_rep(sd: SatakeDatum, V: Rep) -> Rep:
    """V^psi built from the explicit twist."""
    return twisted_rep(V, sd.psi())
