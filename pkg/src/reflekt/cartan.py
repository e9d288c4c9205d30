"""Cartan data, the finite weight lattice pairing and tau-minimal grading shifts.

Weights live on the finite weight lattice and are written in the basis of
fundamental weights, so for A1 the weight m*omega is the tuple (m,).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from .errors import InvalidDatum
from .scalar import Scalar

Weight = tuple[int, ...]


def _inverse(mat: list[list[Fraction]]) -> list[list[Fraction]]:
    n = len(mat)
    aug = [list(map(Fraction, row)) + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(mat)]
    for c in range(n):
        p = next((r for r in range(c, n) if aug[r][c] != 0), None)
        if p is None:
            raise InvalidDatum("finite Cartan matrix is singular")
        aug[c], aug[p] = aug[p], aug[c]
        inv = 1 / aug[c][c]
        aug[c] = [x * inv for x in aug[c]]
        for r in range(n):
            if r != c and aug[r][c] != 0:
                f = aug[r][c]
                aug[r] = [x - f * y for x, y in zip(aug[r], aug[c])]
    return [row[n:] for row in aug]


@dataclass(frozen=True)
class CartanDatum:
    kind: str
    nodes: tuple[int, ...]
    gcm: tuple[tuple[int, ...], ...]
    d: tuple[int, ...]
    tau: tuple[int, ...]
    affine: bool
    fin_nodes: tuple[int, ...]
    delta: tuple[int, ...] | None = None
    form: tuple[tuple[Fraction, ...], ...] = field(default=(), repr=False)
    roots: tuple[Weight, ...] = field(default=(), repr=False)

    def a(self, i: int, j: int) -> int:
        return self.gcm[self.nodes.index(i)][self.nodes.index(j)]

    def dd(self, i: int) -> int:
        return self.d[self.nodes.index(i)]

    def t(self, i: int) -> int:
        return self.tau[self.nodes.index(i)]

    def root(self, i: int) -> Weight:
        """Simple root alpha_i restricted to the finite weight lattice."""
        return self.roots[self.nodes.index(i)]

    @property
    def rank(self) -> int:
        return len(self.fin_nodes)

    @property
    def rho(self) -> Weight:
        return tuple(1 for _ in self.fin_nodes)

    def pairing(self, lam: Sequence[int], mu: Sequence[int]) -> Fraction:
        return sum((Fraction(x) * g * y for i, x in enumerate(lam) for j, (g, y) in enumerate(zip(self.form[i], mu))),
                   Fraction(0))

    def tau_weight(self, lam: Sequence[int]) -> tuple[Fraction, ...]:
        """Linear action of tau on finite weights, fixed by alpha_i -> alpha_tau(i) on finite roots."""
        fin = self.fin_nodes
        src = [[Fraction(x) for x in self.root(i)] for i in fin]  # rows: alpha_i
        img = [[Fraction(x) for x in self.root(self.t(i))] for i in fin]
        # lam = sum_i c_i alpha_i  ->  c = lam . src^{-1}
        inv = _inverse(src)
        c = [sum(Fraction(lam[k]) * inv[k][i] for k in range(len(fin))) for i in range(len(fin))]
        return tuple(sum(c[i] * img[i][k] for i in range(len(fin))) for k in range(len(fin)))


@dataclass(frozen=True)
class GradingShift:
    s: Mapping[int, int]
    s_hom: Mapping[int, int]
    f: Fraction
    hvee: int
    hvee_phi: Fraction
    # (s - f s_hom) on the fundamental weights of the finite lattice
    ext: tuple[Fraction, ...]

    @property
    def p(self) -> Scalar:
        e = 2 * self.hvee_phi
        if e.denominator != 1:
            raise InvalidDatum("p is not an integral power of v")
        return Scalar.var("v") ** (-int(e))

    def shift_value(self, lam: Sequence[int]) -> Fraction:
        """(s - f s_hom)(lam) for a finite weight lam."""
        return sum((Fraction(x) * e for x, e in zip(lam, self.ext)), Fraction(0))


_TABLE = {
    "A1": dict(nodes=(1,), gcm=((2,),), d=(1,), fin=(1,), delta=None),
    "A1affine": dict(nodes=(0, 1), gcm=((2, -2), (-2, 2)), d=(1, 1), fin=(1,), delta=(1, 1)),
}

ALIASES = {"a1": "A1", "A1": "A1", "a1-affine": "A1affine", "A1affine": "A1affine", "a1affine": "A1affine"}


def parse_tau(text: str, nodes: Sequence[int]) -> tuple[int, ...]:
    """Cycle notation such as '(0 1)' or 'id'."""
    perm = {i: i for i in nodes}
    text = text.strip()
    if text in ("", "id", "()"):
        return tuple(perm[i] for i in nodes)
    for cyc in text.replace(")", ")|").split("|"):
        cyc = cyc.strip().strip("(").strip(")").replace(",", " ").split()
        if not cyc:
            continue
        try:
            c = [int(x) for x in cyc]
        except ValueError as exc:
            raise InvalidDatum(f"bad cycle notation {text!r}") from exc
        if any(x not in perm for x in c) or len(set(c)) != len(c):
            raise InvalidDatum(f"cycle {tuple(c)} does not permute the nodes {tuple(nodes)}")
        for a, b in zip(c, c[1:] + c[:1]):
            perm[a] = b
    return tuple(perm[i] for i in nodes)


def build_datum(kind: str, tau: Sequence[int] | str | None = None) -> tuple[CartanDatum, GradingShift | None]:
    kind = ALIASES.get(kind, kind)
    if kind not in _TABLE:
        raise InvalidDatum(f"unknown datum kind {kind!r}")
    entry = _TABLE[kind]
    nodes = entry["nodes"]
    if tau is None:
        tau = tuple(nodes)
    elif isinstance(tau, str):
        tau = parse_tau(tau, nodes)
    tau = tuple(tau)
    if sorted(tau) != sorted(nodes):
        raise InvalidDatum(f"tau {tau} is not a permutation of {nodes}")
    gcm, d = entry["gcm"], entry["d"]
    n = len(nodes)
    for i in range(n):
        for j in range(n):
            if d[i] * gcm[i][j] != d[j] * gcm[j][i]:
                raise InvalidDatum("Cartan matrix is not symmetrizable")
    pos = {i: k for k, i in enumerate(nodes)}
    for i in nodes:
        for j in nodes:
            if gcm[pos[tau[pos[i]]]][pos[tau[pos[j]]]] != gcm[pos[i]][pos[j]]:
                raise InvalidDatum("tau does not preserve the Cartan matrix")
    for i in nodes:
        if tau[pos[tau[pos[i]]]] != i:
            raise InvalidDatum("tau must be an involution")
    fin = entry["fin"]
    cfin = [[gcm[pos[i]][pos[j]] for j in fin] for i in fin]
    dfin = [d[pos[i]] for i in fin]
    # (omega_i, omega_j) = (diag(d) C^{-1})_{ij} with C_{kj} = a_kj
    cinv = _inverse([[Fraction(x) for x in row] for row in cfin])
    form = tuple(tuple(dfin[i] * cinv[i][j] for j in range(len(fin))) for i in range(len(fin)))
    roots = []
    for i in nodes:
        if i in fin:
            roots.append(tuple(gcm[pos[k]][pos[i]] for k in fin))
        else:
            # alpha_0 = delta - theta restricted to the finite lattice
            marks = entry["delta"]
            m0 = marks[pos[i]]
            acc = [0] * len(fin)
            for k in fin:
                mk = marks[pos[k]]
                for t, kk in enumerate(fin):
                    acc[t] -= mk * gcm[pos[kk]][pos[k]]
            roots.append(tuple(x // m0 for x in acc))
    datum = CartanDatum(kind=kind, nodes=nodes, gcm=gcm, d=d, tau=tau, affine=entry["delta"] is not None,
                        fin_nodes=fin, delta=entry["delta"], form=form, roots=tuple(roots))
    if not datum.affine:
        return datum, None
    return datum, _tau_minimal_shift(datum)


def _tau_minimal_shift(datum: CartanDatum) -> GradingShift:
    nodes = datum.nodes
    zero = next(i for i in nodes if i not in datum.fin_nodes)
    special = {zero, datum.t(zero)}
    s = {i: int(i in special) for i in nodes}
    s_hom = {i: int(i == zero) for i in nodes}
    marks = dict(zip(nodes, datum.delta))
    s_delta = sum(marks[i] * s[i] for i in nodes)
    f = Fraction(s_delta, marks[zero])
    # h^vee = rho(c) with c = sum of dual marks; for simply-laced types these are the marks
    hvee = sum(marks.values())
    hvee_phi = Fraction(hvee) / f
    # s - f s_hom vanishes on delta, so it is a function on the finite root lattice;
    # extend to fundamental weights by inverting the finite Cartan matrix
    fin = datum.fin_nodes
    on_roots = [Fraction(s[i]) - f * s_hom[i] for i in fin]
    cfin = [[Fraction(datum.a(k, i)) for k in fin] for i in fin]  # row i: alpha_i in omega coords
    # values x_k on omega_k satisfy sum_k a_ki x_k = on_roots[i]
    cinv = _inverse(cfin)
    ext = tuple(sum(cinv[k][i] * on_roots[i] for i in range(len(fin))) for k in range(len(fin)))
    return GradingShift(s=s, s_hom=s_hom, f=f, hvee=hvee, hvee_phi=hvee_phi, ext=ext)


def pairing(datum: CartanDatum, lam: Sequence[int], mu: Sequence[int]) -> Fraction:
    return datum.pairing(lam, mu)
