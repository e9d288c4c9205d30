"""Representations of U_q(sl2) and of the quantum affine algebra.

Algebra elements are kept as noncommuting polynomials in the Chevalley
generators (class Elem) so that twists, antipodes and coproducts can be
evaluated on any module, including tensor products and duals.

Generator names: E{i}, F{i}, K{i} and K{i}inv, where K{i} = K_{d_i h_i}.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping

from .cartan import CartanDatum, GradingShift
from .errors import DatumMismatch, RelationFailure
from .linalg import Matrix, inverse, kron
from .scalar import ONE, ZERO, Scalar, S, qint

Word = tuple[str, ...]


def E(i: int) -> str:
    return f"E{i}"


def F(i: int) -> str:
    return f"F{i}"


def K(i: int) -> str:
    return f"K{i}"


def Kinv(i: int) -> str:
    return f"K{i}inv"


def split_gen(name: str) -> tuple[str, int, bool]:
    """('E'|'F'|'K', node, inverted)."""
    inv = name.endswith("inv")
    core = name[:-3] if inv else name
    return core[0], int(core[1:]), inv


def qv(e) -> Scalar:
    """q^e as a Scalar, e may be a half-integer."""
    e2 = Fraction(e) * 2
    if e2.denominator != 1:
        raise ValueError(f"q^{e} is not a power of v")
    return Scalar.var("v") ** int(e2)


# ---------------------------------------------------------------------------
# algebra elements

class Elem:
    """Finite linear combination of words in the generators."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[Word, Scalar] | None = None):
        self.terms = {w: c for w, c in (terms or {}).items() if not c.is_zero()}

    @classmethod
    def gen(cls, name: str) -> "Elem":
        return cls({(name,): ONE})

    @classmethod
    def word(cls, *names: str, coeff=1) -> "Elem":
        return cls({tuple(names): S(coeff)})

    @classmethod
    def scalar(cls, c) -> "Elem":
        return cls({(): S(c)})

    def __add__(self, other: "Elem") -> "Elem":
        if not isinstance(other, Elem):
            other = Elem.scalar(other)
        out = dict(self.terms)
        for w, c in other.terms.items():
            out[w] = out.get(w, ZERO) + c
        return Elem(out)

    __radd__ = __add__

    def __neg__(self) -> "Elem":
        return Elem({w: -c for w, c in self.terms.items()})

    def __sub__(self, other: "Elem") -> "Elem":
        if not isinstance(other, Elem):
            other = Elem.scalar(other)
        return self + (-other)

    def __mul__(self, other) -> "Elem":
        if not isinstance(other, Elem):
            c = S(other)
            return Elem({w: c * x for w, x in self.terms.items()})
        out: dict[Word, Scalar] = {}
        for w1, c1 in self.terms.items():
            for w2, c2 in other.terms.items():
                w = _normal_word(w1 + w2)
                out[w] = out.get(w, ZERO) + c1 * c2
        return Elem(out)

    def __rmul__(self, other) -> "Elem":
        c = S(other)
        return Elem({w: c * x for w, x in self.terms.items()})

    def map_gens(self, f: Callable[[str], "Elem"]) -> "Elem":
        """Apply the algebra homomorphism determined by f on generators."""
        out = Elem()
        cache: dict[str, Elem] = {}
        for w, c in self.terms.items():
            acc = Elem.scalar(c)
            for g in w:
                if g not in cache:
                    cache[g] = f(g)
                acc = acc * cache[g]
            out = out + acc
        return out

    def is_zero(self) -> bool:
        return not self.terms

    def __repr__(self):
        parts = [f"({c})*{'*'.join(w) or '1'}" for w, c in self.terms.items()]
        return " + ".join(parts) or "0"


def _normal_word(w: Word) -> Word:
    # cancel adjacent K K^-1 pairs
    out: list[str] = []
    for g in w:
        if out:
            a, b = out[-1], g
            if (a.endswith("inv") and b == a[:-3]) or (b.endswith("inv") and a == b[:-3]):
                out.pop()
                continue
        out.append(g)
    return tuple(out)


class Elem2:
    """Element of A (x) A as a sum of coefficient * word (x) word."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[tuple[Word, Word], Scalar] | None = None):
        self.terms = {k: c for k, c in (terms or {}).items() if not c.is_zero()}

    def __add__(self, other: "Elem2") -> "Elem2":
        out = dict(self.terms)
        for k, c in other.terms.items():
            out[k] = out.get(k, ZERO) + c
        return Elem2(out)

    def __mul__(self, other: "Elem2") -> "Elem2":
        out: dict = {}
        for (a1, b1), c1 in self.terms.items():
            for (a2, b2), c2 in other.terms.items():
                k = (_normal_word(a1 + a2), _normal_word(b1 + b2))
                out[k] = out.get(k, ZERO) + c1 * c2
        return Elem2(out)

    def map_legs(self, f1: Callable[[Elem], Elem] | None = None, f2: Callable[[Elem], Elem] | None = None) -> "Elem2":
        out = Elem2()
        for (a, b), c in self.terms.items():
            ea = f1(Elem({a: ONE})) if f1 else Elem({a: ONE})
            eb = f2(Elem({b: ONE})) if f2 else Elem({b: ONE})
            out = out + Elem2({(wa, wb): c * ca * cb for wa, ca in ea.terms.items() for wb, cb in eb.terms.items()})
        return out


def coproduct_gen(name: str) -> Elem2:
    kind, i, inv = split_gen(name)
    one = ()
    if kind == "E":
        return Elem2({((E(i),), one): ONE, ((K(i),), (E(i),)): ONE})
    if kind == "F":
        return Elem2({((F(i),), (Kinv(i),)): ONE, (one, (F(i),)): ONE})
    g = Kinv(i) if inv else K(i)
    return Elem2({((g,), (g,)): ONE})


def coproduct(x: Elem) -> Elem2:
    out = Elem2()
    for w, c in x.terms.items():
        acc = Elem2({((), ()): c})
        for g in w:
            acc = acc * coproduct_gen(g)
        out = out + acc
    return out


def antipode_gen(name: str, inverse: bool = False) -> Elem:
    kind, i, inv = split_gen(name)
    if kind == "K":
        return Elem.gen(K(i) if inv else Kinv(i))
    if kind == "E":
        # S(E) = -K^-1 E, S^-1(E) = -E K^-1
        return Elem.word(E(i), Kinv(i), coeff=-1) if inverse else Elem.word(Kinv(i), E(i), coeff=-1)
    # S(F) = -F K, S^-1(F) = -K F
    return Elem.word(K(i), F(i), coeff=-1) if inverse else Elem.word(F(i), K(i), coeff=-1)


def antipode(x: Elem, inverse: bool = False) -> Elem:
    res = Elem()
    for w, c in x.terms.items():
        acc = Elem.scalar(c)
        for g in reversed(w):
            acc = acc * antipode_gen(g, inverse)
        res = res + acc
    return res


def generator_names(datum: CartanDatum) -> list[str]:
    out = []
    for i in datum.nodes:
        out += [E(i), F(i), K(i), Kinv(i)]
    return out


# ---------------------------------------------------------------------------
# representations

@dataclass(frozen=True, eq=False)
class Rep:
    datum: CartanDatum
    dim: int
    gens: Mapping[str, Matrix]
    weights: tuple[tuple[int, ...], ...]
    grading: Mapping[str, int]
    label: str
    legdims: tuple[int, ...] | None = None
    eval_param: Scalar | None = None
    highest: tuple[int, ...] | None = None
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def legs(self) -> tuple[int, ...]:
        return self.legdims if self.legdims else (self.dim,)

    def action(self, name: str, z: Scalar | None = None) -> Matrix:
        m = self.gens[name]
        e = self.grading.get(name, 0)
        if z is None or e == 0:
            return m
        key = (name, z)
        if key not in self._cache:
            self._cache[key] = m.scale(S(z) ** e)
        return self._cache[key]

    def act(self, x: Elem, z: Scalar | None = None) -> Matrix:
        n = self.dim
        total = None
        for w, c in x.terms.items():
            m = None
            for g in w:
                a = self.action(g, z)
                m = a if m is None else m * a
            if m is None:
                m = Matrix.identity(n)
            m = m.scale(c) if not c.is_one() else m
            total = m if total is None else total + m
        if total is None:
            total = Matrix.zeros(n)
        return total.with_legs(self.legs)

    def act2(self, other: "Rep", x: Elem2, z1: Scalar | None = None, z2: Scalar | None = None) -> Matrix:
        total = None
        for (a, b), c in x.terms.items():
            m = kron(self.act(Elem({a: ONE}), z1), other.act(Elem({b: ONE}), z2)).scale(c)
            total = m if total is None else total + m
        if total is None:
            total = Matrix.zeros(self.dim * other.dim)
        return total.with_legs(self.legs + other.legs)

    def shifted(self, z: Scalar) -> "Rep":
        """The module pulled back along the grading shift Sigma_z."""
        gens = {n: self.action(n, z) for n in self.gens}
        return Rep(self.datum, self.dim, gens, self.weights, self.grading, f"{self.label}[{z}]",
                   self.legdims, self.eval_param, self.highest)


def _check(cond: bool, msg: str):
    if not cond:
        raise RelationFailure(msg)


def check_relations(V: Rep, serre: bool = True) -> None:
    """Verify the defining relations of U_q as exact matrix identities on V."""
    dat = V.datum
    n = V.dim
    I = Matrix.identity(n)
    g = V.gens
    for i in dat.nodes:
        _check(g[K(i)] * g[Kinv(i)] == I, f"K{i} K{i}^-1 != 1 on {V.label}")
        for j in dat.nodes:
            _check(g[K(i)] * g[K(j)] == g[K(j)] * g[K(i)], f"K{i}, K{j} do not commute on {V.label}")
            c = qv(dat.dd(i) * dat.a(i, j))
            _check(g[K(i)] * g[E(j)] * g[Kinv(i)] == g[E(j)].scale(c), f"K{i} E{j} relation on {V.label}")
            _check(g[K(i)] * g[F(j)] * g[Kinv(i)] == g[F(j)].scale(c.inverse()), f"K{i} F{j} relation on {V.label}")
            comm = g[E(i)] * g[F(j)] - g[F(j)] * g[E(i)]
            if i == j:
                qi = qv(dat.dd(i))
                rhs = (g[K(i)] - g[Kinv(i)]).scale((qi - qi.inverse()).inverse())
                _check(comm == rhs, f"[E{i},F{i}] relation on {V.label}")
            else:
                _check(comm.is_zero(), f"[E{i},F{j}] != 0 on {V.label}")
                if serre:
                    _check_serre(V, i, j)
    # weights and Cartan action
    for i in dat.nodes:
        Ki = g[K(i)]
        _check(Ki.is_diagonal(), f"K{i} not diagonal on {V.label}")
        root = dat.root(i)
        for k, mu in enumerate(V.weights):
            _check(Ki[k, k] == qv(dat.pairing(root, mu)), f"K{i} eigenvalue mismatch at basis {k} of {V.label}")
        for name, sign in ((E(i), 1), (F(i), -1)):
            M = g[name]
            for r in range(n):
                for c in range(n):
                    if not M[r, c].is_zero():
                        want = tuple(a + sign * b for a, b in zip(V.weights[c], root))
                        _check(V.weights[r] == want, f"{name} breaks weight grading on {V.label}")


def _check_serre(V: Rep, i: int, j: int):
    dat = V.datum
    m = 1 - dat.a(i, j)
    qi = qv(dat.dd(i))
    for kind in ("E", "F"):
        X = V.gens[f"{kind}{i}"]
        Y = V.gens[f"{kind}{j}"]
        total = Matrix.zeros(V.dim)
        for r in range(m + 1):
            coeff = _qbinom(m, r, qi) * (-1) ** r
            total = total + (X ** (m - r) * Y * X ** r).scale(coeff)
        _check(total.is_zero(), f"Serre relation ({kind}{i},{kind}{j}) fails on {V.label}")


def _qbinom(n: int, k: int, qi: Scalar) -> Scalar:
    def fact(m):
        out = ONE
        for t in range(1, m + 1):
            out = out * qint(t, qi)
        return out
    return fact(n) / (fact(k) * fact(n - k))


def _grading(datum: CartanDatum, shift: GradingShift | None) -> dict[str, int]:
    out = {}
    for i in datum.nodes:
        s = shift.s[i] if shift is not None else 0
        out[E(i)] = s
        out[F(i)] = -s
        out[K(i)] = 0
        out[Kinv(i)] = 0
    return out


def _spin_matrices(j: Fraction):
    n = int(2 * j) + 1
    q = Scalar.var("v") ** 2
    Em = Matrix.zeros(n)
    Fm = Matrix.zeros(n)
    for k in range(n):
        if k > 0:
            Em.entries[(k - 1) * n + k] = qint(k, q)
        if k < n - 1:
            Fm.entries[(k + 1) * n + k] = qint(n - 1 - k, q)
    weights = tuple((n - 1 - 2 * k,) for k in range(n))
    Kd = [q ** (n - 1 - 2 * k) for k in range(n)]
    return n, Em, Fm, Matrix.diag(Kd), Matrix.diag([x.inverse() for x in Kd]), weights


def _as_spin(j) -> Fraction:
    j = Fraction(j)
    if j < 0 or (2 * j).denominator != 1:
        raise ValueError(f"spin must be a non-negative half-integer, got {j}")
    return j


def spin_rep(datum: CartanDatum, j) -> Rep:
    """The (2j+1)-dimensional type-1 module of U_q(sl2), basis ordered from the highest weight."""
    if datum.affine or datum.rank != 1:
        raise DatumMismatch("spin_rep needs the finite A1 datum")
    j = _as_spin(j)
    n, Em, Fm, Km, Ki, weights = _spin_matrices(j)
    i = datum.nodes[0]
    gens = {E(i): Em, F(i): Fm, K(i): Km, Kinv(i): Ki}
    V = Rep(datum, n, gens, weights, _grading(datum, None), f"spin{j}", (n,), None, (n - 1,))
    check_relations(V)
    return V


def eval_rep(datum: CartanDatum, shift: GradingShift, j, a=None) -> Rep:
    """Evaluation module of U_q(affine sl2): E1=E, F1=F, E0=aF, F0=a^-1 E, K0=K^-1."""
    if not datum.affine or datum.kind != "A1affine":
        raise DatumMismatch("eval_rep needs the affine A1 datum")
    j = _as_spin(j)
    n, Em, Fm, Km, Ki, weights = _spin_matrices(j)
    a = ONE if a is None else S(a)
    gens = {E(1): Em, F(1): Fm, K(1): Km, Kinv(1): Ki,
            E(0): Fm.scale(a), F(0): Em.scale(a.inverse()), K(0): Ki, Kinv(0): Km}
    label = f"ev{j}" if a.is_one() else f"ev{j}({a})"
    V = Rep(datum, n, gens, weights, _grading(datum, shift), label, (n,), a, (n - 1,))
    check_relations(V)
    return V


def trivial_rep(datum: CartanDatum, shift: GradingShift | None = None) -> Rep:
    one = Matrix.identity(1)
    zero = Matrix.zeros(1)
    gens = {}
    for i in datum.nodes:
        gens.update({E(i): zero, F(i): zero, K(i): one, Kinv(i): one})
    wt = tuple(0 for _ in datum.fin_nodes)
    return Rep(datum, 1, gens, (wt,), _grading(datum, shift), "trivial", (1,), None, wt)


def tensor_rep(V: Rep, W: Rep, ratio=None) -> Rep:
    """V (x) W with the coproduct, the second leg pulled back along Sigma_ratio."""
    if V.datum != W.datum:
        raise DatumMismatch("tensor factors over different data")
    if dict(V.grading) != dict(W.grading):
        raise DatumMismatch("tensor factors with different grading shifts")
    r = None if ratio is None else S(ratio)
    gens = {}
    for name in V.gens:
        kind, i, inv = split_gen(name)
        if kind == "E":
            gens[name] = kron(V.gens[name], Matrix.identity(W.dim)) + kron(V.gens[K(i)], W.action(name, r))
        elif kind == "F":
            gens[name] = kron(V.gens[name], W.gens[Kinv(i)]) + kron(Matrix.identity(V.dim), W.action(name, r))
        else:
            gens[name] = kron(V.gens[name], W.gens[name])
    weights = tuple(tuple(a + b for a, b in zip(x, y)) for x in V.weights for y in W.weights)
    label = f"{V.label}*{W.label}" + (f"[{r}]" if r is not None and not r.is_one() else "")
    legs = V.legs + W.legs
    gens = {k: m.with_legs(legs) for k, m in gens.items()}
    return Rep(V.datum, V.dim * W.dim, gens, weights, V.grading, label, legs)


def dual_rep(V: Rep, side: str = "left") -> Rep:
    """Left dual *V: a -> (S^-1(a)_V)^t ; right dual V*: a -> (S(a)_V)^t."""
    if side not in ("left", "right"):
        raise ValueError("side is 'left' or 'right'")
    inv = side == "left"
    gens = {name: V.act(antipode_gen(name, inverse=inv)).T.with_legs((V.dim,)) for name in V.gens}
    weights = tuple(tuple(-x for x in w) for w in V.weights)
    label = f"*{V.label}" if inv else f"{V.label}*"
    W = Rep(V.datum, V.dim, gens, weights, V.grading, label, (V.dim,))
    check_relations(W)
    return W


def twisted_rep(V: Rep, psi: Mapping[str, Elem], label: str | None = None) -> Rep:
    """V^psi: the generator x acts as psi(x)_V; weights are read off the K-action."""
    gens = {name: V.act(psi[name]) for name in V.gens}
    dat = V.datum
    weights = []
    for k in range(V.dim):
        mu = []
        for i in dat.fin_nodes:
            Ki = gens[K(i)]
            if not Ki.is_diagonal():
                raise RelationFailure("twisted module has non-diagonal Cartan action")
            x = Ki[k, k]
            e = _v_exponent(x)
            mu.append(Fraction(e, 2 * dat.dd(i)))
        if any(m.denominator != 1 for m in mu):
            raise RelationFailure("twisted module weights are not integral")
        weights.append(tuple(int(m) for m in mu))
    W = Rep(dat, V.dim, gens, tuple(weights), V.grading, label or f"{V.label}^psi", V.legs)
    check_relations(W, serre=False)
    return W


def _v_exponent(x: Scalar) -> int:
    names = x.num.context().names()
    iv = names.index("v")
    if len(x.num) != 1 or len(x.den) != 1:
        raise RelationFailure(f"{x} is not a monomial in v")
    en = x.num.monoms()[0]
    ed = x.den.monoms()[0]
    if any(e for k, e in enumerate(en) if k != iv) or any(e for k, e in enumerate(ed) if k != iv):
        raise RelationFailure(f"{x} is not a monomial in v")
    c = x.num.coeffs()[0] / x.den.coeffs()[0]
    if c != 1:
        raise RelationFailure(f"{x} is not a monic monomial in v")
    return int(en[iv]) - int(ed[iv])


# ---------------------------------------------------------------------------
# sovereign operators

@dataclass(frozen=True)
class SovereignOps:
    D: Matrix
    Dbar: Matrix | None


def sovereign_ops(V: Rep, shift: GradingShift | None = None) -> SovereignOps:
    """D = q^{-2(rho,mu)}; in affine mode Dbar = q^{-2(rho,mu) + 2 h_phi (s - f s_hom)(mu)}."""
    dat = V.datum
    rho = dat.rho
    D = Matrix.diag([qv(-2 * dat.pairing(rho, mu)) for mu in V.weights], V.legs)
    Dbar = None
    if shift is not None:
        Dbar = Matrix.diag([qv(-2 * dat.pairing(rho, mu) + 2 * shift.hvee_phi * shift.shift_value(mu))
                            for mu in V.weights], V.legs)
    return SovereignOps(D, Dbar)


def square_antipode_residuals(V: Rep, D: Matrix, z: Scalar | None = None, shift_arg: Scalar | None = None) -> dict:
    """Ad(D)(x_V) - S^2(x)_V per generator; with shift_arg p2, compares against S^2 = Ad(D) o Sigma_p2."""
    out = {}
    Dinv = inverse(D)
    for name in V.gens:
        s2 = V.act(antipode(antipode(Elem.gen(name))))
        lhs = D * V.action(name, shift_arg) * Dinv
        out[name] = lhs - s2
    return out


def highest_weight(V: Rep) -> tuple[int, ...]:
    if V.highest is not None:
        return V.highest
    raise ValueError(f"{V.label} has no recorded highest weight")
