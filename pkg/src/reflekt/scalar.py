"""Exact rational functions over Q in v = q^(1/2), spectral and parameter variables.

A Scalar is a reduced fraction num/den of FLINT multivariate polynomials.
The denominator is made monic with respect to the degree-lexicographic order
of the variable registry, so equal field elements have equal representations.
"""

from __future__ import annotations

import re
import threading
from fractions import Fraction
from typing import Iterable, Mapping, Union

import flint

from .errors import DivisionByZero, ParseError, SpecializationPole

ORDER = "deglex"
DEFAULT_VARS = ("v", "z", "y", "x", "w", "xi", "gamma", "sigma", "a", "b")
RESERVED = frozenset({"q"})


class VarRegistry:
    """Append-only, ordered table of variable names.

    Appending keeps earlier canonical forms valid: monomials that do not involve
    a new variable compare the same way under deglex.
    """

    def __init__(self, names: Iterable[str] = ()):
        self._lock = threading.Lock()
        self._names: list[str] = []
        self._laurent: dict[str, bool] = {}
        self._root: dict[str, int] = {}
        self._ctx = None
        for n in names:
            self.declare(n)

    def declare(self, name: str, laurent: bool = True, root: int = 1) -> int:
        if name in RESERVED:
            raise ValueError(f"{name!r} is reserved (q is printed for v^2)")
        if not re.fullmatch(r"[A-Za-z_][A-Za-z_0-9]*", name):
            raise ValueError(f"bad variable name {name!r}")
        with self._lock:
            if name in self._names:
                if root != 1 and self._root[name] != root:
                    raise ValueError(f"{name} already declared with root {self._root[name]}")
                return self._names.index(name)
            self._names.append(name)
            self._laurent[name] = laurent
            self._root[name] = root
            self._ctx = flint.fmpq_mpoly_ctx.get(tuple(self._names), ORDER)
            return len(self._names) - 1

    @property
    def ctx(self):
        return self._ctx

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(self._names)

    def root(self, name: str) -> int:
        return self._root.get(name, 1)

    def laurent(self, name: str) -> bool:
        return self._laurent.get(name, True)

    def __contains__(self, name: str) -> bool:
        return name in self._names


REGISTRY = VarRegistry(DEFAULT_VARS)


def declare(name: str, laurent: bool = True, root: int = 1) -> "Scalar":
    """Register a variable (idempotent) and return it as a Scalar."""
    REGISTRY.declare(name, laurent, root)
    return Scalar.var(name)


def _lift(p, ctx):
    src = p.context()
    if src is ctx:
        return p
    pad = (0,) * (ctx.nvars() - src.nvars())
    return ctx.from_dict({e + pad: c for e, c in zip(p.monoms(), p.coeffs())})


def _bigger(c1, c2):
    return c1 if c1.nvars() >= c2.nvars() else c2


def _reduce(num, den):
    if den.is_zero():
        raise DivisionByZero("zero denominator")
    ctx = num.context()
    if num.is_zero():
        return Scalar._raw(num, ctx.from_dict({(0,) * ctx.nvars(): 1}))
    if not den.is_constant():
        g = num.gcd(den)
        if not g.is_constant():
            num = num / g
            den = den / g
    lc = den.leading_coefficient()
    if lc != 1:
        inv = 1 / lc
        num = num * inv
        den = den * inv
    return Scalar._raw(num, den)


Number = Union[int, Fraction, "Scalar"]


class Scalar:
    """Element of Q(v, z, parameters) in canonical reduced form."""

    __slots__ = ("num", "den", "_hash")

    def __init__(self, value: Union[int, Fraction, str, "Scalar"] = 0):
        if isinstance(value, Scalar):
            self.num, self.den = value.num, value.den
        elif isinstance(value, str):
            s = parse(value)
            self.num, self.den = s.num, s.den
        else:
            ctx = REGISTRY.ctx
            zero = (0,) * ctx.nvars()
            fr = Fraction(value)
            self.num = ctx.from_dict({zero: flint.fmpq(fr.numerator, fr.denominator)}) if fr else ctx.from_dict({})
            self.den = ctx.from_dict({zero: 1})
        self._hash = None

    @classmethod
    def _raw(cls, num, den) -> "Scalar":
        obj = cls.__new__(cls)
        obj.num = num
        obj.den = den
        obj._hash = None
        return obj

    @classmethod
    def var(cls, name: str) -> "Scalar":
        if name == "q":
            return cls.var("v") ** 2
        if name not in REGISTRY:
            raise KeyError(f"undeclared variable {name!r}")
        ctx = REGISTRY.ctx
        idx = ctx.names().index(name)
        return cls._raw(ctx.gens()[idx], ctx.from_dict({(0,) * ctx.nvars(): 1}))

    @classmethod
    def fraction(cls, num, den) -> "Scalar":
        """Reduce num/den given as FLINT polynomials (possibly in different contexts)."""
        ctx = _bigger(num.context(), den.context())
        return _reduce(_lift(num, ctx), _lift(den, ctx))

    # -- predicates -------------------------------------------------------
    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_one(self) -> bool:
        return self.num.is_one() and self.den.is_one()

    def is_constant(self) -> bool:
        return self.num.is_constant() and self.den.is_constant()

    def is_polynomial(self) -> bool:
        return self.den.is_constant()

    def to_fraction(self) -> Fraction:
        if not self.is_constant():
            raise ValueError(f"{self} is not a constant")
        if self.num.is_zero():
            return Fraction(0)
        c = self.num.leading_coefficient() / self.den.leading_coefficient()
        return Fraction(int(c.p), int(c.q))

    @property
    def weight(self) -> int:
        """Term count, used as a pivot-size heuristic."""
        return len(self.num) + len(self.den)

    def variables(self) -> set[str]:
        names = self.num.context().names()
        out = set()
        for p in (self.num, self.den):
            for i, d in enumerate(p.degrees()):
                if d > 0:
                    out.add(names[i])
        return out

    def degree(self, name: str) -> tuple[int, int]:
        """Degrees (numerator, denominator) in one variable."""
        names = self.num.context().names()
        if name not in names:
            return (0, 0)
        i = names.index(name)
        return (max(self.num.degrees()[i], 0), max(self.den.degrees()[i], 0))

    # -- arithmetic -------------------------------------------------------
    def _coerce(self, other) -> "Scalar":
        if isinstance(other, Scalar):
            return other
        if isinstance(other, (int, Fraction)):
            return Scalar(other)
        return NotImplemented

    def _pair(self, other):
        c1, c2 = self.num.context(), other.num.context()
        if c1 is c2:
            return self.num, self.den, other.num, other.den
        ctx = _bigger(c1, c2)
        return (_lift(self.num, ctx), _lift(self.den, ctx), _lift(other.num, ctx), _lift(other.den, ctx))

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if other.num.is_zero():
            return self
        if self.num.is_zero():
            return other
        n1, d1, n2, d2 = self._pair(other)
        if d1 == d2:
            if d1.is_one():
                return Scalar._raw(n1 + n2, d1)
            return _reduce(n1 + n2, d1)
        if d1.is_one():
            return Scalar._raw(n1 * d2 + n2, d2)
        if d2.is_one():
            return Scalar._raw(n1 + n2 * d1, d1)
        g = d1.gcd(d2)
        if g.is_one():
            return _reduce(n1 * d2 + n2 * d1, d1 * d2)
        d2g = d2 / g
        return _reduce(n1 * d2g + n2 * (d1 / g), d1 * d2g)

    __radd__ = __add__

    def __neg__(self):
        return Scalar._raw(-self.num, self.den)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other + (-self)

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if self.num.is_zero():
            return self
        if other.num.is_zero():
            return other
        n1, d1, n2, d2 = self._pair(other)
        if d1.is_one() and d2.is_one():
            return Scalar._raw(n1 * n2, d1)
        g1 = n1.gcd(d2) if not d2.is_one() else None
        g2 = n2.gcd(d1) if not d1.is_one() else None
        if g1 is not None and not g1.is_constant():
            n1, d2 = n1 / g1, d2 / g1
        if g2 is not None and not g2.is_constant():
            n2, d1 = n2 / g2, d1 / g2
        num, den = n1 * n2, d1 * d2
        lc = den.leading_coefficient()
        if lc != 1:
            inv = 1 / lc
            num, den = num * inv, den * inv
        return Scalar._raw(num, den)

    __rmul__ = __mul__

    def inverse(self) -> "Scalar":
        if self.num.is_zero():
            raise DivisionByZero("inverse of zero")
        num, den = self.den, self.num
        lc = den.leading_coefficient()
        if lc != 1:
            inv = 1 / lc
            num, den = num * inv, den * inv
        return Scalar._raw(num, den)

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if other.num.is_zero():
            raise DivisionByZero(f"division of {self} by zero")
        return self * other.inverse()

    def __rtruediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other * self.inverse()

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return self.inverse() ** (-n)
        if n == 0:
            return Scalar(1)
        return Scalar._raw(self.num ** n, self.den ** n)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Scalar(other)
        if not isinstance(other, Scalar):
            return NotImplemented
        n1, d1, n2, d2 = self._pair(other)
        return n1 == n2 and d1 == d2

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((_poly_key(self.num), _poly_key(self.den)))
        return self._hash

    @staticmethod
    def sum(items: Iterable["Scalar"]) -> "Scalar":
        """Sum with terms grouped by denominator to avoid repeated gcds."""
        groups: list[list] = []
        ctx = None
        for s in items:
            if s.num.is_zero():
                continue
            c = s.num.context()
            if ctx is None or c is not ctx:
                ctx = c if ctx is None else _bigger(ctx, c)
            for g in groups:
                if g[0] is s.den or g[0] == s.den:
                    g[1] = g[1] + s.num
                    break
            else:
                groups.append([s.den, s.num])
        if not groups:
            return Scalar(0)
        total = None
        for den, num in groups:
            term = Scalar.fraction(num, den)
            total = term if total is None else total + term
        return total

    # -- substitution and calculus -----------------------------------------
    def substitute(self, bindings: Mapping[str, Number]) -> "Scalar":
        if not bindings:
            return self
        vals = {}
        for name, val in bindings.items():
            if name == "q":
                raise ValueError("bind v, not q")
            vals[name] = val if isinstance(val, Scalar) else Scalar(val)
        ctx = self.num.context()
        for val in vals.values():
            ctx = _bigger(ctx, val.num.context())
        names = ctx.names()
        num, den = _lift(self.num, ctx), _lift(self.den, ctx)
        consts, rats = {}, {}
        for name, val in vals.items():
            if name not in names:
                continue
            if val.is_constant():
                f = val.to_fraction()
                consts[name] = flint.fmpq(f.numerator, f.denominator)
            else:
                rats[names.index(name)] = (_lift(val.num, ctx), _lift(val.den, ctx))
        if consts:
            num = num.subs(consts)
            den = den.subs(consts)
            if den.is_zero():
                raise SpecializationPole(f"denominator of {self} vanishes under {bindings}")
        if rats:
            if all(b.is_one() for _, b in rats.values()):
                gens = list(ctx.gens())
                for i, (a, _) in rats.items():
                    gens[i] = a
                num = num.compose(*gens, ctx=ctx)
                den = den.compose(*gens, ctx=ctx)
            else:
                num, den = _subst_rational(num, den, rats, ctx)
            if den.is_zero():
                raise SpecializationPole(f"denominator of {self} vanishes under {bindings}")
        return _reduce(num, den)

    def derivative(self, name: str) -> "Scalar":
        ctx = self.num.context()
        if name not in ctx.names():
            return Scalar(0)
        i = ctx.names().index(name)
        dn = self.num.derivative(i)
        dd = self.den.derivative(i)
        if dd.is_zero():
            return _reduce(dn, self.den)
        return _reduce(dn * self.den - self.num * dd, self.den * self.den)

    def valuation(self, name: str) -> int:
        """Order of vanishing at name = 0 (negative for a pole)."""
        return int(_min_exp(self.num, name)) - int(_min_exp(self.den, name))

    # -- text -------------------------------------------------------------
    def __str__(self):
        n = _poly_str(self.num)
        if self.den.is_one():
            return n
        d = _poly_str(self.den)
        if len(self.num) > 1 or "/" in n:
            n = f"({n})"
        if len(self.den) > 1 or "*" in d:
            d = f"({d})"
        return f"{n}/{d}"

    def __repr__(self):
        return f"Scalar('{self}')"

    # immutable: copies share, pickles go through the canonical text
    def __copy__(self):
        return self

    def __deepcopy__(self, memo):
        return self

    def __reduce__(self):
        return (parse, (str(self),))


def _min_exp(p, name):
    names = p.context().names()
    if name not in names or p.is_zero():
        return 0
    i = names.index(name)
    return min(m[i] for m in p.monoms())


def _poly_key(p):
    out = []
    for m, c in zip(p.monoms(), p.coeffs()):
        m = tuple(m)
        while m and m[-1] == 0:
            m = m[:-1]
        out.append((m, int(c.p), int(c.q)))
    return tuple(sorted(out))


def _subst_rational(num, den, rats, ctx):
    # homogenise each bound variable with a common exponent so the b^D factors cancel
    dn, dd = num.degrees(), den.degrees()
    top = {i: max(dn[i], dd[i], 0) for i in rats}
    cache: dict = {}

    def power(i, which, k):
        key = (i, which, k)
        if key not in cache:
            base = rats[i][which]
            cache[key] = base ** k
        return cache[key]

    def run(p):
        total = ctx.from_dict({})
        for m, c in zip(p.monoms(), p.coeffs()):
            rest = list(m)
            term = None
            for i in rats:
                e = m[i]
                rest[i] = 0
                f = power(i, 0, e) * power(i, 1, top[i] - e)
                term = f if term is None else term * f
            mono = ctx.from_dict({tuple(rest): c})
            total = total + mono * term
        return total

    return run(num), run(den)


def _poly_str(p) -> str:
    if p.is_zero():
        return "0"
    names = p.context().names()
    parts = []
    for m, c in zip(p.monoms(), p.coeffs()):
        factors = []
        for i, e in enumerate(m):
            if e == 0:
                continue
            name = names[i]
            if name == "v":
                qe, r = divmod(e, 2)
                if qe:
                    factors.append("q" if qe == 1 else f"q^{qe}")
                if r:
                    factors.append("v")
                continue
            root = REGISTRY.root(name)
            if root == 1:
                factors.append(name if e == 1 else f"{name}^{e}")
            else:
                fr = Fraction(e, root)
                if fr.denominator == 1:
                    factors.append(name if fr == 1 else f"{name}^{fr.numerator}")
                else:
                    factors.append(f"{name}^({fr})")
        mono = "*".join(factors)
        neg = c < 0
        a = -c if neg else c
        if not mono:
            body = str(a)
        elif a == 1:
            body = mono
        else:
            body = f"{a}*{mono}"
        parts.append((neg, body))
    out = ("-" if parts[0][0] else "") + parts[0][1]
    for neg, body in parts[1:]:
        out += (" - " if neg else " + ") + body
    return out


# ---------------------------------------------------------------------------
# parsing

_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z_0-9]*)|(\*\*|[-+*/^()]))")


def _tokenize(text: str) -> list[tuple[str, str]]:
    pos, out = 0, []
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected character at {pos} in {text!r}")
        if m.group(1):
            out.append(("num", m.group(1)))
        elif m.group(2):
            out.append(("id", m.group(2)))
        else:
            op = m.group(3)
            out.append(("op", "^" if op == "**" else op))
        pos = m.end()
    return out


class _Parser:
    def __init__(self, text: str, declare_new: bool):
        self.toks = _tokenize(text)
        self.i = 0
        self.text = text
        self.declare_new = declare_new

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else (None, None)

    def take(self, kind=None, val=None):
        tok = self.peek()
        if tok[0] is None or (kind and tok[0] != kind) or (val and tok[1] != val):
            raise ParseError(f"unexpected {tok[1]!r} in {self.text!r}")
        self.i += 1
        return tok

    def parse(self) -> Scalar:
        if not self.toks:
            raise ParseError("empty expression")
        s = self.expr()
        if self.i != len(self.toks):
            raise ParseError(f"trailing input in {self.text!r}")
        return s

    def expr(self):
        s = self.term()
        while self.peek() in (("op", "+"), ("op", "-")):
            op = self.take()[1]
            t = self.term()
            s = s + t if op == "+" else s - t
        return s

    def term(self):
        s = self.unary()
        while self.peek() in (("op", "*"), ("op", "/")):
            op = self.take()[1]
            t = self.unary()
            s = s * t if op == "*" else s / t
        return s

    def unary(self):
        if self.peek() == ("op", "-"):
            self.take()
            return -self.unary()
        if self.peek() == ("op", "+"):
            self.take()
            return self.unary()
        return self.power()

    def power(self):
        base, bare = self.atom()
        if self.peek() != ("op", "^"):
            return base
        self.take()
        sign = 1
        while self.peek() in (("op", "-"), ("op", "+")):
            if self.take()[1] == "-":
                sign = -sign
        if self.peek() == ("op", "("):
            self.take()
            e = self.expr()
            self.take("op", ")")
            if not e.is_constant():
                raise ParseError("exponent must be a rational constant")
            exp = e.to_fraction()
        else:
            exp = Fraction(int(self.take("num")[1]))
        exp *= sign
        if exp.denominator == 1:
            return base ** int(exp)
        if bare is None or REGISTRY.root(bare) % exp.denominator:
            raise ParseError(f"fractional power needs a root-declared variable: {self.text!r}")
        k = exp * REGISTRY.root(bare)
        return _root_power(bare, int(k))

    def atom(self):
        kind, val = self.peek()
        if kind == "num":
            self.take()
            return Scalar(int(val)), None
        if kind == "id":
            self.take()
            if val == "q":
                return Scalar.var("v") ** 2, None
            if val not in REGISTRY:
                if not self.declare_new:
                    raise ParseError(f"undeclared variable {val!r}")
                REGISTRY.declare(val)
            root = REGISTRY.root(val)
            if root == 1:
                return Scalar.var(val), val
            return _root_power(val, root), val
        if (kind, val) == ("op", "("):
            self.take()
            s = self.expr()
            self.take("op", ")")
            return s, None
        raise ParseError(f"unexpected {val!r} in {self.text!r}")


def _root_power(name: str, k: int) -> Scalar:
    """The internal symbol of a root-declared variable stands for name^(1/root)."""
    return Scalar.var(name) ** k


def parse(text: str, declare_new: bool = True) -> Scalar:
    """Parse the num/den grammar produced by str(Scalar); q means v^2."""
    return _Parser(text, declare_new).parse()


def S(value) -> Scalar:
    """Coerce int, Fraction, str or Scalar to a Scalar."""
    return value if isinstance(value, Scalar) else Scalar(value)


def v() -> Scalar:
    return Scalar.var("v")


def q() -> Scalar:
    return Scalar.var("v") ** 2


def qint(n: int, base: Scalar | None = None) -> Scalar:
    """Quantum integer [n] = (q^n - q^-n)/(q - q^-1) in base q (default q = v^2)."""
    qq = base if base is not None else q()
    return (qq ** n - qq ** (-n)) / (qq - qq ** (-1))


ZERO = Scalar(0)
ONE = Scalar(1)
