"""Dense exact matrices over Scalar with tensor-leg bookkeeping.

Legs are numbered from 1, matching the usual subscript notation R_12, K_2.
"""

from __future__ import annotations

from itertools import product
from math import prod
from typing import Callable, Iterable, Sequence

from .errors import LegMismatch, ShapeMismatch, Singular
from .scalar import ONE, ZERO, Scalar, S


class Matrix:
    __slots__ = ("rows", "cols", "entries", "legdims")

    def __init__(self, rows: int, cols: int, entries: Sequence[Scalar], legdims: Sequence[int] | None = None):
        if rows * cols != len(entries):
            raise ShapeMismatch(f"{rows}x{cols} needs {rows * cols} entries, got {len(entries)}")
        self.rows = rows
        self.cols = cols
        self.entries = list(entries)
        if legdims is not None:
            legdims = tuple(legdims)
            if prod(legdims) != rows:
                raise LegMismatch(f"legdims {legdims} do not multiply to {rows}")
        self.legdims = legdims

    # -- constructors -------------------------------------------------------
    @classmethod
    def identity(cls, n: int, legdims=None) -> "Matrix":
        ent = [ZERO] * (n * n)
        for i in range(n):
            ent[i * n + i] = ONE
        return cls(n, n, ent, legdims)

    @classmethod
    def zeros(cls, rows: int, cols: int | None = None, legdims=None) -> "Matrix":
        cols = rows if cols is None else cols
        return cls(rows, cols, [ZERO] * (rows * cols), legdims)

    @classmethod
    def diag(cls, values: Iterable, legdims=None) -> "Matrix":
        vals = [S(x) for x in values]
        n = len(vals)
        ent = [ZERO] * (n * n)
        for i, x in enumerate(vals):
            ent[i * n + i] = x
        return cls(n, n, ent, legdims)

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence], legdims=None) -> "Matrix":
        r = len(rows)
        c = len(rows[0]) if r else 0
        ent = [S(x) for row in rows for x in row]
        return cls(r, c, ent, legdims)

    @classmethod
    def unit(cls, rows: int, cols: int, i: int, j: int) -> "Matrix":
        m = cls.zeros(rows, cols)
        m.entries[i * cols + j] = ONE
        return m

    # -- access ---------------------------------------------------------------
    def __getitem__(self, ij) -> Scalar:
        i, j = ij
        return self.entries[i * self.cols + j]

    def tolist(self) -> list[list[Scalar]]:
        c = self.cols
        return [self.entries[i * c:(i + 1) * c] for i in range(self.rows)]

    def to_strings(self) -> list[list[str]]:
        return [[str(x) for x in row] for row in self.tolist()]

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    @property
    def legs(self) -> tuple[int, ...]:
        return self.legdims if self.legdims is not None else (self.rows,)

    def with_legs(self, legdims) -> "Matrix":
        return Matrix(self.rows, self.cols, self.entries, legdims)

    def is_zero(self) -> bool:
        return all(x.is_zero() for x in self.entries)

    def nonzero_count(self) -> int:
        return sum(1 for x in self.entries if not x.is_zero())

    def is_diagonal(self) -> bool:
        c = self.cols
        return all(x.is_zero() for k, x in enumerate(self.entries) if k // c != k % c)

    def is_scalar(self) -> bool:
        if self.rows != self.cols or not self.is_diagonal():
            return False
        d = self.diagonal()
        return all(x == d[0] for x in d)

    def diagonal(self) -> list[Scalar]:
        return [self[i, i] for i in range(min(self.rows, self.cols))]

    def trace(self) -> Scalar:
        return Scalar.sum(self.diagonal())

    # -- arithmetic ----------------------------------------------------------
    def _same_shape(self, other):
        if self.shape != other.shape:
            raise ShapeMismatch(f"{self.shape} vs {other.shape}")

    def __add__(self, other: "Matrix") -> "Matrix":
        self._same_shape(other)
        return Matrix(self.rows, self.cols, [a + b for a, b in zip(self.entries, other.entries)], self.legdims)

    def __sub__(self, other: "Matrix") -> "Matrix":
        self._same_shape(other)
        return Matrix(self.rows, self.cols, [a - b for a, b in zip(self.entries, other.entries)], self.legdims)

    def __neg__(self) -> "Matrix":
        return Matrix(self.rows, self.cols, [-a for a in self.entries], self.legdims)

    def scale(self, c) -> "Matrix":
        c = S(c)
        return Matrix(self.rows, self.cols, [c * a for a in self.entries], self.legdims)

    def __mul__(self, other):
        if not isinstance(other, Matrix):
            return self.scale(other)
        return matmul(self, other)

    def __rmul__(self, other):
        return self.scale(other)

    def __matmul__(self, other: "Matrix") -> "Matrix":
        return matmul(self, other)

    def __pow__(self, n: int) -> "Matrix":
        out = Matrix.identity(self.rows, self.legdims)
        for _ in range(n):
            out = out * self
        return out

    def __eq__(self, other):
        if not isinstance(other, Matrix):
            return NotImplemented
        return self.shape == other.shape and all(a == b for a, b in zip(self.entries, other.entries))

    __hash__ = None

    @property
    def T(self) -> "Matrix":
        r, c = self.rows, self.cols
        return Matrix(c, r, [self.entries[i * c + j] for j in range(c) for i in range(r)], self.legdims)

    def map(self, f: Callable[[Scalar], Scalar]) -> "Matrix":
        cache: dict = {}
        out = []
        for x in self.entries:
            if x.is_zero():
                out.append(x)
                continue
            key = id(x)
            if key not in cache:
                cache[key] = (x, f(x))
            out.append(cache[key][1])
        return Matrix(self.rows, self.cols, out, self.legdims)

    def substitute(self, bindings) -> "Matrix":
        return self.map(lambda x: x.substitute(bindings))

    def derivative(self, name: str) -> "Matrix":
        return self.map(lambda x: x.derivative(name))

    def __repr__(self):
        return f"Matrix({self.rows}x{self.cols}, legs={self.legdims}, {self.to_strings()})"

    def __str__(self):
        return "\n".join("[" + ", ".join(row) + "]" for row in self.to_strings())


def matmul(A: Matrix, B: Matrix) -> Matrix:
    if A.cols != B.rows:
        raise ShapeMismatch(f"cannot multiply {A.shape} by {B.shape}")
    n, m = A.rows, B.cols
    brow = []
    for k in range(B.rows):
        row = B.entries[k * m:(k + 1) * m]
        brow.append([(j, x) for j, x in enumerate(row) if not x.is_zero()])
    out = [ZERO] * (n * m)
    for i in range(n):
        acc: dict[int, list] = {}
        arow = A.entries[i * A.cols:(i + 1) * A.cols]
        for k, a in enumerate(arow):
            if a.is_zero():
                continue
            for j, b in brow[k]:
                acc.setdefault(j, []).append(a * b)
        for j, terms in acc.items():
            out[i * m + j] = terms[0] if len(terms) == 1 else Scalar.sum(terms)
    legs = A.legdims if A.legdims is not None else B.legdims
    if legs is not None and prod(legs) != n:
        legs = None
    return Matrix(n, m, out, legs)


def mat_product(*ms: Matrix) -> Matrix:
    out = ms[0]
    for m in ms[1:]:
        out = out * m
    return out


# ---------------------------------------------------------------------------
# tensor legs

def kron(A: Matrix, B: Matrix) -> Matrix:
    r, c = A.rows * B.rows, A.cols * B.cols
    out = [ZERO] * (r * c)
    for i in range(A.rows):
        for j in range(A.cols):
            a = A[i, j]
            if a.is_zero():
                continue
            for k in range(B.rows):
                for l in range(B.cols):
                    b = B[k, l]
                    if b.is_zero():
                        continue
                    out[(i * B.rows + k) * c + j * B.cols + l] = a * b
    legs = None
    if A.rows == A.cols and B.rows == B.cols:
        legs = A.legs + B.legs
    return Matrix(r, c, out, legs)


def kron_all(*ms: Matrix) -> Matrix:
    out = ms[0]
    for m in ms[1:]:
        out = kron(out, m)
    return out


def _check_leg(M: Matrix, leg: int):
    if M.legdims is None:
        raise LegMismatch("matrix has no leg structure")
    if not 1 <= leg <= len(M.legdims):
        raise LegMismatch(f"leg {leg} out of range for legs {M.legdims}")
    if M.rows != M.cols:
        raise LegMismatch("leg operations need a square operator")


def _split(index: int, dims: Sequence[int]) -> list[int]:
    out = []
    for d in reversed(dims):
        out.append(index % d)
        index //= d
    return out[::-1]


def _join(multi: Sequence[int], dims: Sequence[int]) -> int:
    idx = 0
    for x, d in zip(multi, dims):
        idx = idx * d + x
    return idx


def partial_transpose(M: Matrix, leg: int) -> Matrix:
    _check_leg(M, leg)
    dims = M.legdims
    n = M.rows
    out = [ZERO] * (n * n)
    k = leg - 1
    for r in range(n):
        rm = _split(r, dims)
        for c in range(n):
            x = M.entries[r * n + c]
            if x.is_zero():
                continue
            cm = _split(c, dims)
            rm2, cm2 = list(rm), list(cm)
            rm2[k], cm2[k] = cm[k], rm[k]
            out[_join(rm2, dims) * n + _join(cm2, dims)] = x
    return Matrix(n, n, out, dims)


def partial_trace(M: Matrix, leg: int) -> Matrix:
    _check_leg(M, leg)
    dims = M.legdims
    k = leg - 1
    rest = dims[:k] + dims[k + 1:]
    m = prod(rest)
    acc: dict[tuple[int, int], list] = {}
    n = M.rows
    for r in range(n):
        rm = _split(r, dims)
        for c in range(n):
            x = M.entries[r * n + c]
            if x.is_zero():
                continue
            cm = _split(c, dims)
            if rm[k] != cm[k]:
                continue
            key = (_join(rm[:k] + rm[k + 1:], rest), _join(cm[:k] + cm[k + 1:], rest))
            acc.setdefault(key, []).append(x)
    out = [ZERO] * (m * m)
    for (i, j), xs in acc.items():
        out[i * m + j] = Scalar.sum(xs)
    return Matrix(m, m, out, rest if rest else (1,))


def embed(op: Matrix, legs: Sequence[int], legdims: Sequence[int]) -> Matrix:
    """Place op, acting on the given legs in the given order, into the full space.

    embed(R, (3, 1), dims) is R_{31}: R's first tensor factor sits on leg 3.
    """
    legdims = tuple(legdims)
    legs = [l - 1 for l in legs]
    sub = [legdims[l] for l in legs]
    if op.rows != prod(sub) or op.cols != prod(sub):
        raise LegMismatch(f"operator of size {op.shape} does not fit legs {legs} of {legdims}")
    others = [k for k in range(len(legdims)) if k not in legs]
    odims = [legdims[k] for k in others]
    n = prod(legdims)
    out = [ZERO] * (n * n)
    nz = [(a, b, op.entries[a * op.cols + b]) for a in range(op.rows) for b in range(op.cols)
          if not op.entries[a * op.cols + b].is_zero()]
    split_sub = {a: _split(a, sub) for a in range(op.rows)}
    for rest in product(*[range(d) for d in odims]):
        full = [0] * len(legdims)
        for k, x in zip(others, rest):
            full[k] = x
        for a, b, x in nz:
            rm = list(full)
            cm = list(full)
            for k, ia, ib in zip(legs, split_sub[a], split_sub[b]):
                rm[k] = ia
                cm[k] = ib
            out[_join(rm, legdims) * n + _join(cm, legdims)] = x
    return Matrix(n, n, out, legdims)


def flip(d1: int, d2: int) -> Matrix:
    """The tensor flip V1 (x) V2 -> V2 (x) V1 as a (d2 d1) x (d1 d2) matrix."""
    n = d1 * d2
    out = [ZERO] * (n * n)
    for i in range(d1):
        for j in range(d2):
            out[(j * d1 + i) * n + (i * d2 + j)] = ONE
    return Matrix(n, n, out, (d2, d1))


def swap_legs(op: Matrix, d1: int, d2: int) -> Matrix:
    """op_{21}: conjugate an operator on V1 (x) V2 to act on V2 (x) V1."""
    P = flip(d1, d2)
    return (P * op * P.T).with_legs((d2, d1))


# ---------------------------------------------------------------------------
# elimination

def _pick_pivot(rows: list[dict], col: int, used: set) -> int | None:
    best, best_key = None, None
    for r, row in enumerate(rows):
        if r in used:
            continue
        x = row.get(col)
        if x is None:
            continue
        key = (x.weight, len(row))
        if best_key is None or key < best_key:
            best, best_key = r, key
    return best


def _eliminate(rows: list[dict], ncols: int) -> list[tuple[int, int]]:
    """Reduced row echelon form in place; returns (col, row) pivots."""
    pivots = []
    used: set = set()
    for col in range(ncols):
        r = _pick_pivot(rows, col, used)
        if r is None:
            continue
        used.add(r)
        prow = rows[r]
        inv = prow[col].inverse()
        prow = {c: x * inv for c, x in prow.items()}
        prow[col] = ONE
        rows[r] = prow
        for k, row in enumerate(rows):
            if k == r:
                continue
            f = row.get(col)
            if f is None:
                continue
            for c, x in prow.items():
                y = row.get(c, ZERO) - f * x
                if y.is_zero():
                    row.pop(c, None)
                else:
                    row[c] = y
        pivots.append((col, r))
    return pivots


def solve_nullspace(rows: Iterable[dict], ncols: int) -> list[list[Scalar]]:
    """Basis of {x : sum_c row[c] x_c = 0 for each row}, rows given sparsely."""
    work = [dict(r) for r in rows if r]
    work = [{c: x for c, x in r.items() if not x.is_zero()} for r in work]
    work = [r for r in work if r]
    pivots = _eliminate(work, ncols)
    pivot_cols = {c: r for c, r in pivots}
    basis = []
    for f in range(ncols):
        if f in pivot_cols:
            continue
        vec = [ZERO] * ncols
        vec[f] = ONE
        for c, r in pivot_cols.items():
            x = work[r].get(f)
            if x is not None:
                vec[c] = -x
        basis.append(vec)
    return basis


def nullspace(M: Matrix) -> list[Matrix]:
    rows = []
    for i in range(M.rows):
        rows.append({j: M[i, j] for j in range(M.cols) if not M[i, j].is_zero()})
    return [Matrix(M.cols, 1, vec) for vec in solve_nullspace(rows, M.cols)]


def inverse(M: Matrix) -> Matrix:
    if M.rows != M.cols:
        raise ShapeMismatch("inverse of a non-square matrix")
    n = M.rows
    if M.is_diagonal():
        d = M.diagonal()
        if any(x.is_zero() for x in d):
            raise Singular("zero on the diagonal")
        return Matrix.diag([x.inverse() for x in d], M.legdims)
    rows = []
    for i in range(n):
        row = {j: M[i, j] for j in range(n) if not M[i, j].is_zero()}
        row[n + i] = ONE
        rows.append(row)
    pivots = _eliminate(rows, n)
    if len(pivots) < n:
        raise Singular("matrix is singular")
    out = [ZERO] * (n * n)
    for col, r in pivots:
        for c, x in rows[r].items():
            if c >= n:
                out[col * n + (c - n)] = x
    return Matrix(n, n, out, M.legdims)


def solve_intertwiner(pairs: Sequence[tuple[Matrix, Matrix]], n_out: int, n_in: int) -> list[Matrix]:
    """Basis of {X : X A = B X for all (A, B)}, X of shape n_out x n_in.

    Diagonal pairs (Cartan generators) are used first to cut the support of X.
    """
    support = [(i, j) for i in range(n_out) for j in range(n_in)]
    general = []
    for A, B in pairs:
        if A.is_diagonal() and B.is_diagonal():
            support = [(i, j) for i, j in support if A[j, j] == B[i, i]]
        else:
            general.append((A, B))
    index = {ij: k for k, ij in enumerate(support)}
    by_row: dict[int, list] = {}
    by_col: dict[int, list] = {}
    for (i, j), k in index.items():
        by_row.setdefault(i, []).append((j, k))
        by_col.setdefault(j, []).append((i, k))
    rows = []
    for A, B in general:
        # (X A)_{ij} = sum_l X_il A_lj ; (B X)_ij = sum_l B_il X_lj
        eqs: dict[tuple[int, int], dict] = {}
        for i, lst in by_row.items():
            for l, k in lst:
                for j in range(n_in):
                    a = A[l, j]
                    if a.is_zero():
                        continue
                    e = eqs.setdefault((i, j), {})
                    e[k] = e.get(k, ZERO) + a
        for j, lst in by_col.items():
            for l, k in lst:
                for i in range(n_out):
                    b = B[i, l]
                    if b.is_zero():
                        continue
                    e = eqs.setdefault((i, j), {})
                    e[k] = e.get(k, ZERO) - b
        rows.extend(eqs.values())
    basis = solve_nullspace(rows, len(support))
    out = []
    for vec in basis:
        ent = [ZERO] * (n_out * n_in)
        for (i, j), k in index.items():
            ent[i * n_in + j] = vec[k]
        out.append(Matrix(n_out, n_in, ent))
    return out
