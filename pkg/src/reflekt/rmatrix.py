"""R-matrices: kappa, the finite quasi R-matrix, spectral R(z) by intertwiner solving,
Yang-Baxter residuals and crossing symmetry."""

from __future__ import annotations

import threading
from dataclasses import dataclass, field

from .cartan import GradingShift
from .errors import SolverDegenerate, SolverInconsistent
from .linalg import Matrix, embed, inverse, kron, partial_transpose, solve_intertwiner, swap_legs
from .reps import Rep, E, F, K, dual_rep, qv, tensor_rep
from .scalar import ONE, ZERO, Scalar, S, declare

# solvers work in a private spectral variable so that modules whose
# generators already involve z, y or x can be fed back in
SPECTRAL = "_s"
declare(SPECTRAL)


def kappa(V: Rep, W: Rep) -> Matrix:
    dat = V.datum
    vals = [qv(dat.pairing(a, b)) for a in V.weights for b in W.weights]
    return Matrix.diag(vals, V.legs + W.legs)


def _opposite(V: Rep, W: Rep, name: str, z: Scalar | None = None) -> Matrix:
    """Delta^op(x) on V (x) W_z, i.e. flip . Delta(x)_{W_z, V} . flip."""
    T = tensor_rep(W.shifted(z) if z is not None else W, V)
    return swap_legs(T.gens[name], W.dim, V.dim).with_legs(V.legs + W.legs)


# ---------------------------------------------------------------------------
# finite type

def quasi_R_finite(V: Rep, W: Rep) -> Matrix:
    """Xi_{V,W} = sum_n c_n F^n (x) E^n for U_q(sl2), solved one grade at a time."""
    dat = V.datum
    if dat.affine or dat.rank != 1:
        raise SolverInconsistent("quasi_R_finite is implemented for finite A1")
    i = dat.nodes[0]
    Fv, Ew = V.gens[F(i)], W.gens[E(i)]
    top = min(V.dim, W.dim) - 1
    terms = [kron(Fv ** n, Ew ** n) for n in range(top + 1)]
    kap = kappa(V, W)
    A = tensor_rep(V, W).gens[E(i)]
    B = _opposite(V, W, E(i))
    coeffs = [ONE]

    def residual(cs):
        Xi = _combine(terms, cs)
        return kap * Xi * A - B * kap * Xi

    for n in range(1, top + 1):
        r0 = residual(coeffs + [ZERO] + [ZERO] * (top - n))
        r1 = residual(coeffs + [ONE] + [ZERO] * (top - n))
        # the part of the E-equation lowering the first-leg weight by 2(n-1) fixes c_n
        sel = [(a, b) for a in range(V.dim) for b in range(V.dim)
               if V.weights[a][0] - V.weights[b][0] == -2 * (n - 1)]
        c = None
        for a, b in sel:
            for x in range(W.dim):
                for y in range(W.dim):
                    r, col = a * W.dim + x, b * W.dim + y
                    beta = r1[r, col] - r0[r, col]
                    if not beta.is_zero():
                        cand = -r0[r, col] / beta
                        if c is None:
                            c = cand
                        elif c != cand:
                            raise SolverInconsistent(f"grade {n} of the quasi R-matrix has no solution")
        if c is None:
            raise SolverInconsistent(f"grade {n} of the quasi R-matrix is undetermined")
        coeffs.append(c)
    Xi = _combine(terms, coeffs).with_legs(V.legs + W.legs)
    R = kap * Xi
    for name in (E(i), F(i), K(i)):
        if not (R * tensor_rep(V, W).gens[name] - _opposite(V, W, name) * R).is_zero():
            raise SolverInconsistent(f"quasi R-matrix fails the {name} intertwining relation")
    return Xi


def _combine(terms, coeffs):
    out = None
    for t, c in zip(terms, coeffs):
        if c.is_zero():
            continue
        m = t.scale(c)
        out = m if out is None else out + m
    return out if out is not None else Matrix.zeros(terms[0].rows)


def R_finite(V: Rep, W: Rep) -> Matrix:
    return (kappa(V, W) * quasi_R_finite(V, W)).with_legs(V.legs + W.legs)


def intertwining_residual(R: Matrix, V: Rep, W: Rep, z: Scalar | None = None) -> dict[str, Matrix]:
    """R Delta_z(x) - Delta_z^op(x) R for every generator x."""
    T = tensor_rep(V, W, ratio=z)
    return {name: R * T.gens[name] - _opposite(V, W, name, z) * R for name in V.gens}


def ybe_residual_finite(U: Rep, V: Rep, W: Rep) -> Matrix:
    dims = (U.dim, V.dim, W.dim)
    R12 = embed(R_finite(U, V), (1, 2), dims)
    R13 = embed(R_finite(U, W), (1, 3), dims)
    R23 = embed(R_finite(V, W), (2, 3), dims)
    return R12 * R13 * R23 - R23 * R13 * R12


# ---------------------------------------------------------------------------
# spectral

@dataclass(eq=False)
class SpectralOperator:
    """Matrix rational in the variable `var`; .at(arg) substitutes var -> arg."""

    mat: Matrix
    var: str = SPECTRAL
    normalization: str = ""
    legdims: tuple[int, ...] = ()
    arg_convention: str = "second leg shifted"
    _at: dict = field(default_factory=dict, repr=False)

    def at(self, arg) -> Matrix:
        arg = S(arg)
        if arg == Scalar.var(self.var):
            return self.mat
        if arg not in self._at:
            self._at[arg] = self.mat.substitute({self.var: arg}).with_legs(self.mat.legdims)
        return self._at[arg]

    def scaled(self, f) -> "SpectralOperator":
        return SpectralOperator(self.mat.scale(S(f)), self.var, self.normalization + " rescaled",
                                self.legdims, self.arg_convention)


def spectral_R(V: Rep, W: Rep, shift: GradingShift | None = None, var: str = SPECTRAL) -> SpectralOperator:
    """Solve R(z) Delta_z(x) = Delta_z^op(x) R(z) on V (x) W_z and anchor at R(0) = kappa."""
    return ENGINE.get(V, W, var)


def _solve_spectral_R(V: Rep, W: Rep, var: str) -> SpectralOperator:
    if V.datum != W.datum:
        raise SolverInconsistent("R-matrix between modules over different data")
    z = Scalar.var(var)
    T = tensor_rep(V, W, ratio=z)
    pairs = [(T.gens[name], _opposite(V, W, name, z)) for name in V.gens]
    n = V.dim * W.dim
    basis = solve_intertwiner(pairs, n, n)
    if len(basis) != 1:
        raise SolverDegenerate(f"intertwiner space of {V.label} (x) {W.label}_z has dimension {len(basis)}")
    R = basis[0]
    low = min(x.valuation(var) for x in R.entries if not x.is_zero())
    R = R.scale(z ** (-low))
    kap = kappa(V, W)
    R0 = R.substitute({var: 0})
    anchor = next((k for k in range(n) if not R0[k, k].is_zero()), None)
    if anchor is None:
        raise SolverDegenerate("R(0) vanishes on the diagonal; no kappa anchor")
    R = R.scale(kap[anchor, anchor] / R0[anchor, anchor])
    R0 = R.substitute({var: 0})
    note = "R(0) = kappa"
    if not R0 == kap:
        note = f"R[{anchor},{anchor}](0) = kappa[{anchor},{anchor}] (R(0) != kappa)"
    return SpectralOperator(R.with_legs(V.legs + W.legs), var, note, V.legs + W.legs)


class REngine:
    """Per-(V, W) cache of solved spectral R-matrices; safe to share between threads."""

    def __init__(self):
        self._lock = threading.Lock()
        self._cache: dict = {}

    def get(self, V: Rep, W: Rep, var: str = SPECTRAL) -> SpectralOperator:
        key = (id(V), id(W), var)
        with self._lock:
            hit = self._cache.get(key)
        if hit is not None:
            return hit[2]
        R = _solve_spectral_R(V, W, var)
        with self._lock:
            # keep V and W alive so their ids stay unique
            self._cache.setdefault(key, (V, W, R))
            return self._cache[key][2]

    def clear(self):
        with self._lock:
            self._cache.clear()


ENGINE = REngine()


def ybe_residual_spectral(U: Rep, V: Rep, W: Rep, y, z) -> Matrix:
    """R12(y) R13(yz) R23(z) - R23(z) R13(yz) R12(y)."""
    y, z = S(y), S(z)
    dims = (U.dim, V.dim, W.dim)
    R12 = embed(spectral_R(U, V).at(y), (1, 2), dims)
    R13 = embed(spectral_R(U, W).at(y * z), (1, 3), dims)
    R23 = embed(spectral_R(V, W).at(z), (2, 3), dims)
    return R12 * R13 * R23 - R23 * R13 * R12


def _ratio(lhs: Matrix, rhs: Matrix) -> Scalar | None:
    for a, b in zip(lhs.entries, rhs.entries):
        if not b.is_zero():
            return a / b
    return None


def verify_crossing(R: SpectralOperator, Dbar: Matrix, p, var: str = "z") -> tuple[Matrix, Scalar]:
    """Compare (((R(z)^-1)^t2)^-1)^t2 with Ad(1 (x) Dbar^-1) R(p^-2 z).

    Returns (residual, scale) where residual = LHS - scale * RHS.
    """
    p = S(p)
    z = Scalar.var(var)
    legs = R.mat.legs
    lhs = partial_transpose(inverse(partial_transpose(inverse(R.at(z)), 2)), 2)
    one_d = kron(Matrix.identity(legs[0]), Dbar)
    # Ad(1 (x) Dbar^-1) X = (1 (x) Dbar^-1) X (1 (x) Dbar)
    rhs = inverse(one_d).with_legs(legs) * R.at(p ** -2 * z) * one_d.with_legs(legs)
    scale = _ratio(lhs, rhs)
    if scale is None:
        scale = ONE
    return lhs - rhs.scale(scale), scale


def rtilde(R: SpectralOperator, Dbar: Matrix, p, w) -> Matrix:
    """R-tilde(w) = Ad(1 (x) Dbar)(R(p^2 w)^-1)."""
    p, w = S(p), S(w)
    legs = R.mat.legs
    one_d = kron(Matrix.identity(legs[0]), Dbar).with_legs(legs)
    return one_d * inverse(R.at(p ** 2 * w)) * inverse(one_d)


def verify_rtilde_inverse(R: SpectralOperator, Dbar: Matrix, p, var: str = "w") -> tuple[Matrix, Scalar]:
    """R-tilde(w)^t2 R(w)^t2 should be a scalar multiple of Id; returns (residual, scale)."""
    w = Scalar.var(var)
    prod = partial_transpose(rtilde(R, Dbar, p, w), 2) * partial_transpose(R.at(w), 2)
    scale = prod[0, 0]
    return prod - Matrix.identity(prod.rows).scale(scale), scale


def antipode_residual(V: Rep, W: Rep, side: str = "left") -> Matrix:
    """Left dual: R_{V,*W}(z) against (R_{V,W}(z)^-1)^t2. Right dual: R_{V,W*}(z) against
    ((R_{V,W}(z))^t2)^-1. Compared projectively; returns the residual after scaling."""
    Wd = dual_rep(W, side)
    lhs = spectral_R(V, Wd).mat
    R = spectral_R(V, W).mat
    if side == "left":
        rhs = partial_transpose(inverse(R), 2)
    else:
        rhs = inverse(partial_transpose(R, 2))
    c = _ratio(lhs, rhs) or ONE
    return lhs - rhs.scale(c)


def cabling_residual(U: Rep, V: Rep, W: Rep, x) -> tuple[Matrix, Scalar]:
    """R_{U (x) V_x, W}(z) against R_{U,W}(z)_13 R_{V,W}(z/x)_23, projectively."""
    x = S(x)
    z = Scalar.var(SPECTRAL)
    UV = tensor_rep(U, V, ratio=x)
    lhs = spectral_R(UV, W).mat
    dims = (U.dim, V.dim, W.dim)
    rhs = embed(spectral_R(U, W).mat, (1, 3), dims) * embed(spectral_R(V, W).at(z / x), (2, 3), dims)
    c = _ratio(lhs, rhs) or ONE
    return lhs - rhs.scale(c), c
