"""K-matrices: the finite quasi K-matrix, spectral K(z), the dual K-tilde(z),
the tensor K-matrix and reflection-equation residuals."""

from __future__ import annotations

from dataclasses import dataclass

from .errors import DatumMismatch, SolverDegenerate, SolverInconsistent, UnsupportedTwist
from .linalg import Matrix, embed, inverse, kron, solve_intertwiner, swap_legs
from .qsp import SatakeDatum, psi_rep, twist_identification
from .reps import E, Rep, coproduct, tensor_rep
from .rmatrix import SPECTRAL, SpectralOperator, spectral_R
from .scalar import ONE, ZERO, Scalar, S


@dataclass(frozen=True)
class BoundaryOperator:
    K: SpectralOperator | Matrix
    kind: str
    satake: SatakeDatum
    anchor: str = ""


# ---------------------------------------------------------------------------
# finite type

def quasi_K_finite(V: Rep, sd: SatakeDatum) -> Matrix:
    """Upsilon_V = sum_n c_n E^n with c_0 = 1 and Upsilon b = psi(b) Upsilon on V, solved grade by grade."""
    dat = V.datum
    if dat.affine or dat.rank != 1:
        raise SolverInconsistent("quasi_K_finite is implemented for finite A1")
    i = dat.nodes[0]
    Ev = V.gens[E(i)]
    top = V.dim - 1
    terms = [Ev ** n for n in range(top + 1)]
    psi = sd.psi()
    pairs = []
    for name, b in sd.generators().items():
        pairs.append((V.act(b), V.act(b.map_gens(lambda g: psi[g]))))
    coeffs = [ONE]

    def residual(cs, A, B):
        U = _combine(terms, cs)
        return U * A - B * U

    for n in range(1, top + 1):
        c = None
        for A, B in pairs:
            r0 = residual(coeffs + [ZERO] * (top - n + 1), A, B)
            r1 = residual(coeffs + [ONE] + [ZERO] * (top - n), A, B)
            for r, col in ((r, c) for r in range(V.dim) for c in range(V.dim)
                           if V.weights[r][0] - V.weights[c][0] == 2 * (n - 1)):
                beta = r1[r, col] - r0[r, col]
                if beta.is_zero():
                    if not r0[r, col].is_zero():
                        raise SolverInconsistent(f"grade {n} of the quasi K-matrix has no solution")
                    continue
                cand = -r0[r, col] / beta
                if c is None:
                    c = cand
                elif c != cand:
                    raise SolverInconsistent(f"grade {n} of the quasi K-matrix has no solution")
        if c is None:
            raise SolverDegenerate(f"grade {n} of the quasi K-matrix is not determined")
        coeffs.append(c)
    U = _combine(terms, coeffs).with_legs(V.legs)
    for A, B in pairs:
        if not (U * A - B * U).is_zero():
            raise SolverInconsistent("quasi K-matrix fails the intertwining relation")
    return U


def _combine(terms, coeffs):
    out = None
    for t, c in zip(terms, coeffs):
        if c.is_zero():
            continue
        m = t.scale(c)
        out = m if out is None else out + m
    return out if out is not None else Matrix.zeros(terms[0].rows)


def quasi_K_residuals(U: Matrix, V: Rep, sd: SatakeDatum) -> dict[str, Matrix]:
    psi = sd.psi()
    return {name: U * V.act(b) - V.act(b.map_gens(lambda g: psi[g])) * U for name, b in sd.generators().items()}


# ---------------------------------------------------------------------------
# spectral

def _twisted_targets(V: Rep, sd: SatakeDatum, z: Scalar, route: str) -> list[tuple[Matrix, Matrix]]:
    gens = sd.generators()
    if route == "operational":
        tw = twist_identification(sd, V)
        zi = z.inverse()
        return [(V.act(b, z), tw.G * V.act(b, zi) * tw.Ginv) for b in gens.values()]
    if route == "explicit":
        psi = sd.psi()
        return [(V.act(b, z), V.act(b.map_gens(lambda g: psi[g]), z)) for b in gens.values()]
    raise ValueError(f"unknown route {route!r}")


def solve_spectral_K(V: Rep, sd: SatakeDatum, route: str = "auto", var: str = SPECTRAL) -> SpectralOperator:
    """Solve K(z) pi_{V,z}(b) = pi_{V,z}(psi(b)) K(z) for the coideal generators b.

    route 'operational' uses pi_{V,z}(psi(b)) = G pi_{V,1/z}(b) G^-1; 'explicit' applies psi
    to the generators; 'auto' tries the first and falls back to the second.
    """
    if V.datum != sd.datum:
        raise DatumMismatch(f"{V.label} is not over the datum of {sd.label}")
    z = Scalar.var(var)
    if route == "auto":
        try:
            pairs = _twisted_targets(V, sd, z, "operational")
            route = "operational"
        except UnsupportedTwist:
            pairs = _twisted_targets(V, sd, z, "explicit")
            route = "explicit"
    else:
        pairs = _twisted_targets(V, sd, z, route)
    sols = solve_intertwiner(pairs, V.dim, V.dim)
    if len(sols) != 1:
        raise SolverDegenerate(f"K-matrix solution space on {V.label} has dimension {len(sols)}")
    Km = sols[0]
    k = next((k for k in range(V.dim) if not Km[k, k].is_zero()), None)
    if k is None:
        raise SolverDegenerate("K-matrix has zero diagonal")
    Km = Km.scale(Km[k, k].inverse()).with_legs(V.legs)
    return SpectralOperator(Km, var, f"K[{k},{k}] = 1 ({route})", V.legs, "single leg")


def dual_K(K: SpectralOperator, Dbar: Matrix, p) -> SpectralOperator:
    """K-tilde(z) = Dbar K(p z)^-1."""
    p = S(p)
    z = Scalar.var(K.var)
    Kt = (Dbar * inverse(K.at(p * z))).with_legs(K.mat.legs)
    return SpectralOperator(Kt, K.var, f"Dbar K(pz)^-1, p = {p}", K.legdims, "single leg")


def psi_R(X: Rep, Y: Rep, sd: SatakeDatum, route: str = "operational") -> SpectralOperator:
    """R_{X^psi, Y}(z): by conjugating R_{X,Y} with G_X, or by solving on the explicit twisted module."""
    if route == "operational":
        tw = twist_identification(sd, X)
        G = kron(tw.G, Matrix.identity(Y.dim)).with_legs(X.legs + Y.legs)
        Gi = kron(tw.Ginv, Matrix.identity(Y.dim)).with_legs(X.legs + Y.legs)
        R = spectral_R(X, Y)
        return SpectralOperator(G * R.mat * Gi, R.var, "Ad(G (x) 1) R", R.legdims)
    return spectral_R(_psi_module(sd, X), Y)


_PSI_CACHE: dict = {}


def _psi_module(sd: SatakeDatum, X: Rep) -> Rep:
    key = (id(sd), id(X))
    if key not in _PSI_CACHE:
        _PSI_CACHE[key] = (sd, X, psi_rep(sd, X))
    return _PSI_CACHE[key][2]


def tensor_K(M: Rep, V: Rep, KV: SpectralOperator, sd: SatakeDatum, route: str = "operational") -> SpectralOperator:
    """Tensor K-matrix on M (x) V: flip R_{V^psi,M}(z) flip (1 (x) K_V(z)) R_{M,V}(z)."""
    if M.datum != V.datum:
        raise DatumMismatch("tensor K over different data")
    Rp = psi_R(V, M, sd, route).mat
    R = spectral_R(M, V).mat
    legs = M.legs + V.legs
    P = swap_legs(Rp, V.dim, M.dim).with_legs(legs)
    K2 = kron(Matrix.identity(M.dim), KV.mat).with_legs(legs)
    return SpectralOperator((P * K2 * R).with_legs(legs), KV.var, f"tensor K ({route})", legs, "K on leg 2")


def tensor_K_intertwining(TK: SpectralOperator, M: Rep, V: Rep, sd: SatakeDatum) -> dict[str, Matrix]:
    """Residual of TK(z) Delta_z(b) = (id (x) psi)(Delta(b))_z TK(z) on M (x) V_z for coideal generators b."""
    z = Scalar.var(TK.var)
    psi = sd.psi()
    out = {}
    for name, b in sd.generators().items():
        d = coproduct(b)
        lhs = TK.mat * M.act2(V, d, None, z)
        tw = d.map_legs(None, lambda x: x.map_gens(lambda g: psi[g]))
        out[name] = lhs - M.act2(V, tw, None, z) * TK.mat
    return out


def tensor_K_coproduct_residual(M: Rep, V: Rep, W: Rep, sd: SatakeDatum, y, z) -> Matrix:
    """(id (x) Delta_{z/y})(TK(y)) - TK(z)_13 (R^psi(yz))_23 TK(y)_12 on M (x) V_y (x) W_z, J = 1."""
    y, z = S(y), S(z)
    VW = tensor_rep(V, W, ratio=z / y)
    K_VW = solve_spectral_K(VW, sd, route="explicit")
    lhs = tensor_K(M, VW, K_VW, sd, route="explicit").at(y)
    KV, KW = solve_spectral_K(V, sd), solve_spectral_K(W, sd)
    dims = (M.dim, V.dim, W.dim)
    T12 = embed(tensor_K(M, V, KV, sd).at(y), (1, 2), dims)
    T13 = embed(tensor_K(M, W, KW, sd).at(z), (1, 3), dims)
    R23 = embed(psi_R(V, W, sd).at(y * z), (2, 3), dims)
    rhs = T13 * R23 * T12
    c = next((a / b for a, b in zip(lhs.entries, rhs.entries) if not b.is_zero()), ONE)
    return lhs - rhs.scale(c)


# ---------------------------------------------------------------------------
# reflection equations

def _G(V: Rep, sd: SatakeDatum | None, mode: str) -> tuple[Matrix, Matrix]:
    if mode == "untwisted" or sd is None:
        I = Matrix.identity(V.dim)
        return I, I
    tw = twist_identification(sd, V)
    return tw.G, tw.Ginv


def verify_reflection(KV: SpectralOperator, KW: SpectralOperator, V: Rep, W: Rep,
                      sd: SatakeDatum | None = None, mode: str = "untwisted", y="y", z="z",
                      R_VW: SpectralOperator | None = None, R_WV: SpectralOperator | None = None) -> Matrix:
    """LHS - RHS of the spectral reflection equation on V_y (x) W_z.

    untwisted: flip R_WV(z/y) flip K_W(z)_2 R_VW(yz) K_V(y)_1 = K_V(y)_1 flip R_WV(yz) flip K_W(z)_2 R_VW(z/y)
    twisted:   R_{W^psi,V^psi}, R_{V^psi,W}, R_{W^psi,V} in place of the first three R factors.
    """
    y, z = S(y), S(z)
    R_VW = R_VW or spectral_R(V, W)
    R_WV = R_WV or spectral_R(W, V)
    legs = V.legs + W.legs
    GV, GVi = _G(V, sd, mode)
    GW, GWi = _G(W, sd, mode)
    I_V, I_W = Matrix.identity(V.dim), Matrix.identity(W.dim)

    def fl(X):
        return swap_legs(X, W.dim, V.dim).with_legs(legs)

    def ad(A, B, X):
        return (A * X * B).with_legs(legs)

    K1 = kron(KV.at(y), I_W).with_legs(legs)
    K2 = kron(I_V, KW.at(z)).with_legs(legs)
    # psi on both legs of R_WV, on the V leg of R_VW, on the W leg of R_WV
    a = ad(kron(GV, GW), kron(GVi, GWi), fl(R_WV.at(z / y)))
    b = ad(kron(GV, I_W), kron(GVi, I_W), R_VW.at(y * z))
    c = ad(kron(I_V, GW), kron(I_V, GWi), fl(R_WV.at(y * z)))
    d = R_VW.at(z / y)
    return a * K2 * b * K1 - K1 * c * K2 * d


def rtilde_op(R: SpectralOperator, Dbar_second: Matrix, p, w) -> Matrix:
    """R-tilde_{X,Y}(w) = Ad(1 (x) Dbar_Y)(R_{X,Y}(p^2 w)^-1)."""
    p, w = S(p), S(w)
    legs = R.mat.legs
    D = kron(Matrix.identity(legs[0]), Dbar_second).with_legs(legs)
    return D * inverse(R.at(p ** 2 * w)) * inverse(D)


def verify_dual_reflection(KtV: SpectralOperator, KtW: SpectralOperator, V: Rep, W: Rep,
                           DbarV: Matrix, DbarW: Matrix, p, y="y", z="z") -> Matrix:
    """LHS - RHS of the dual reflection equation on V_y (x) W_z:

    R_VW(z/y)^-1 Kt_W(z)_2 (Rt_WV(yz))_21 Kt_V(y)_1 = Kt_V(y)_1 Rt_VW(yz) Kt_W(z)_2 (R_WV(z/y)^-1)_21
    """
    y, z = S(y), S(z)
    R_VW, R_WV = spectral_R(V, W), spectral_R(W, V)
    legs = V.legs + W.legs
    I_V, I_W = Matrix.identity(V.dim), Matrix.identity(W.dim)

    def fl(X):
        return swap_legs(X, W.dim, V.dim).with_legs(legs)

    K1 = kron(KtV.at(y), I_W).with_legs(legs)
    K2 = kron(I_V, KtW.at(z)).with_legs(legs)
    lhs = inverse(R_VW.at(z / y)) * K2 * fl(rtilde_op(R_WV, DbarV, p, y * z)) * K1
    rhs = K1 * rtilde_op(R_VW, DbarW, p, y * z) * K2 * fl(inverse(R_WV.at(z / y)))
    return lhs - rhs
