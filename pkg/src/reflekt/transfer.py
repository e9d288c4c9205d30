"""Boundary transfer matrices, Hamiltonians, finite-type transfer maps and balance data."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .errors import AxiomFailure, ShapeMismatch
from .kmatrix import dual_K, psi_R, quasi_K_finite, solve_spectral_K
from .linalg import Matrix, embed, inverse, kron, mat_product, nullspace, partial_trace, swap_legs
from .qsp import SatakeDatum, coideal_action, psi_rep, twist_identification
from .reps import E, Elem, Rep, antipode, qv, sovereign_ops, tensor_rep
from .rmatrix import SPECTRAL, R_finite, SpectralOperator, spectral_R
from .scalar import ONE, Scalar, S


@dataclass(eq=False)
class TransferMatrix:
    mat: Matrix
    aux: str
    quantum: tuple[str, ...]
    boundary: str = ""
    var: str = SPECTRAL
    _at: dict = field(default_factory=dict, repr=False)

    def at(self, arg) -> Matrix:
        arg = S(arg)
        if arg not in self._at:
            self._at[arg] = self.mat.substitute({self.var: arg}).with_legs(self.mat.legdims)
        return self._at[arg]


def _boundary(W: Rep, sd: SatakeDatum, K: SpectralOperator | None, Kt: SpectralOperator | None):
    if K is None:
        K = solve_spectral_K(W, sd)
    if Kt is None:
        ops = sovereign_ops(W, sd.shift)
        Kt = dual_K(K, ops.Dbar, sd.shift.p)
    return K, Kt


def transfer_factors(Vs: Sequence[Rep], W: Rep, sd: SatakeDatum, K: SpectralOperator | None = None,
                     Kt: SpectralOperator | None = None, route: str = "operational") -> list[Matrix]:
    """The ordered factors Kt_{a} R^psi_{a,N} ... R^psi_{a,1} K_a R_{1,a} ... R_{N,a}, aux leg a = N+1."""
    K, Kt = _boundary(W, sd, K, Kt)
    n = len(Vs)
    dims = tuple(V.dim for V in Vs) + (W.dim,)
    a = n + 1
    out = [embed(Kt.mat, (a,), dims)]
    for i in range(n, 0, -1):
        out.append(embed(psi_R(W, Vs[i - 1], sd, route).mat, (a, i), dims))
    out.append(embed(K.mat, (a,), dims))
    for i in range(1, n + 1):
        out.append(embed(spectral_R(Vs[i - 1], W).mat, (i, a), dims))
    return out


def build_transfer(Vs: Sequence[Rep], W: Rep, sd: SatakeDatum, K: SpectralOperator | None = None,
                   Kt: SpectralOperator | None = None, bindings: Mapping | None = None,
                   route: str = "operational") -> TransferMatrix:
    """t^{(W)}(z) = Tr_W[Kt_W(z) R_{W^psi,V}(z)_{21} K_W(z) R_{V,W}(z)] on V_1 (x) ... (x) V_N.

    bindings (not involving the spectral variable) are substituted into the factors first;
    this is how specialized-exact runs keep the cost down.
    """
    factors = transfer_factors(Vs, W, sd, K, Kt, route)
    if bindings:
        factors = [f.substitute(dict(bindings)).with_legs(f.legdims) for f in factors]
    M = mat_product(*factors)
    t = partial_trace(M, len(Vs) + 1)
    if not Vs:
        t = t.with_legs((1,))
    return TransferMatrix(t, W.label, tuple(V.label for V in Vs), "K, Dbar K(pz)^-1")


def commutator_check(t1: Matrix, t2: Matrix) -> Matrix:
    if t1.shape != t2.shape:
        raise ShapeMismatch(f"{t1.shape} vs {t2.shape}")
    return t1 * t2 - t2 * t1


def _proportional(lhs: Matrix, rhs: Matrix) -> tuple[Matrix, Scalar]:
    c = next((a / b for a, b in zip(lhs.entries, rhs.entries) if not b.is_zero()), None)
    if c is None:
        return lhs - rhs, ONE
    return lhs - rhs.scale(c), c


def multiplicativity_check(V: Rep, W: Rep, quantum: Sequence[Rep], sd: SatakeDatum, ratio="x",
                           bindings: Mapping | None = None) -> tuple[Matrix, Scalar]:
    """t^{(V (x) W_x)}(z) against t^{(V)}(z) t^{(W)}(x z), projectively; returns (residual, scale)."""
    x = S(ratio)
    xb = x.substitute(dict(bindings)) if bindings else x
    s = Scalar.var(SPECTRAL)
    U = tensor_rep(V, W, ratio=x)
    tU = build_transfer(quantum, U, sd, bindings=bindings, route="explicit").mat
    tV = build_transfer(quantum, V, sd, bindings=bindings).mat
    tW = build_transfer(quantum, W, sd, bindings=bindings).at(xb * s)
    return _proportional(tU, tV * tW)


def order_swap_check(V: Rep, W: Rep, quantum: Sequence[Rep], sd: SatakeDatum, ratio="x",
                     bindings: Mapping | None = None) -> tuple[Matrix, Scalar]:
    """t^{(V (x) W_x)}(z) against t^{(W (x) V_{1/x})}(x z), both built independently."""
    x = S(ratio)
    xb = x.substitute(dict(bindings)) if bindings else x
    s = Scalar.var(SPECTRAL)
    t1 = build_transfer(quantum, tensor_rep(V, W, ratio=x), sd, bindings=bindings, route="explicit").mat
    t2 = build_transfer(quantum, tensor_rep(W, V, ratio=x.inverse()), sd, bindings=bindings,
                        route="explicit").at(xb * s)
    return _proportional(t1, t2)


# ---------------------------------------------------------------------------
# Hamiltonian

def hamiltonian(Vs: Sequence[Rep], sd: SatakeDatum, aux: Rep | None = None) -> Matrix:
    """H = d/dz t(z) at z = 1 with its trace part removed."""
    W = aux if aux is not None else Vs[0]
    t = build_transfer(Vs, W, sd)
    d = t.mat.derivative(t.var).substitute({t.var: 1})
    n = d.rows
    shift = d.trace() / S(n)
    return (d - Matrix.identity(n).scale(shift)).with_legs(d.legdims)


def transfer_at_one(Vs: Sequence[Rep], sd: SatakeDatum, aux: Rep | None = None) -> Matrix:
    W = aux if aux is not None else Vs[0]
    return build_transfer(Vs, W, sd).at(1)


def _site_states(index: int, dims: Sequence[int]) -> list[int]:
    out = []
    for d in reversed(dims):
        out.append(index % d)
        index //= d
    return out[::-1]


def hamiltonian_structure(H: Matrix, Vs: Sequence[Rep]) -> dict[str, bool]:
    """Nearest-neighbour-plus-diagonal-boundary checks on a chain Hamiltonian."""
    dims = [V.dim for V in Vs]
    n = H.rows
    weights = []
    for k in range(n):
        st = _site_states(k, dims)
        weights.append(sum(Vs[i].weights[s][0] for i, s in enumerate(st)))
    nn = True
    conserving = True
    hops: dict[int, set] = {}
    for r in range(n):
        for c in range(n):
            x = H[r, c]
            if r == c or x.is_zero():
                continue
            a, b = _site_states(r, dims), _site_states(c, dims)
            diff = [i for i in range(len(dims)) if a[i] != b[i]]
            if len(diff) != 2 or diff[1] != diff[0] + 1:
                nn = False
            else:
                hops.setdefault(diff[0], set()).add(x)
            if weights[r] != weights[c]:
                conserving = False
    uniform = all(len(v) == 1 for v in hops.values()) and len({next(iter(v)) for v in hops.values()}) <= 1
    return {
        "nonscalar": not H.is_scalar(),
        "nearest_neighbour": nn,
        "weight_conserving": conserving,
        "uniform_hopping": uniform,
        "off_diagonal_present": bool(hops) or len(dims) == 1,
    }


def hermiticity_residual(H: Matrix, bindings: Mapping[str, Scalar]) -> tuple[Matrix, Scalar]:
    """H^t after the substitution (e.g. v -> 1/v, xi -> 1/xi) against H, projectively."""
    Ht = H.T.substitute(dict(bindings))
    return _proportional(Ht, H)


# ---------------------------------------------------------------------------
# finite type

@dataclass(frozen=True)
class BalanceData:
    c: Scalar
    u: Matrix
    b: Matrix


def ribbon_scalar(V: Rep, lam: Sequence[int]) -> Scalar:
    dat = V.datum
    two_rho = tuple(2 * r for r in dat.rho)
    return qv(-dat.pairing(lam, tuple(a + b for a, b in zip(lam, two_rho))))


def _highest_vectors(T: Rep) -> list[tuple[tuple[int, ...], Matrix]]:
    """Pairs (weight, vector) spanning ker Delta(E_i) on each weight space of T."""
    dat = T.datum
    out = []
    for mu in sorted(set(T.weights), reverse=True):
        idx = [k for k, w in enumerate(T.weights) if w == mu]
        cols = []
        for i in dat.nodes:
            Ei = T.gens[E(i)]
            cols.append(Matrix.from_rows([[Ei[r, k] for k in idx] for r in range(T.dim)]))
        stacked = Matrix(sum(c.rows for c in cols), len(idx), [x for c in cols for x in c.entries])
        for vec in nullspace(stacked):
            full = Matrix.zeros(T.dim, 1)
            for j, k in enumerate(idx):
                full.entries[k] = vec.entries[j]
            out.append((mu, full))
    return out


def balance_data(V: Rep) -> BalanceData:
    """c = q^{-(l, l + 2 rho)}, u = D c^-1, b = c Id, guarded by the Delta(b) check on V (x) V."""
    lam = V.highest
    if lam is None:
        raise AxiomFailure(f"{V.label} has no recorded highest weight")
    c = ribbon_scalar(V, lam)
    D = sovereign_ops(V).D
    u = D.scale(c.inverse())
    b = Matrix.identity(V.dim).scale(c).with_legs(V.legs)
    _check_balance_coproduct(V, b)
    return BalanceData(c, u, b)


def _check_balance_coproduct(V: Rep, b: Matrix) -> None:
    T = tensor_rep(V, V)
    R = R_finite(V, V)
    R21 = swap_legs(R, V.dim, V.dim)
    bb = kron(b, b) * inverse(R21 * R)
    for name, g in T.gens.items():
        if not (bb * g - g * bb).is_zero():
            raise AxiomFailure(f"(b (x) b)(R21 R)^-1 does not commute with Delta({name})")
    for mu, vec in _highest_vectors(T):
        want = ribbon_scalar(V, mu)
        if not (bb * vec - vec.scale(want)).is_zero():
            raise AxiomFailure(f"(b (x) b)(R21 R)^-1 is not q^-(m,m+2rho) on the highest weight {mu}")


def drinfeld_square_residuals(V: Rep, u: Matrix) -> dict[str, Matrix]:
    ui = inverse(u)
    return {name: u * V.gens[name] * ui - V.act(antipode(antipode(Elem.gen(name)))) for name in V.gens}


def finite_tensor_K(M: Rep, V: Rep, sd: SatakeDatum, variant: str = "dualK") -> Matrix:
    """dualK: (1 (x) D_V U_V^-1) flip R_{V^psi,M} flip (1 (x) U_V) R_{M,V};
    kolb:  flip R_{V,M} flip (1 (x) g_V U_V) R_{M,V} with g_V psi(x)_V = x_V g_V."""
    U = quasi_K_finite(V, sd)
    R = R_finite(M, V)
    I_M = Matrix.identity(M.dim)
    legs = M.legs + V.legs
    if variant == "dualK":
        Rp = R_finite(psi_rep(sd, V), M)
        D = sovereign_ops(V).D
        left = kron(I_M, D * inverse(U))
        return (left * swap_legs(Rp, V.dim, M.dim) * kron(I_M, U) * R).with_legs(legs)
    if variant == "kolb":
        g = twist_identification(sd, V).Ginv
        KBK = g * U
        Rvm = R_finite(V, M)
        return (swap_legs(Rvm, V.dim, M.dim) * kron(I_M, KBK) * R).with_legs(legs)
    raise ValueError(f"unknown variant {variant!r}")


def finite_transfer(V: Rep, sd: SatakeDatum, variant: str, probe: Rep) -> Matrix:
    """Action of the finite transfer element t^{(V)} on the probe module."""
    TK = finite_tensor_K(probe, V, sd, variant)
    if variant == "kolb":
        u = balance_data(V).u
        TK = kron(Matrix.identity(probe.dim), u).with_legs(TK.legdims) * TK
    return partial_trace(TK, 2).with_legs(probe.legs)


def centrality_residuals(t: Matrix, probe: Rep, sd: SatakeDatum) -> dict[str, Matrix]:
    return {name: t * B - B * t for name, B in coideal_action(sd, probe).items()}
