"""Centroaffine codimension-2 immersions F: U -> R^4 with transversal Phi.

In the frame (F_u, F_v, F, Phi)::

    F_ij  = Gamma^k_ij F_k + T_ij F + H_ij Phi
    Phi_i = -S^k_i F_k + rho_i F + tau_i Phi

The dual pair (G, Psi) consists of the rows of the inverse frame paired
with Phi and F respectively.  Everything here is computed from jets, so the
derivatives of (G, Psi) come out of jet-level matrix inversion.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import jet as jt
from .codim1 import Domain, SurfacePatch, TransversalSpec, check_frame, orthonormal_frame, pair_jets
from .errors import DegenerateMetricError, IndefiniteMetricError, JetDomainError
from .expr import Expression, Num, as_expression
from .jet import Jet

FLAG_TOL = 1e-6


class Immersion:
    """Anything that can produce jets of (F, Phi) at a chart point."""

    domain: Domain

    def jets(self, at, order: int, transversal_order: int | None = None) -> tuple[Jet, Jet]:
        raise NotImplementedError


@dataclass(frozen=True)
class CentroImmersion(Immersion):
    """F and Phi given by four expressions each."""

    position: tuple[Expression, ...]
    transversal: tuple[Expression, ...]
    domain: Domain = Domain(-1.0, 1.0, -1.0, 1.0)

    @classmethod
    def from_strings(cls, position, transversal, u=(-1.0, 1.0), v=(-1.0, 1.0)):
        return cls(tuple(as_expression(c) for c in position), tuple(as_expression(c) for c in transversal),
                   Domain(*u, *v))

    def jets(self, at, order, transversal_order=None):
        t = order if transversal_order is None else transversal_order
        return jt.evaluate_vector(self.position, at, order), jt.evaluate_vector(self.transversal, at, t)


@dataclass(frozen=True)
class Lifting(Immersion):
    """F = lam (f, 1), Phi = (xi, 0) + mu (f, 1)."""

    patch: SurfacePatch
    xi: TransversalSpec
    lam: Expression = Num(1.0)
    mu: Expression = Num(0.0)

    @property
    def domain(self):
        return self.patch.domain

    def jets(self, at, order, transversal_order=None):
        t = order if transversal_order is None else transversal_order
        f, x = pair_jets(self.patch, self.xi, at, max(order, t), t)
        lam = jt.evaluate_jet(self.lam, at, order)
        if np.any(lam.value <= 0):
            raise JetDomainError(f"lifting factor lambda must be positive, got {lam.value} at {tuple(at)}")
        mu = jt.evaluate_jet(self.mu, at, t)
        f0 = _homogenize(f, 1.0)
        F = lam * f0.truncate(order)
        Phi = _homogenize(x, 0.0) + mu * f0.truncate(t)
        return F, Phi


def _homogenize(x: Jet, last: float) -> Jet:
    parts = list(x)
    parts.append(Jet.constant(last, x.order))
    return Jet.stack(parts)


def lift(f: SurfacePatch, xi: TransversalSpec, lam="1", mu="0") -> Lifting:
    return Lifting(f, xi, as_expression(lam), as_expression(mu))


@dataclass(frozen=True)
class NormalPlaneChange(Immersion):
    """(F, a F + b Phi) for an expression a and a constant b != 0."""

    base: Immersion
    a: Expression
    b: float

    @property
    def domain(self):
        return self.base.domain

    def jets(self, at, order, transversal_order=None):
        t = order if transversal_order is None else transversal_order
        F, Phi = self.base.jets(at, max(order, t), t)
        a = jt.evaluate_jet(self.a, at, t)
        return F.truncate(order), a * F.truncate(t) + self.b * Phi


# -- structure tensors -------------------------------------------------------


@dataclass(frozen=True)
class StructureJets:
    """Structure tensors as jets (for derivatives of H, etc.)."""

    T: Jet
    H: Jet
    S: Jet
    rho: Jet
    tau: Jet
    christoffels: Jet


def structure_jets(F: Jet, Phi: Jet) -> StructureJets:
    """Decompose second derivatives of F and first of Phi in the frame.

    The result has order ``min(F.order - 2, Phi.order - 1)``.
    """
    r = min(F.order - 2, Phi.order - 1)
    if r < 0:
        raise ValueError("need F of order >= 2 and Phi of order >= 1")
    frame = Jet.stack([F.du, F.dv, F, Phi], axis=-1).truncate(r)
    check_frame(frame.value, "frame (F_u, F_v, F, Phi)")
    targets = Jet.stack([F.d(2, 0), F.d(1, 1), F.d(0, 2), Phi.du, Phi.dv], axis=-1).truncate(r)
    coef = frame.inv() @ targets  # (4, 5)
    return _assemble(coef)


def _assemble(coef: Jet) -> StructureJets:
    def sym(row):
        return Jet.stack([Jet.stack([coef[row, 0], coef[row, 1]]), Jet.stack([coef[row, 1], coef[row, 2]])], axis=0)

    gam = Jet.stack([sym(0), sym(1)], axis=0)  # [k, i, j]
    S = -Jet.stack([coef[0, 3:5], coef[1, 3:5]], axis=0)  # [k, i]
    return StructureJets(T=sym(2), H=sym(3), S=S, rho=coef[2, 3:5], tau=coef[3, 3:5], christoffels=gam)


@dataclass(frozen=True)
class Codim2Data:
    T: np.ndarray
    H: np.ndarray
    S: np.ndarray
    rho: np.ndarray = field(default_factory=lambda: np.zeros(2))
    tau: np.ndarray = field(default_factory=lambda: np.zeros(2))
    christoffels: np.ndarray = field(default_factory=lambda: np.zeros((2, 2, 2)))
    frame: np.ndarray | None = None  # (4, 4) columns F_u, F_v, F, Phi
    second: np.ndarray | None = None  # (4, 2, 2)
    transversal_derivatives: np.ndarray | None = None  # (4, 2)

    @classmethod
    def synthetic(cls, S=None, H=None, T=None) -> Codim2Data:
        """Pointwise data with only the tensors that matter for directions."""
        eye = np.eye(2)
        return cls(T=np.zeros((2, 2)) if T is None else np.asarray(T, float),
                   H=eye if H is None else np.asarray(H, float),
                   S=np.zeros((2, 2)) if S is None else np.asarray(S, float))

    @classmethod
    def from_jets(cls, F: Jet, Phi: Jet) -> Codim2Data:
        sj = structure_jets(F, Phi)
        second = np.stack([
            np.column_stack([F.partial(2, 0), F.partial(1, 1)]),
            np.column_stack([F.partial(1, 1), F.partial(0, 2)]),
        ], axis=1)
        return cls(T=sj.T.value, H=sj.H.value, S=sj.S.value, rho=sj.rho.value, tau=sj.tau.value,
                   christoffels=sj.christoffels.value,
                   frame=np.column_stack([F.partial(1, 0), F.partial(0, 1), F.value, Phi.value]),
                   second=second,
                   transversal_derivatives=np.column_stack([Phi.partial(1, 0), Phi.partial(0, 1)]))

    def reconstruction_residual(self) -> float:
        fu, fv, F, Phi = self.frame.T
        worst = 0.0
        for i in range(2):
            for j in range(2):
                g = self.christoffels[:, i, j]
                rebuilt = g[0] * fu + g[1] * fv + self.T[i, j] * F + self.H[i, j] * Phi
                worst = max(worst, _rel(rebuilt, self.second[:, i, j]))
            rebuilt = -self.S[0, i] * fu - self.S[1, i] * fv + self.rho[i] * F + self.tau[i] * Phi
            worst = max(worst, _rel(rebuilt, self.transversal_derivatives[:, i]))
        return worst

    def self_adjointness_residual(self) -> float:
        HS = self.H @ self.S
        return float(np.abs(HS - HS.T).max() / max(1.0, np.abs(HS).max()))


def _rel(a, b) -> float:
    return float(np.linalg.norm(a - b) / max(1.0, np.linalg.norm(b)))


def centro_decompose(imm: Immersion, at) -> Codim2Data:
    F, Phi = imm.jets(at, 2, 1)
    return Codim2Data.from_jets(F, Phi)


# -- the dual pair -----------------------------------------------------------


@dataclass(frozen=True)
class DualPointData:
    G: np.ndarray
    Psi: np.ndarray
    G_jet: Jet
    Psi_jet: Jet
    F_jet: Jet
    Phi_jet: Jet
    dual: Codim2Data  # (T*, H*, S*, rho*, tau*, nabla*) of (G, Psi)
    primal: Codim2Data

    @property
    def G_u(self):
        return self.G_jet.partial(1, 0)

    @property
    def G_v(self):
        return self.G_jet.partial(0, 1)

    def pairing_residual(self) -> float:
        """Max residual of the six defining pairings."""
        F, Phi = self.F_jet.value, self.Phi_jet.value
        Fu, Fv = self.F_jet.partial(1, 0), self.F_jet.partial(0, 1)
        G, Psi = self.G, self.Psi
        return float(max(abs(G @ F), abs(G @ Fu), abs(G @ Fv), abs(G @ Phi - 1.0),
                         abs(Psi @ F - 1.0), abs(Psi @ Phi), abs(Psi @ Fu), abs(Psi @ Fv)))

    def metric_pairing_residual(self) -> float:
        """max |G_*X . F_*Y + H(X, Y)| over coordinate fields."""
        Gd = [self.G_jet.partial(1, 0), self.G_jet.partial(0, 1)]
        Fd = [self.F_jet.partial(1, 0), self.F_jet.partial(0, 1)]
        pair = np.array([[Gd[i] @ Fd[j] for j in range(2)] for i in range(2)])
        return float(np.abs(pair + self.primal.H).max() / max(1.0, np.abs(self.primal.H).max()))

    def involution_residual(self) -> float:
        """Dual of (G, Psi) compared with (F, Phi)."""
        F2, Phi2 = invert_pair(self.G_jet.truncate(1), self.Psi_jet.truncate(1))
        F, Phi = self.F_jet.value, self.Phi_jet.value
        return max(_rel(F2.value, F), _rel(Phi2.value, Phi))


def invert_pair(X: Jet, Y: Jet) -> tuple[Jet, Jet]:
    """Rows of the inverse of the frame (X_u, X_v, X, Y): those dual to Y and X."""
    frame = Jet.stack([X.du, X.dv, X.truncate(X.order - 1), Y.truncate(X.order - 1)], axis=-1)
    check_frame(frame.value, "frame (X_u, X_v, X, Y)")
    inv = frame.inv()
    return inv[3], inv[2]


def dual_pair(imm: Immersion, at, order: int = 2) -> DualPointData:
    """(G, Psi) with jets of the given order, plus both structures."""
    F, Phi = imm.jets(at, order + 1, order)
    G, Psi = invert_pair(F, Phi)
    dual = Codim2Data.from_jets(G, Psi)
    primal = Codim2Data.from_jets(F, Phi)
    return DualPointData(G.value, Psi.value, G, Psi, F, Phi, dual, primal)


def conjugate_connection_residual(imm: Immersion, at) -> float:
    """max |d_k H_ij - Gamma^l_ki H_lj - Gamma*^l_kj H_il| over k, i, j."""
    F, Phi = imm.jets(at, 3, 2)
    primal = structure_jets(F, Phi)  # order 1
    G, Psi = invert_pair(F, Phi)
    dual = structure_jets(G, Psi)
    H = primal.H.value
    gam = primal.christoffels.value
    gam_star = dual.christoffels.value
    dH = [primal.H.partial(1, 0), primal.H.partial(0, 1)]
    worst = 0.0
    for k in range(2):
        rhs = gam[:, k, :].T @ H + H @ gam_star[:, k, :]
        worst = max(worst, float(np.abs(dH[k] - rhs).max()))
    return worst / max(1.0, float(np.abs(H).max()))


# -- directions and singularities -------------------------------------------


@dataclass(frozen=True)
class DirectionBranch:
    direction: np.ndarray
    scalar: float


@dataclass(frozen=True)
class Singular:
    """Returned instead of branches at umbilic / inflection points."""

    kind: str
    scalar: float  # umbilic factor trace(S)/2, or mean mu
    deviation: float


def canonical(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    v = v / np.linalg.norm(v)
    lead = v[0] if abs(v[0]) > 1e-12 else v[1]
    return -v if lead < 0 else v


def eig2(M) -> list[tuple[float, np.ndarray]]:
    """Real eigenpairs of a 2x2 matrix by the quadratic formula, ascending.

    Complex pairs give an empty list; a multiple of the identity gives one
    eigenvalue with the first basis vector.
    """
    M = np.asarray(M, dtype=float)
    a, b, c, d = M[0, 0], M[0, 1], M[1, 0], M[1, 1]
    disc = (a - d) ** 2 + 4.0 * b * c
    if disc < 0:
        return []
    s = math.sqrt(disc)
    out = []
    for lam in ((a + d - s) / 2.0, (a + d + s) / 2.0):
        r1 = np.array([a - lam, b])
        r2 = np.array([c, d - lam])
        r = r1 if r1 @ r1 >= r2 @ r2 else r2
        if r @ r == 0.0:
            return [(lam, np.array([1.0, 0.0]))]
        out.append((lam, canonical([-r[1], r[0]])))
    return out


def _definite_factor(H) -> tuple[float, np.ndarray]:
    """Sign s and Cholesky factor L of s*H (positive definite)."""
    H = np.asarray(H, dtype=float)
    H = 0.5 * (H + H.T)
    if np.linalg.det(H) <= 0:
        raise IndefiniteMetricError(f"metric is not definite (det={np.linalg.det(H):.3e})")
    s = 1.0 if H[0, 0] > 0 else -1.0
    return s, np.linalg.cholesky(s * H)


def _sym_eig(Mhat):
    """Symmetric 2x2: eigenvalues ascending, angle of the top eigenvector, gap."""
    a, c = Mhat[0, 0], Mhat[1, 1]
    b = 0.5 * (Mhat[0, 1] + Mhat[1, 0])
    mid = 0.5 * (a + c)
    rad = math.hypot(0.5 * (a - c), b)
    theta = 0.5 * math.atan2(2.0 * b, a - c)
    return mid - rad, mid + rad, theta, 2.0 * rad


def normalized_operators(data: Codim2Data):
    """S and H^-1 T expressed in an H-orthonormal frame, plus that frame.

    Both come out symmetric; returns (S_hat, M_hat, E) with E^T H E = +-I.
    """
    s, L = _definite_factor(data.H)
    Linv = np.linalg.inv(L)
    S_hat = L.T @ data.S @ Linv.T
    M_hat = Linv @ (s * data.T) @ Linv.T
    return S_hat, M_hat, Linv.T


def singularity_deviations(data: Codim2Data) -> tuple[float, float]:
    """(umbilic deviation, inflection deviation): eigenvalue gaps of S and H^-1 T."""
    S_hat, M_hat, _ = normalized_operators(data)
    return _sym_eig(S_hat)[3], _sym_eig(M_hat)[3]


def _branches(Mhat, E, sign=1.0) -> list[DirectionBranch]:
    lo, hi, theta, _ = _sym_eig(Mhat)
    top = np.array([math.cos(theta), math.sin(theta)])
    low = np.array([-math.sin(theta), math.cos(theta)])
    pairs = [(sign * lo, E @ low), (sign * hi, E @ top)]
    pairs.sort(key=lambda p: p[0])
    return [DirectionBranch(canonical(d), float(x)) for x, d in pairs]


def principal_directions(data: Codim2Data, tol: float = FLAG_TOL):
    """Eigen-branches of S, or a :class:`Singular` at umbilic points."""
    try:
        S_hat, _, E = normalized_operators(data)
    except IndefiniteMetricError:
        S = data.S
        traceless = S - 0.5 * np.trace(S) * np.eye(2)
        dev = float(np.linalg.norm(traceless))
        if dev < tol * (1.0 + np.linalg.norm(S)):
            return Singular("umbilic", 0.5 * float(np.trace(S)), dev)
        return [DirectionBranch(d, float(x)) for x, d in eig2(S)]
    dev = _sym_eig(S_hat)[3]
    if dev < tol * (1.0 + np.linalg.norm(S_hat)):
        return Singular("umbilic", 0.5 * float(np.trace(data.S)), dev)
    if data.self_adjointness_residual() > 1e-8:
        # not H-self-adjoint (hand-made data): plain eigenvectors of S
        return [DirectionBranch(d, float(x)) for x, d in eig2(data.S)]
    return _branches(S_hat, E)


def asymptotic_directions(data: Codim2Data, tol: float = FLAG_TOL):
    """Eigen-branches of H^-1 T (directions X with (T - mu H) X = 0).

    Returns a :class:`Singular` at inflection points and an empty list when
    the eigenvalues are complex (indefinite H).
    """
    H, T = np.asarray(data.H, float), np.asarray(data.T, float)
    if abs(np.linalg.det(H)) < 1e-14 * max(1.0, np.abs(H).max() ** 2):
        raise DegenerateMetricError("H is degenerate")
    M = np.linalg.solve(H, T)
    mu_bar = 0.5 * float(np.trace(M))
    dev = float(np.linalg.norm(T - mu_bar * H))
    if dev < tol * np.linalg.norm(H):
        return Singular("inflection", mu_bar, dev)
    try:
        _, M_hat, E = normalized_operators(data)
    except IndefiniteMetricError:
        return [DirectionBranch(d, float(x)) for x, d in eig2(M)]
    return _branches(M_hat, E)


# -- Blaschke constant -------------------------------------------------------


@dataclass(frozen=True)
class BlaschkeConstant:
    value: float  # signed, for the coordinate-ordered Gram-Schmidt frame
    frame: np.ndarray  # columns X1, X2 in chart coordinates

    @property
    def magnitude(self) -> float:
        return abs(self.value)

    @property
    def sign(self) -> int:
        return 1 if self.value > 0 else -1


def blaschke_constant(imm: Immersion, at, side: str = "primal") -> BlaschkeConstant:
    """omega(F_*X1, F_*X2, F, Phi) for an H-orthonormal {X1, X2}.

    With ``side="dual"`` the same frame is used for (G, Psi) and the dual
    volume form (determinant in covector components).
    """
    if side == "primal":
        F, Phi = imm.jets(at, 2, 1)
        data = Codim2Data.from_jets(F, Phi)
        X, Y = F, Phi
    elif side == "dual":
        d = dual_pair(imm, at)
        data = d.primal
        X, Y = d.G_jet, d.Psi_jet
    else:
        raise ValueError(f"side must be 'primal' or 'dual', got {side!r}")
    try:
        frame = orthonormal_frame(data.H)
    except DegenerateMetricError as exc:
        raise IndefiniteMetricError("Blaschke constant needs a definite metric") from exc
    tangent = np.column_stack([X.partial(1, 0), X.partial(0, 1)]) @ frame
    mat = np.column_stack([tangent, X.value, Y.value])
    check_frame(mat, "volume frame")
    return BlaschkeConstant(float(np.linalg.det(mat)), frame)


def dual_data(imm: Immersion, at) -> Codim2Data:
    """Structure tensors of the dual pair only (cheaper than :func:`dual_pair`)."""
    F, Phi = imm.jets(at, 3, 2)
    G, Psi = invert_pair(F, Phi)
    return Codim2Data.from_jets(G, Psi)
