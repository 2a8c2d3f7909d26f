"""Equiaffine structure of a surface f: U -> R^3 with transversal field xi.

Decomposing in the frame (f_u, f_v, xi)::

    f_ij = Gamma^k_ij f_k + h_ij xi
    xi_i = -B^k_i f_k + tau_i xi

gives the affine metric ``h``, shape operator ``B``, torsion form ``tau`` and
the induced connection.  The pair is equiaffine when ``tau = 0``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import jet as jt
from .errors import DegenerateMetricError, SingularFrameError
from .expr import Expression, as_expression
from .jet import Jet

TRANSVERSALITY_TOL = 1e-10


@dataclass(frozen=True)
class Domain:
    u0: float
    u1: float
    v0: float
    v1: float

    def contains(self, at, margin: float = 0.0) -> bool:
        u, v = at
        return self.u0 + margin <= u <= self.u1 - margin and self.v0 + margin <= v <= self.v1 - margin

    def grid(self, nu: int, nv: int) -> np.ndarray:
        """Node grid including the boundary, shape (nu, nv, 2)."""
        us = np.linspace(self.u0, self.u1, nu)
        vs = np.linspace(self.v0, self.v1, nv)
        return np.stack(np.meshgrid(us, vs, indexing="ij"), axis=-1)

    def sample(self, rng: np.random.Generator, n: int, margin: float = 0.0) -> np.ndarray:
        u = rng.uniform(self.u0 + margin, self.u1 - margin, n)
        v = rng.uniform(self.v0 + margin, self.v1 - margin, n)
        return np.stack([u, v], axis=-1)

    @property
    def spacing(self) -> float:
        return max(self.u1 - self.u0, self.v1 - self.v0)


@dataclass(frozen=True)
class SurfacePatch:
    """Expression-defined immersion f = (x, y, z) over a chart rectangle."""

    components: tuple[Expression, Expression, Expression]
    domain: Domain = Domain(-1.0, 1.0, -1.0, 1.0)

    @classmethod
    def from_strings(cls, x, y, z, u=(-1.0, 1.0), v=(-1.0, 1.0)) -> SurfacePatch:
        comps = tuple(as_expression(c) for c in (x, y, z))
        return cls(comps, Domain(float(u[0]), float(u[1]), float(v[0]), float(v[1])))

    def jet(self, at, order: int) -> Jet:
        return jt.evaluate_vector(self.components, at, order)

    def __call__(self, at) -> np.ndarray:
        return self.jet(at, 0).value


@dataclass(frozen=True)
class TransversalSpec:
    """Which transversal field accompanies a surface patch.

    ``euclidean`` is the Euclidean unit normal ``f_u x f_v / |f_u x f_v|``;
    ``blaschke`` the affine normal; ``explicit`` three user expressions.
    """

    kind: str = "euclidean"
    components: tuple[Expression, ...] | None = None

    def __post_init__(self):
        if self.kind not in ("euclidean", "blaschke", "explicit"):
            raise ValueError(f"unknown transversal kind {self.kind!r}")
        if self.kind == "explicit" and (self.components is None or len(self.components) != 3):
            raise ValueError("explicit transversal needs three component expressions")

    @classmethod
    def euclidean(cls):
        return cls("euclidean")

    @classmethod
    def blaschke(cls):
        return cls("blaschke")

    @classmethod
    def explicit(cls, x, y, z):
        return cls("explicit", tuple(as_expression(c) for c in (x, y, z)))

    @property
    def extra_order(self) -> int:
        """How many more derivatives of f are consumed than of xi."""
        return {"euclidean": 1, "blaschke": 3, "explicit": 0}[self.kind]


def unit_normal_jet(f: Jet) -> Jet:
    n = jt.cross(f.du, f.dv)
    norm = jt.dot(n, n).sqrt()
    return n / norm


def blaschke_jet(f: Jet) -> Jet:
    """Affine normal of ``f`` as a jet of order ``f.order - 3``.

    Scale the unit normal so that h-orthonormal frames have unit volume, then
    add the tangential correction that kills the torsion form.  The unit
    normal is oriented so that h is positive definite whenever h is definite.
    """
    if f.order < 3:
        raise ValueError("the Blaschke field needs a jet of order >= 3")
    fu, fv = f.du, f.dv
    n0 = unit_normal_jet(f).truncate(f.order - 2)
    h0 = _second_form(f, n0)
    hv = h0.value
    if np.linalg.det(hv) > 0 and hv[0, 0] < 0:
        n0, h0 = -n0, -h0
        hv = -hv
    det_h0 = h0[0, 0] * h0[1, 1] - h0[0, 1] * h0[1, 0]
    if abs(det_h0.value) < 1e-14 * max(1.0, np.abs(hv).max() ** 2):
        raise DegenerateMetricError("affine metric of the initial transversal is degenerate")
    if det_h0.value < 0:
        det_h0 = -det_h0
    theta0 = jt.det3(fu, fv, n0)
    phi = (det_h0 / (theta0 * theta0)).power(0.25)
    tau0 = Jet.stack([jt.dot(n0.du, n0), jt.dot(n0.dv, n0)])
    rhs = -(phi.truncate(f.order - 3) * tau0.truncate(f.order - 3) + Jet.stack([phi.du, phi.dv]))
    z = (h0.truncate(f.order - 3).inv() @ rhs[:, None])[:, 0]
    return phi * n0 + z[0] * fu + z[1] * fv


def _second_form(f: Jet, n: Jet) -> Jet:
    """h_ij = f_ij . n, valid for unit n orthogonal to the tangent plane."""
    fuu, fuv, fvv = f.d(2, 0), f.d(1, 1), f.d(0, 2)
    h11, h12, h22 = jt.dot(fuu, n), jt.dot(fuv, n), jt.dot(fvv, n)
    return Jet.stack([Jet.stack([h11, h12]), Jet.stack([h12, h22])], axis=0)


def transversal_jet(patch: SurfacePatch, xi: TransversalSpec, at, order: int) -> Jet:
    """The transversal field as a jet of the given order."""
    if xi.kind == "explicit":
        return jt.evaluate_vector(xi.components, at, order)
    f = patch.jet(at, order + xi.extra_order)
    if xi.kind == "euclidean":
        return unit_normal_jet(f)
    return blaschke_jet(f)


def pair_jets(patch: SurfacePatch, xi: TransversalSpec, at, order: int, xi_order: int | None = None):
    """Jets of f (order ``order``) and xi (order ``xi_order``, default same)."""
    xi_order = order if xi_order is None else xi_order
    f_order = max(order, xi_order + xi.extra_order) if xi.kind != "explicit" else order
    f = patch.jet(at, f_order)
    if xi.kind == "euclidean":
        x = unit_normal_jet(f).truncate(xi_order)
    elif xi.kind == "blaschke":
        x = blaschke_jet(f).truncate(xi_order)
    else:
        x = jt.evaluate_vector(xi.components, at, xi_order)
    return f.truncate(order), x


def check_frame(frame: np.ndarray, what: str = "frame") -> float:
    """Raise unless |det| exceeds the transversality tolerance; return det."""
    det = float(np.linalg.det(frame))
    scale = float(np.prod(np.linalg.norm(frame, axis=0)))
    if not np.isfinite(det) or abs(det) <= TRANSVERSALITY_TOL * scale:
        raise SingularFrameError(f"{what} is singular (det={det:.3e}, column-norm product={scale:.3e})")
    return det


@dataclass(frozen=True)
class Codim1Data:
    h: np.ndarray  # (2, 2)
    B: np.ndarray  # (2, 2); column i is B(d_i)
    tau: np.ndarray  # (2,)
    christoffels: np.ndarray  # (2, 2, 2), [k, i, j] = Gamma^k_ij
    frame: np.ndarray  # (3, 3) columns f_u, f_v, xi
    det_frame: float
    second: np.ndarray  # (3, 2, 2) f_ij
    xi_derivatives: np.ndarray  # (3, 2) xi_i

    def reconstruction_residual(self) -> float:
        """Max relative residual of the six frame identities."""
        fu, fv, xi = self.frame.T
        worst = 0.0
        for i in range(2):
            for j in range(2):
                rebuilt = self.christoffels[0, i, j] * fu + self.christoffels[1, i, j] * fv + self.h[i, j] * xi
                worst = max(worst, _rel(rebuilt, self.second[:, i, j]))
            rebuilt = -self.B[0, i] * fu - self.B[1, i] * fv + self.tau[i] * xi
            worst = max(worst, _rel(rebuilt, self.xi_derivatives[:, i]))
        return worst


def _rel(a, b) -> float:
    return float(np.linalg.norm(a - b) / max(1.0, np.linalg.norm(b)))


def decompose_values(fu, fv, second, xi, xi_derivs) -> Codim1Data:
    frame = np.column_stack([fu, fv, xi])
    det = check_frame(frame, "frame (f_u, f_v, xi)")
    rhs = np.column_stack([second[:, 0, 0], second[:, 0, 1], second[:, 1, 1], xi_derivs[:, 0], xi_derivs[:, 1]])
    coef = np.linalg.solve(frame, rhs)
    gam = np.empty((2, 2, 2))
    h = np.empty((2, 2))
    for col, (i, j) in enumerate(((0, 0), (0, 1), (1, 1))):
        gam[:, i, j] = gam[:, j, i] = coef[:2, col]
        h[i, j] = h[j, i] = coef[2, col]
    B = -coef[:2, 3:5]
    tau = coef[2, 3:5].copy()
    return Codim1Data(h, B, tau, gam, frame, det, second, xi_derivs)


def gauss_decompose(f: SurfacePatch, xi: TransversalSpec, at) -> Codim1Data:
    fj, xj = pair_jets(f, xi, at, 2, 1)
    second = np.stack([
        np.column_stack([fj.partial(2, 0), fj.partial(1, 1)]),
        np.column_stack([fj.partial(1, 1), fj.partial(0, 2)]),
    ], axis=1)
    xi_derivs = np.column_stack([xj.partial(1, 0), xj.partial(0, 1)])
    return decompose_values(fj.partial(1, 0), fj.partial(0, 1), second, xj.value, xi_derivs)


@dataclass(frozen=True)
class BlaschkeValue:
    xi: np.ndarray
    xi_u: np.ndarray
    xi_v: np.ndarray
    volume_residual: float
    equiaffinity_residual: float


def blaschke_transversal(f: SurfacePatch, at) -> BlaschkeValue:
    """Affine normal at a point, with both defining properties verified."""
    fj = f.jet(at, 4)
    xj = blaschke_jet(fj)
    data = gauss_decompose(f, TransversalSpec.blaschke(), at)
    frame = pseudo_orthonormal_frame(data.h)
    vol = abs(np.linalg.det(np.column_stack([data.frame[:, :2] @ frame, data.frame[:, 2]])))
    return BlaschkeValue(xj.value, xj.partial(1, 0), xj.partial(0, 1), abs(vol - 1.0), equiaffinity_residual(data))


def orthonormal_frame(h: np.ndarray) -> np.ndarray:
    """Gram-Schmidt of the coordinate basis w.r.t. a definite form.

    Negative-definite forms are treated through -h.  Columns are X1, X2.
    """
    h = np.asarray(h, dtype=float)
    if np.linalg.det(h) <= 0:
        raise DegenerateMetricError("metric is not definite; no orthonormal frame")
    if h[0, 0] < 0:
        h = -h
    x1 = np.array([1.0, 0.0]) / np.sqrt(h[0, 0])
    x2 = np.array([-h[0, 1] / h[0, 0], 1.0])
    x2 = x2 / np.sqrt(x2 @ h @ x2)
    return np.column_stack([x1, x2])


def pseudo_orthonormal_frame(h: np.ndarray) -> np.ndarray:
    """Columns X1, X2 with h(Xi, Xj) = +-delta_ij; works for indefinite h."""
    h = np.asarray(h, dtype=float)
    if np.linalg.det(h) > 0:
        return orthonormal_frame(h)
    w, V = np.linalg.eigh(0.5 * (h + h.T))
    if np.min(np.abs(w)) <= 1e-14 * np.max(np.abs(w)):
        raise DegenerateMetricError("metric is degenerate; no orthonormal frame")
    return V / np.sqrt(np.abs(w))


@dataclass(frozen=True)
class Conormal:
    nu: np.ndarray  # covector in R_3
    p: float  # -nu . f

    @property
    def covector(self) -> np.ndarray:
        return np.append(self.nu, self.p)


def conormal_jet(f: Jet, xi: Jet) -> Jet:
    """nu with nu.xi = 1 and nu.f_u = nu.f_v = 0, as a jet."""
    frame = Jet.stack([f.du, f.dv, xi.truncate(f.order - 1)], axis=-1)
    check_frame(frame.value, "frame (f_u, f_v, xi)")
    return frame.inv()[2]


def conormal(f: SurfacePatch, xi: TransversalSpec, at) -> Conormal:
    fj, xj = pair_jets(f, xi, at, 1, 0)
    frame = np.column_stack([fj.partial(1, 0), fj.partial(0, 1), xj.value])
    check_frame(frame, "frame (f_u, f_v, xi)")
    nu = np.linalg.inv(frame)[2]
    return Conormal(nu, float(-nu @ fj.value))


def conormal_residual(f: SurfacePatch, xi: TransversalSpec, at) -> float:
    fj, xj = pair_jets(f, xi, at, 1, 0)
    nu = conormal(f, xi, at).nu
    scale = np.linalg.norm(nu)
    return max(
        abs(nu @ xj.value - 1.0),
        abs(nu @ fj.partial(1, 0)) / max(1.0, scale * np.linalg.norm(fj.partial(1, 0))),
        abs(nu @ fj.partial(0, 1)) / max(1.0, scale * np.linalg.norm(fj.partial(0, 1))),
    )


def equiaffinity_residual(data: Codim1Data) -> float:
    return float(np.max(np.abs(data.tau)))
