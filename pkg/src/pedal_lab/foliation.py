"""Curvature and asymptotic line fields: singular points, indices, traces.

Principal (curvature-line) fields come from the eigenvectors of S, asymptotic
fields from those of H^-1 T; both need a definite metric.  Singular points
are umbilics (S a multiple of the identity) and inflections (T a multiple
of H).  Indices are measured by the winding of the doubled direction angle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Callable

import numpy as np

from .codim1 import Domain
from .codim2 import (FLAG_TOL, Codim2Data, Immersion, Singular, asymptotic_directions, centro_decompose,
                     dual_data, normalized_operators, principal_directions, _sym_eig)
from .errors import (EverywhereSingularError, IndefiniteMetricError, PedalLabError, SingularPointError,
                     WindingError)

KINDS = {"principal": "umbilic", "asymptotic": "inflection"}


@dataclass(frozen=True)
class FieldSpec:
    """One branch of a principal or asymptotic line field.

    ``source`` is an immersion (lifting, explicit, pedal pair) or any
    callable mapping a chart point to :class:`Codim2Data`.
    """

    source: Immersion | Callable[..., Codim2Data]
    kind: str = "principal"
    side: str = "primal"
    branch: int = 1
    tol: float = FLAG_TOL
    domain_override: Domain | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be principal or asymptotic, got {self.kind!r}")
        if self.side not in ("primal", "dual"):
            raise ValueError(f"side must be primal or dual, got {self.side!r}")
        if self.branch not in (1, 2):
            raise ValueError("branch must be 1 or 2")

    @property
    def singular_kind(self) -> str:
        return KINDS[self.kind]

    @property
    def domain(self) -> Domain | None:
        if self.domain_override is not None:
            return self.domain_override
        return getattr(self.source, "domain", None)

    def with_branch(self, branch: int) -> FieldSpec:
        return replace(self, branch=branch)

    def data(self, at) -> Codim2Data:
        if isinstance(self.source, Immersion) or hasattr(self.source, "jets"):
            if self.side == "dual":
                return dual_data(self.source, at)
            return centro_decompose(self.source, at)
        return self.source(at)

    def deviation(self, at) -> tuple[float, float]:
        """(delta, flag threshold) for this field's kind of singularity."""
        S_hat, M_hat, _ = normalized_operators(self.data(at))
        mat = S_hat if self.kind == "principal" else M_hat
        return _sym_eig(mat)[3], self.tol * (1.0 + float(np.linalg.norm(mat)))

    def branches(self, at):
        data = self.data(at)
        normalized_operators(data)  # definiteness gate
        if self.kind == "principal":
            return principal_directions(data, self.tol)
        return asymptotic_directions(data, self.tol)

    def direction(self, at) -> np.ndarray:
        out = self.branches(at)
        if isinstance(out, Singular):
            raise SingularPointError(f"{out.kind} point at {tuple(np.round(at, 12))} (deviation {out.deviation:.3e})")
        if len(out) < 2:
            raise SingularPointError(f"no real {self.kind} directions at {tuple(at)}")
        return out[self.branch - 1].direction

    def __call__(self, at) -> np.ndarray:
        return self.direction(at)


def direction_at(spec: FieldSpec, at) -> np.ndarray:
    return spec.direction(at)


def _direction_function(field) -> Callable:
    if isinstance(field, FieldSpec):
        return field.direction

    def fn(at):
        d = np.asarray(field(at), dtype=float)
        n = np.linalg.norm(d)
        if n == 0 or not np.isfinite(n):
            raise SingularPointError(f"direction field vanishes at {tuple(at)}")
        return d / n

    return fn


# -- singular points -----------------------------------------------------------


@dataclass
class SingularPoint:
    location: np.ndarray
    kind: str
    deviation: float
    index: Fraction | None = None
    factor: float | None = None  # trace(S)/2 (umbilic) or mean mu (inflection)

    def __post_init__(self):
        self.location = np.asarray(self.location, dtype=float)


def _scan(spec: FieldSpec, domain: Domain, nu: int, nv: int):
    grid = domain.grid(nu, nv)
    dev = np.full((nu, nv), np.inf)
    thr = np.zeros((nu, nv))
    for i in range(nu):
        for j in range(nv):
            try:
                dev[i, j], thr[i, j] = spec.deviation(grid[i, j])
            except IndefiniteMetricError:
                raise
            except PedalLabError:
                pass  # singular frame or pole: leave the node out
    return grid, dev, thr


def refine_singular_point(spec: FieldSpec, start, max_iter: int = 50, tol: float = 1e-10,
                          max_step: float | None = None, fd_step: float = 1e-5) -> np.ndarray:
    """Newton iteration on delta^2 with a central finite-difference Hessian."""
    x = np.asarray(start, dtype=float).copy()

    def g(p):
        return spec.deviation(p)[0] ** 2

    h = fd_step
    for _ in range(max_iter):
        g0 = g(x)
        gp = np.array([g(x + [h, 0]), g(x + [0, h])])
        gm = np.array([g(x - [h, 0]), g(x - [0, h])])
        grad = (gp - gm) / (2 * h)
        huu = (gp[0] - 2 * g0 + gm[0]) / h ** 2
        hvv = (gp[1] - 2 * g0 + gm[1]) / h ** 2
        huv = (g(x + [h, h]) - g(x + [h, -h]) - g(x + [-h, h]) + g(x + [-h, -h])) / (4 * h * h)
        hess = np.array([[huu, huv], [huv, hvv]])
        try:
            step = -np.linalg.solve(hess, grad)
        except np.linalg.LinAlgError:
            step = -grad
        if np.linalg.det(hess) <= 0 or hess[0, 0] <= 0:
            step = -grad / max(np.abs(np.diag(hess)).max(), 1e-12)
        if max_step is not None and np.linalg.norm(step) > max_step:
            step *= max_step / np.linalg.norm(step)
        x = x + step
        if np.linalg.norm(step) < tol:
            break
    return x


def find_singular_points(spec: FieldSpec, grid=(40, 40), tol: float | None = None,
                         domain: Domain | None = None) -> list[SingularPoint]:
    """Grid scan of the deviation, Newton refinement, deduplication."""
    domain = domain or spec.domain
    if domain is None:
        raise ValueError("a domain is needed to scan for singular points")
    if tol is not None:
        spec = replace(spec, tol=tol)
    nu, nv = grid
    nodes, dev, thr = _scan(spec, domain, nu, nv)
    flagged = dev < thr
    cells = flagged[:-1, :-1] & flagged[1:, :-1] & flagged[:-1, 1:] & flagged[1:, 1:]
    if cells.any():
        raise EverywhereSingularError(spec.singular_kind, float(flagged.mean()))
    du = (domain.u1 - domain.u0) / (nu - 1)
    dv = (domain.v1 - domain.v0) / (nv - 1)
    spacing = min(du, dv)
    found: list[SingularPoint] = []
    for i in range(nu):
        for j in range(nv):
            if not np.isfinite(dev[i, j]):
                continue
            window = dev[max(i - 1, 0):i + 2, max(j - 1, 0):j + 2]
            if dev[i, j] > window.min():
                continue
            try:
                x = refine_singular_point(spec, nodes[i, j], max_step=spacing)
                d, t = spec.deviation(x)
            except PedalLabError:
                continue
            if not domain.contains(x) or not d < t:
                continue
            if any(np.linalg.norm(x - p.location) < spacing for p in found):
                continue
            data = spec.data(x)
            if spec.kind == "principal":
                factor = 0.5 * float(np.trace(data.S))
            else:
                factor = 0.5 * float(np.trace(np.linalg.solve(data.H, data.T)))
            found.append(SingularPoint(x, spec.singular_kind, float(d), factor=factor))
    found.sort(key=lambda p: (round(p.location[0], 9), round(p.location[1], 9)))
    return found


# -- index ------------------------------------------------------------------------


@dataclass(frozen=True)
class IndexResult:
    index: Fraction
    raw: float
    residual: float
    samples: int
    radius: float

    def __str__(self):
        return rational_string(self.index)


def rational_string(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def _wrap(a):
    return (a + np.pi) % (2 * np.pi) - np.pi


def line_field_index(field, center, radius: float, samples: int = 256, max_samples: int = 8192) -> IndexResult:
    """Index of an unoriented direction field around ``center``.

    The doubled angle is unwrapped along the circle; the index is its total
    change over 4 pi, rounded to a half-integer.
    """
    direction = _direction_function(field)
    center = np.asarray(center, dtype=float)
    n = samples
    cache: dict[int, float] = {}
    while True:
        phis = np.empty(n)
        for k in range(n):
            key = k * (max_samples // n) if max_samples % n == 0 else None
            if key is not None and key in cache:
                phis[k] = cache[key]
                continue
            t = 2 * np.pi * k / n
            d = direction(center + radius * np.array([math.cos(t), math.sin(t)]))
            phis[k] = 2 * math.atan2(d[1], d[0])
            if key is not None:
                cache[key] = phis[k]
        steps = _wrap(np.diff(np.append(phis, phis[0])))
        if np.abs(steps).max() <= np.pi / 4:
            break
        if 2 * n > max_samples:
            raise WindingError(f"angular step {np.abs(steps).max():.3f} rad exceeds pi/4 with {n} samples",
                               samples=n)
        n *= 2
    raw = float(steps.sum() / (4 * np.pi))
    index = Fraction(round(2 * raw), 2)
    residual = abs(raw - float(index))
    if residual > 0.1:
        raise WindingError(f"winding {raw:.4f} is not close to a half-integer", residual=residual, samples=n)
    return IndexResult(index, raw, residual, n, float(radius))


# -- tracing ------------------------------------------------------------------------


@dataclass(frozen=True)
class Polyline:
    vertices: np.ndarray  # (n, 2)
    reason: str  # boundary | step-limit | singularity-proximity


class TraceError(SingularPointError):
    def __init__(self, message, partial: Polyline):
        self.partial = partial
        super().__init__(message)


def trace_line(field, seed, step: float, max_steps: int, singular_points=(), domain: Domain | None = None,
               initial=None) -> Polyline:
    """RK4 integration of a unit line field, aligning signs step to step.

    ``initial`` optionally fixes the starting orientation (a 2-vector).
    """
    direction = _direction_function(field)
    if domain is None and isinstance(field, FieldSpec):
        domain = field.domain
    stops = [np.asarray(p.location if isinstance(p, SingularPoint) else p, dtype=float) for p in singular_points]
    p = np.asarray(seed, dtype=float).copy()
    try:
        d0 = direction(p)
    except PedalLabError as exc:
        raise SingularPointError(f"seed {tuple(seed)} is singular: {exc}") from exc
    prev = d0 if initial is None else _align(d0, np.asarray(initial, dtype=float))
    verts = [p.copy()]
    reason = "step-limit"
    for _ in range(max_steps):
        try:
            k1 = _align(direction(p), prev)
            k2 = _align(direction(p + 0.5 * step * k1), k1)
            k3 = _align(direction(p + 0.5 * step * k2), k1)
            k4 = _align(direction(p + step * k3), k1)
        except PedalLabError as exc:
            raise TraceError(f"field undefined during trace: {exc}", Polyline(np.array(verts), "singularity-proximity")) from exc
        q = p + step * (k1 + 2 * k2 + 2 * k3 + k4) / 6.0
        if domain is not None and not domain.contains(q):
            reason = "boundary"
            break
        p = q
        verts.append(p.copy())
        prev = k1
        if any(np.linalg.norm(p - s) < 2 * step for s in stops):
            reason = "singularity-proximity"
            break
    return Polyline(np.array(verts), reason)


def _align(d, ref):
    return -d if d @ ref < 0 else d


def trace_both_ways(field, seed, step, max_steps, singular_points=(), domain=None) -> Polyline:
    """Trace from the seed in both orientations and join into one polyline."""
    direction = _direction_function(field)
    d0 = direction(np.asarray(seed, dtype=float))
    fwd = trace_line(field, seed, step, max_steps, singular_points, domain, initial=d0)
    bwd = trace_line(field, seed, step, max_steps, singular_points, domain, initial=-d0)
    verts = np.concatenate([bwd.vertices[::-1], fwd.vertices[1:]])
    reason = fwd.reason if fwd.reason != "step-limit" else bwd.reason
    return Polyline(verts, reason)
