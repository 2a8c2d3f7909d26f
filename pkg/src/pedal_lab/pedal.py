"""Projective pedal G = (nu, -nu . f) of an equiaffine pair (f, xi).

G is the centroaffine dual of every lifting of (f, xi), it transforms by
G -> G T^-1 under projective maps of (f, xi), and (G, Psi0) with the constant
Psi0 = (0, 0, 0, 1) is umbilical.  Conversely any (G, Psi0) dualizes back to
a pair (f, xi).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import jet as jt
from .codim1 import (Codim1Data, SurfacePatch, TransversalSpec, conormal_jet,
                     decompose_values, pair_jets)
from .codim2 import Codim2Data, invert_pair
from .errors import PedalLabError, PoleError, SingularFrameError
from .expr import Expression, as_expression
from .jet import Jet

PSI0 = np.array([0.0, 0.0, 0.0, 1.0])


def pedal_jet(f: Jet, xi: Jet) -> Jet:
    """(nu, -nu . f) with the order of ``f`` minus one."""
    nu = conormal_jet(f, xi)
    p = -jt.dot(nu, f.truncate(nu.order))
    return Jet.stack(list(nu) + [p])


@dataclass(frozen=True)
class PedalPoint:
    G: np.ndarray
    Psi0: np.ndarray = PSI0

    @property
    def nu(self) -> np.ndarray:
        return self.G[:3]

    @property
    def p(self) -> float:
        return float(self.G[3])


def projective_pedal(f: SurfacePatch, xi: TransversalSpec, at) -> PedalPoint:
    fj, xj = pair_jets(f, xi, at, 1, 0)
    G = pedal_jet(fj, xj).value
    # the pedal is the dual of the trivial lifting (f, 1), (xi, 0)
    frame = np.column_stack([np.append(fj.partial(1, 0), 0.0), np.append(fj.partial(0, 1), 0.0),
                             np.append(fj.value, 1.0), np.append(xj.value, 0.0)])
    G_dual = np.linalg.inv(frame)[3]
    if np.linalg.norm(G - G_dual) > 1e-8 * max(1.0, np.linalg.norm(G)):
        raise PedalLabError(f"pedal disagrees with the dual of the lifting at {tuple(at)}")
    return PedalPoint(G)


def pedal_invariant_residual(f: SurfacePatch, xi: TransversalSpec, at) -> float:
    """max of |G.(f,1)|, |G.(xi,0) - 1|, |G.(f_u,0)|, |G.(f_v,0)|."""
    fj, xj = pair_jets(f, xi, at, 1, 0)
    G = projective_pedal(f, xi, at).G
    nu = G[:3]
    return float(max(abs(nu @ fj.value + G[3]), abs(nu @ xj.value - 1.0),
                     abs(nu @ fj.partial(1, 0)), abs(nu @ fj.partial(0, 1))))


# -- covector immersions and reconstruction -----------------------------------


@dataclass(frozen=True)
class PedalMap:
    """The pedal of (f, xi) as a covector-valued map, for jet evaluation."""

    patch: SurfacePatch
    xi: TransversalSpec

    @property
    def domain(self):
        return self.patch.domain

    def jet(self, at, order: int) -> Jet:
        f, x = pair_jets(self.patch, self.xi, at, order + 1, order)
        return pedal_jet(f, x)


@dataclass(frozen=True)
class CovectorImmersion:
    """A map G: U -> R_4 given by four expressions."""

    components: tuple[Expression, ...]

    @classmethod
    def from_strings(cls, *components):
        return cls(tuple(as_expression(c) for c in components))

    def jet(self, at, order: int) -> Jet:
        return jt.evaluate_vector(self.components, at, order)


@dataclass(frozen=True)
class PedalPair:
    """(G, Psi0) viewed as a centroaffine immersion of covectors."""

    source: PedalMap | CovectorImmersion

    @property
    def domain(self):
        return self.source.domain

    def jets(self, at, order, transversal_order=None):
        t = order if transversal_order is None else transversal_order
        return self.source.jet(at, order), Jet.constant(PSI0, t)


def pedal_structure(source, at) -> Codim2Data:
    """Structure tensors of (G, Psi0)."""
    G = source.jet(at, 2)
    return Codim2Data.from_jets(G, Jet.constant(PSI0, 1))


def recover_jets(G: Jet) -> tuple[Jet, Jet]:
    """Dualize (G, Psi0) back to F = (f, 1), Phi0 = (xi, 0)."""
    try:
        F, Phi0 = invert_pair(G, Jet.constant(PSI0, G.order))
    except SingularFrameError as exc:
        raise SingularFrameError(f"Psi0 = (0,0,0,1) is not transversal to G: {exc}") from exc
    return F, Phi0


@dataclass(frozen=True)
class RecoveredPair:
    f: np.ndarray
    xi: np.ndarray


def recover_from_pedal(G_source, at) -> RecoveredPair:
    F, Phi0 = recover_jets(G_source.jet(at, 1))
    F, Phi0 = F.value, Phi0.value
    if abs(F[3] - 1.0) > 1e-9 or abs(Phi0[3]) > 1e-9 * max(1.0, np.linalg.norm(Phi0)):
        raise PedalLabError(f"dual of (G, Psi0) is not of the form ((f,1), (xi,0)): F={F}, Phi0={Phi0}")
    return RecoveredPair(F[:3], Phi0[:3])


# -- projective maps ----------------------------------------------------------


@dataclass(frozen=True)
class ProjectiveMap:
    """Unimodular 4x4 representative T of a projective map of the chart x4 = 1."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        det = np.linalg.det(m)
        if not np.isfinite(det) or abs(det) < 1e-300:
            raise ValueError("projective map must be invertible")
        object.__setattr__(self, "matrix", m / abs(det) ** 0.25)

    @classmethod
    def identity(cls):
        return cls(np.eye(4))

    @classmethod
    def translation(cls, shift):
        m = np.eye(4)
        m[:3, 3] = shift
        return cls(m)

    @classmethod
    def random(cls, rng: np.random.Generator):
        return cls(rng.uniform(-1.0, 1.0, (4, 4)))

    @property
    def inverse(self) -> np.ndarray:
        return np.linalg.inv(self.matrix)

    def __call__(self, x) -> np.ndarray:
        y = self.matrix @ np.append(x, 1.0)
        return y[:3] / y[3]


def projective_pair_jets(f: Jet, xi: Jet, T: ProjectiveMap, at=None) -> tuple[Jet, Jet]:
    """Image of (f, xi) under the projective map, as jets.

    The position is T f = y[:3] / y[3] with y = T (f, 1).  The transversal is
    the chart part of T (xi, 0), i.e. ``y[3] * dT(xi)``: the bare differential
    dT(xi) loses equiaffinity whenever y[3] is not constant, the rescaled
    field keeps it and spans the same line congruence.
    """
    order = min(f.order, xi.order)
    y = T.matrix @ _homog_column(f.truncate(order), 1.0)
    w = T.matrix @ _homog_column(xi.truncate(order), 0.0)
    y = Jet(y.taylor[..., 0], order)
    w = Jet(w.taylor[..., 0], order)
    y3 = y[3]
    if abs(y3.value) < 1e-12 * np.linalg.norm(y.value):
        raise PoleError("point maps to the hyperplane at infinity", at)
    f_bar = Jet.stack(list(y[0:3] / y3))
    xi_bar = w[0:3] - w[3] * f_bar
    return f_bar, xi_bar


def _homog_column(x: Jet, last: float) -> Jet:
    return Jet.stack(list(x) + [Jet.constant(last, x.order)])[:, None]


@dataclass(frozen=True)
class ProjectiveResult:
    f: np.ndarray
    xi: np.ndarray
    pedal: np.ndarray  # pedal of the transformed pair
    predicted: np.ndarray  # G T^-1, normalized to pair to 1 with the new (xi, 0)
    residual: float


def apply_projective(f: SurfacePatch, xi: TransversalSpec, T: ProjectiveMap, at) -> ProjectiveResult:
    fj, xj = pair_jets(f, xi, at, 1, 1)
    G = pedal_jet(fj, xj).value
    f_bar, xi_bar = projective_pair_jets(fj, xj, T, at)
    actual = pedal_jet(f_bar, xi_bar).value
    # normalized like the pedal, by G.(xi,0) = 1 (a no-op up to rounding for
    # this choice of transformed transversal)
    predicted = G @ T.inverse
    predicted = predicted / (predicted @ np.append(xi_bar.value, 0.0))
    residual = float(np.linalg.norm(actual - predicted) / max(1.0, np.linalg.norm(actual)))
    return ProjectiveResult(f_bar.value, xi_bar.value, actual, predicted, residual)


def projective_pair_structure(f: SurfacePatch, xi: TransversalSpec, T: ProjectiveMap, at) -> Codim1Data:
    """Structure of (T f, dT . xi), e.g. to confirm it stays equiaffine."""
    fj, xj = pair_jets(f, xi, at, 2, 2)
    fb, xb = projective_pair_jets(fj, xj, T, at)
    return _structure(fb, xb)


def _structure(f: Jet, xi: Jet) -> Codim1Data:
    second = np.stack([
        np.column_stack([f.partial(2, 0), f.partial(1, 1)]),
        np.column_stack([f.partial(1, 1), f.partial(0, 2)]),
    ], axis=1)
    return decompose_values(f.partial(1, 0), f.partial(0, 1), second, xi.value,
                            np.column_stack([xi.partial(1, 0), xi.partial(0, 1)]))


# -- congruence moves -----------------------------------------------------------


@dataclass(frozen=True)
class CongruenceResult:
    actual: np.ndarray
    predicted: np.ndarray
    residual: float


def congruence_move_reference(f: SurfacePatch, xi: TransversalSpec, a: float, at) -> CongruenceResult:
    """Pedal of (f + a xi, xi) against (nu, p - a).

    With p the last pedal coordinate (-nu . f) the shift is -a, since
    nu . xi = 1.
    """
    fj, xj = pair_jets(f, xi, at, 1, 1)
    G = pedal_jet(fj, xj).value
    actual = pedal_jet(fj + float(a) * xj, xj).value
    predicted = np.append(G[:3], G[3] - a)
    return CongruenceResult(actual, predicted, _residual(actual, predicted))


def congruence_rescale_field(f: SurfacePatch, xi: TransversalSpec, a: float, b: float, at) -> CongruenceResult:
    """Pedal of (f, a f + b xi) against G / (b - a p), p = -nu . f."""
    if b == 0:
        raise ValueError("b must be nonzero")
    fj, xj = pair_jets(f, xi, at, 1, 0)
    G = pedal_jet(fj, xj).value
    denom = b - a * G[3]
    if abs(denom) <= 1e-12 * (abs(b) + abs(a * G[3])):
        raise PoleError("rescaled pedal has a pole (b - a p = 0)", tuple(at))
    actual = pedal_jet(fj, float(a) * fj.truncate(0) + float(b) * xj).value
    predicted = G / denom
    return CongruenceResult(actual, predicted, _residual(actual, predicted))


def rescaled_pair_structure(f: SurfacePatch, xi: TransversalSpec, a: float, b: float, at) -> Codim1Data:
    """Structure of (f, a f + b xi)."""
    fj, xj = pair_jets(f, xi, at, 2, 1)
    return _structure(fj, float(a) * fj.truncate(1) + float(b) * xj)


def _residual(a, b) -> float:
    return float(np.linalg.norm(a - b) / max(1.0, np.linalg.norm(b)))
