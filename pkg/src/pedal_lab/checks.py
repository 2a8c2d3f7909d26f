"""The identity suite run by ``pedal-lab verify``.

Each check evaluates one identity over the scenario's sample points and
reports the worst residual.  Checks that do not apply to a scenario (a
definite-metric statement on a saddle, a fixed-line statement on a surface
that is not umbilic everywhere) are left out of the report.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import codim1, codim2, pedal
from .codim2 import NormalPlaneChange, Singular
from .config import Scenario
from .errors import PedalLabError
from .expr import as_expression
from .jet import evaluate


@dataclass(frozen=True)
class CheckResult:
    name: str
    paper_ref: str  # the statement being checked
    max_residual: float | None
    tolerance: float
    passed: bool
    samples: int
    error: str | None = None

    def as_json(self) -> dict:
        out = {"name": self.name, "paper_ref": self.paper_ref, "max_residual": self.max_residual,
               "tolerance": self.tolerance, "pass": self.passed, "samples": self.samples}
        if self.error is not None:
            out["error"] = self.error
        return out


class NotApplicable(Exception):
    pass


@dataclass
class Context:
    scenario: Scenario
    points: np.ndarray

    def __post_init__(self):
        s = self.scenario
        self.patch = s.patch()
        self.xi = s.transversal_spec()
        self.lifting = s.lifting()
        self.trivial = codim2.lift(self.patch, self.xi)
        self._definite = None

    @property
    def definite(self) -> bool:
        if self._definite is None:
            self._definite = all(np.linalg.det(codim1.gauss_decompose(self.patch, self.xi, p).h) > 0
                                 for p in self.points)
        return self._definite


def sample_points(s: Scenario) -> np.ndarray:
    """Interior grid of nu x nv nodes, pulled in by ``margin`` of the extent."""
    du, dv = (s.u[1] - s.u[0]) * s.margin, (s.v[1] - s.v[0]) * s.margin
    dom = codim1.Domain(s.u[0] + du, s.u[1] - du, s.v[0] + dv, s.v[1] - dv)
    return dom.grid(s.nu, s.nv).reshape(-1, 2)


def _worst(ctx: Context, fn: Callable) -> float:
    return max(float(fn(p)) for p in ctx.points)


# -- codimension one ------------------------------------------------------------


def check_reconstruction1(ctx):
    return _worst(ctx, lambda p: codim1.gauss_decompose(ctx.patch, ctx.xi, p).reconstruction_residual())


def check_equiaffinity(ctx):
    return _worst(ctx, lambda p: codim1.equiaffinity_residual(codim1.gauss_decompose(ctx.patch, ctx.xi, p)))


def check_conormal(ctx):
    return _worst(ctx, lambda p: codim1.conormal_residual(ctx.patch, ctx.xi, p))


def check_blaschke(ctx):
    if ctx.xi.kind != "blaschke":
        raise NotApplicable

    def one(p):
        b = codim1.blaschke_transversal(ctx.patch, p)
        return max(b.volume_residual, b.equiaffinity_residual)

    return _worst(ctx, one)


# -- codimension two ------------------------------------------------------------


def check_reconstruction2(ctx):
    def one(p):
        d = codim2.centro_decompose(ctx.lifting, p)
        return max(d.reconstruction_residual(), d.self_adjointness_residual())

    return _worst(ctx, one)


def check_lifting_law(ctx):
    """H = lam h and S = (B - mu I) / lam."""
    lam, mu = as_expression(ctx.scenario.lam), as_expression(ctx.scenario.mu)

    def one(p):
        d1 = codim1.gauss_decompose(ctx.patch, ctx.xi, p)
        d2 = codim2.centro_decompose(ctx.lifting, p)
        lv, mv = evaluate(lam, p), evaluate(mu, p)
        return max(_rel(d2.H, lv * d1.h), _rel(d2.S, (d1.B - mv * np.eye(2)) / lv))

    return _worst(ctx, one)


def check_hyperplane(ctx):
    """Liftings with lam = 1 satisfy T = -mu H."""
    mu = as_expression(ctx.scenario.mu)
    imm = codim2.lift(ctx.patch, ctx.xi, "1", ctx.scenario.mu)

    def one(p):
        d = codim2.centro_decompose(imm, p)
        return _rel(d.T, -evaluate(mu, p) * d.H)

    return _worst(ctx, one)


def check_pairings(ctx):
    return _worst(ctx, lambda p: codim2.dual_pair(ctx.lifting, p).pairing_residual())


def check_metric_pairing(ctx):
    return _worst(ctx, lambda p: codim2.dual_pair(ctx.lifting, p).metric_pairing_residual())


def check_involution(ctx):
    return _worst(ctx, lambda p: codim2.dual_pair(ctx.lifting, p).involution_residual())


def check_dual_structure(ctx):
    def one(p):
        d = codim2.dual_pair(ctx.lifting, p)
        H, S = d.primal.H, d.primal.S
        return max(_rel(d.dual.H, H), _rel(d.dual.T, -S.T @ H), float(np.abs(d.dual.tau).max()))

    return _worst(ctx, one)


def check_conjugate(ctx):
    return _worst(ctx, lambda p: codim2.conjugate_connection_residual(ctx.lifting, p))


def check_normal_plane(ctx):
    """Dual of (F, aF + bPhi) is (G/b, Psi - aG/b)."""
    a, b = as_expression("0.3*u - 0.2*v"), 2.0
    changed = NormalPlaneChange(ctx.lifting, a, b)

    def one(p):
        d0 = codim2.dual_pair(ctx.lifting, p)
        d1 = codim2.dual_pair(changed, p)
        av = evaluate(a, p)
        return max(_rel(d1.G, d0.G / b), _rel(d1.Psi, d0.Psi - av * d0.G / b))

    return _worst(ctx, one)


def unoriented_angle(a, b) -> float:
    a, b = np.asarray(a, float), np.asarray(b, float)
    return math.atan2(abs(a[0] * b[1] - a[1] * b[0]), abs(a @ b))


def duality_angle(imm, p, tol=codim2.FLAG_TOL) -> float | None:
    """Worst mismatch between principal directions of (F, Phi) and asymptotic ones of its dual.

    None at umbilic points, where there is nothing to compare.
    """
    prin = codim2.principal_directions(codim2.centro_decompose(imm, p), tol)
    if isinstance(prin, Singular):
        return None
    asym = codim2.asymptotic_directions(codim2.dual_data(imm, p), tol)
    if isinstance(asym, Singular) or len(asym) < 2:
        return math.pi / 2
    return max(min(unoriented_angle(b.direction, c.direction) for c in asym) for b in prin)


def check_duality_angle(ctx):
    if not ctx.definite:
        raise NotApplicable
    vals = [duality_angle(ctx.lifting, p, ctx.scenario.tolerances.flag) for p in ctx.points]
    vals = [v for v in vals if v is not None]
    if not vals:
        raise NotApplicable
    return max(vals)


def check_blaschke_constant(ctx):
    """Spread of |c| and the dual constant -1/c, on the lam = 1, mu = 0 lifting."""
    if ctx.xi.kind != "blaschke" or not ctx.definite:
        raise NotApplicable
    cs, worst = [], 0.0
    for p in ctx.points:
        c = codim2.blaschke_constant(ctx.trivial, p)
        cd = codim2.blaschke_constant(ctx.trivial, p, side="dual")
        cs.append(c.magnitude)
        worst = max(worst, abs(cd.value + 1.0 / c.value))
    return max(worst, max(cs) - min(cs))


def check_fixed_line(ctx):
    """Phi + lhat F is constant when the lam = 1, mu = 0 lifting is umbilic everywhere."""
    vecs = []
    for p in ctx.points:
        d = codim2.centro_decompose(ctx.trivial, p)
        if not isinstance(codim2.principal_directions(d, ctx.scenario.tolerances.flag), Singular):
            raise NotApplicable
        lhat = 0.5 * np.trace(d.S)
        vecs.append(d.frame[:, 3] + lhat * d.frame[:, 2])
    vecs = np.array(vecs)
    return float(np.abs(vecs - vecs.mean(axis=0)).max())


# -- pedal ----------------------------------------------------------------------


def check_pedal_dual(ctx):
    def one(p):
        G = pedal.projective_pedal(ctx.patch, ctx.xi, p).G
        return max(_rel(G, codim2.dual_pair(imm, p).G) for imm in (ctx.trivial, ctx.lifting))

    return _worst(ctx, one)


def check_pedal_umbilical(ctx):
    if not ctx.definite:
        raise NotApplicable
    src = pedal.PedalMap(ctx.patch, ctx.xi)
    return _worst(ctx, lambda p: codim2.singularity_deviations(pedal.pedal_structure(src, p))[0])


def check_congruence(ctx):
    def one(p):
        r1 = pedal.congruence_move_reference(ctx.patch, ctx.xi, 0.3, p).residual
        r2 = pedal.congruence_rescale_field(ctx.patch, ctx.xi, 0.2, 1.5, p).residual
        r3 = codim1.equiaffinity_residual(pedal.rescaled_pair_structure(ctx.patch, ctx.xi, 0.2, 1.5, p))
        return max(r1, r2, r3)

    return _worst(ctx, one)


def projective_maps(n: int, seed: int = 0) -> list[pedal.ProjectiveMap]:
    rng = np.random.default_rng(seed)
    return [pedal.ProjectiveMap.random(rng) for _ in range(n)]


def check_projective(ctx):
    maps = projective_maps(3)

    def one(p):
        return max(pedal.apply_projective(ctx.patch, ctx.xi, T, p).residual for T in maps)

    return _worst(ctx, one)


def check_recovery(ctx):
    src = pedal.PedalMap(ctx.patch, ctx.xi)

    def one(p):
        r = pedal.recover_from_pedal(src, p)
        fj, xj = codim1.pair_jets(ctx.patch, ctx.xi, p, 0, 0)
        return max(_rel(r.f, fj.value), _rel(r.xi, xj.value))

    return _worst(ctx, one)


def _rel(a, b) -> float:
    a, b = np.asarray(a, float), np.asarray(b, float)
    return float(np.abs(a - b).max() / max(1.0, np.abs(b).max()))


# name, statement, tolerance attribute, function
CHECKS: list[tuple[str, str, str, Callable]] = [
    ("codim1-reconstruction", "structure equations of (f, xi)", "reconstruction", check_reconstruction1),
    ("equiaffinity", "D xi tangent to f", "equiaffinity", check_equiaffinity),
    ("conormal", "conormal: nu.xi = 1, nu.f_* = 0", "conormal", check_conormal),
    ("blaschke-normalization", "Blaschke field: volume and equiaffinity", "blaschke", check_blaschke),
    ("codim2-reconstruction", "centroaffine structure equations; S H-self-adjoint", "reconstruction",
     check_reconstruction2),
    ("lifting-law", "lifting lemma, with the lambda scaling: H = lam h, S = (B - mu I)/lam", "lifting",
     check_lifting_law),
    ("hyperplane-inflection", "lifting in x4 = 1 is inflectional: T = -mu H", "lifting", check_hyperplane),
    ("dual-pairings", "dual pair defining pairings", "pairing", check_pairings),
    ("metric-pairing", "G_*X . F_*Y = -H(X, Y)", "pairing", check_metric_pairing),
    ("involution", "dual of the dual is (F, Phi)", "involution", check_involution),
    ("dual-structure", "H* = H, T*(X,Y) = -H(SX,Y), tau* = 0", "dual_structure", check_dual_structure),
    ("conjugate-connection", "Z H(X,Y) = H(nabla_Z X, Y) + H(X, nabla*_Z Y)", "conjugate", check_conjugate),
    ("normal-plane-change", "dual of (F, aF + bPhi) is (G/b, Psi - aG/b)", "normal_plane", check_normal_plane),
    ("principal-asymptotic", "principal directions of F are asymptotic for G", "duality_angle",
     check_duality_angle),
    ("blaschke-constant", "Blaschke constant c and dual constant -1/c", "blaschke", check_blaschke_constant),
    ("umbilic-fixed-line", "umbilic: Phi + lhat F constant", "fixed_line", check_fixed_line),
    ("pedal-is-dual", "pedal is the dual of every lifting", "pedal", check_pedal_dual),
    ("pedal-umbilical", "(G, Psi0) is umbilical", "umbilical", check_pedal_umbilical),
    ("congruence-laws", "pedal under f + a xi and a f + b xi", "congruence", check_congruence),
    ("projective-equivariance", "pedal of the transformed pair is G T^-1", "projective", check_projective),
    ("pedal-recovery", "(f, xi) recovered from (G, Psi0)", "recovery", check_recovery),
]


def run_checks(s: Scenario) -> list[CheckResult]:
    ctx = Context(s, sample_points(s))
    out = []
    for name, ref, tol_name, fn in CHECKS:
        tol = getattr(s.tolerances, tol_name)
        try:
            value = fn(ctx)
        except NotApplicable:
            continue
        except (PedalLabError, ArithmeticError, ValueError) as exc:
            out.append(CheckResult(name, ref, None, tol, False, len(ctx.points), f"{type(exc).__name__}: {exc}"))
            continue
        ok = bool(np.isfinite(value) and value <= tol)
        out.append(CheckResult(name, ref, float(value), tol, ok, len(ctx.points)))
    return out


__all__ = ["CHECKS", "CheckResult", "run_checks", "sample_points", "duality_angle", "unoriented_angle",
           "projective_maps"]
