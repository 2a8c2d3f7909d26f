"""Reference surfaces used by the tests, the experiment scripts and the shipped configs."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .codim1 import SurfacePatch, TransversalSpec
from .codim2 import Lifting, lift


@dataclass(frozen=True)
class CatalogSurface:
    name: str
    patch: SurfacePatch
    transversal: TransversalSpec
    definite: bool
    # an equiaffine transversal whose shape operator is not a multiple of the
    # identity on an open set, so that line fields are defined
    generic: TransversalSpec

    def lifting(self, lam="1", mu="0", transversal: TransversalSpec | None = None) -> Lifting:
        return lift(self.patch, transversal or self.transversal, lam, mu)


# a lifting with non-constant scale and normal-plane twist; positive on every chart below
LAMBDA = "exp(0.2*u - 0.1*v)"
MU = "0.3*u + 0.2*v^2"

RANDOM_POLY = "0.62*u^2 + 0.41*v^2 + 0.17*u*v - 0.08*u^3 + 0.05*u*v^2 + 0.03*v^3"

ELLIPSOID_AXES = (1.5, 1.0, 0.5)


def paraboloid() -> CatalogSurface:
    f = SurfacePatch.from_strings("u", "v", "(u^2 + v^2)/2", u=(-1.0, 1.0), v=(-1.0, 1.0))
    return CatalogSurface("paraboloid", f, TransversalSpec.explicit("0", "0", "1"), True, TransversalSpec.euclidean())


def sphere() -> CatalogSurface:
    # latitude chart: regular on the whole rectangle
    f = SurfacePatch.from_strings("cos(u)*cos(v)", "cos(u)*sin(v)", "sin(u)", u=(-1.2, 1.2), v=(-2.5, 2.5))
    # -(1 + u/5) f - f_u/5 is equiaffine: its derivative is tangent
    tilted = TransversalSpec.explicit("-(1 + 0.2*u)*cos(u)*cos(v) + 0.2*sin(u)*cos(v)",
                                      "-(1 + 0.2*u)*cos(u)*sin(v) + 0.2*sin(u)*sin(v)",
                                      "-(1 + 0.2*u)*sin(u) - 0.2*cos(u)")
    return CatalogSurface("sphere", f, TransversalSpec.blaschke(), True, tilted)


def ellipsoid() -> CatalogSurface:
    a, b, c = ELLIPSOID_AXES
    f = SurfacePatch.from_strings(f"{a}*sin(u)*cos(v)", f"{b}*sin(u)*sin(v)", f"{c}*cos(u)",
                                  u=(0.4, math.pi - 0.4), v=(-0.8, math.pi + 0.8))
    return CatalogSurface("ellipsoid", f, TransversalSpec.blaschke(), True, TransversalSpec.euclidean())


def saddle() -> CatalogSurface:
    f = SurfacePatch.from_strings("u", "v", "(u^2 - v^2)/2", u=(-1.0, 1.0), v=(-1.0, 1.0))
    return CatalogSurface("saddle", f, TransversalSpec.blaschke(), False, TransversalSpec.euclidean())


def perturbed_paraboloid() -> CatalogSurface:
    f = SurfacePatch.from_strings("u", "v", "(u^2 + v^2)/2 + 0.1*(u^3 - 3*u*v^2)", u=(-0.5, 0.5), v=(-0.5, 0.5))
    return CatalogSurface("perturbed_paraboloid", f, TransversalSpec.blaschke(), True, TransversalSpec.euclidean())


def random_polynomial() -> CatalogSurface:
    f = SurfacePatch.from_strings("u", "v", RANDOM_POLY, u=(-0.8, 0.8), v=(-0.8, 0.8))
    return CatalogSurface("random_polynomial", f, TransversalSpec.blaschke(), True, TransversalSpec.euclidean())


BUILDERS = {
    "paraboloid": paraboloid,
    "sphere": sphere,
    "ellipsoid": ellipsoid,
    "saddle": saddle,
    "perturbed_paraboloid": perturbed_paraboloid,
    "random_polynomial": random_polynomial,
}


def get(name: str) -> CatalogSurface:
    return BUILDERS[name]()


def all_surfaces(definite_only: bool = False) -> list[CatalogSurface]:
    out = [build() for build in BUILDERS.values()]
    return [s for s in out if s.definite or not definite_only]


def ellipsoid_umbilics() -> list[tuple[float, float]]:
    """Chart coordinates of the four umbilics of the ellipsoid.

    Classical positions: y = 0, x = +-a sqrt((a^2-b^2)/(a^2-c^2)),
    z = +-c sqrt((b^2-c^2)/(a^2-c^2)).
    """
    a, b, c = ELLIPSOID_AXES
    x = a * math.sqrt((a * a - b * b) / (a * a - c * c))
    z = c * math.sqrt((b * b - c * c) / (a * a - c * c))
    out = []
    for sx in (1, -1):
        for sz in (1, -1):
            # x = a sin u cos v, z = c cos u with sin u > 0 on the chart
            u = math.acos(sz * z / c)
            v = 0.0 if sx * x / (a * math.sin(u)) > 0 else math.pi
            out.append((u, v))
    return sorted(out)
