"""Singular points and their indices on the catalog surfaces.

Prints one row per singular point: surface, field, side, location, index,
and the pre-rounding winding.  Usage: python3 scripts/index_table.py
"""

from __future__ import annotations

import argparse

import numpy as np

from pedal_lab import catalog
from pedal_lab.codim1 import TransversalSpec
from pedal_lab.errors import EverywhereSingularError, IndefiniteMetricError, PedalLabError, SingularPointError
from pedal_lab.foliation import FieldSpec, find_singular_points, line_field_index, rational_string


def rows(grid: int, radius: float):
    for s in catalog.all_surfaces():
        xi = TransversalSpec.euclidean() if s.name != "sphere" else s.generic
        imm = s.lifting(catalog.LAMBDA, catalog.MU, xi)
        for kind, side in (("principal", "primal"), ("asymptotic", "dual")):
            spec = FieldSpec(imm, kind=kind, side=side)
            try:
                pts = find_singular_points(spec, grid=(grid, grid))
            except IndefiniteMetricError:
                yield s.name, kind, side, "indefinite metric", "", ""
                continue
            except EverywhereSingularError as exc:
                yield s.name, kind, side, str(exc), "", ""
                continue
            if not pts:
                yield s.name, kind, side, "none", "", ""
            for p in pts:
                loc = f"({p.location[0]:.6f}, {p.location[1]:.6f})"
                # keep other singular points outside the circle
                gaps = [np.linalg.norm(p.location - q.location) / 3 for q in pts if q is not p]
                try:
                    r = line_field_index(spec, p.location, min([radius] + gaps))
                except SingularPointError:
                    # the circle meets more singular points: a curve, not an isolated point
                    yield s.name, kind, side, loc, "n/a", "not isolated"
                    continue
                except PedalLabError as exc:
                    yield s.name, kind, side, loc, "n/a", type(exc).__name__
                    continue
                yield s.name, kind, side, loc, rational_string(r.index), f"{r.raw:+.6f}"


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--grid", type=int, default=24)
    ap.add_argument("--radius", type=float, default=0.05)
    args = ap.parse_args()
    header = ("surface", "field", "side", "location", "index", "winding")
    print(" | ".join(header))
    print(" | ".join("---" for _ in header))
    for row in rows(args.grid, args.radius):
        print(" | ".join(row))


if __name__ == "__main__":
    main()
