"""``pedal-lab`` command line: verify, foliate, index, analyze."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import codim1, codim2, pedal
from .checks import run_checks, sample_points
from .config import Scenario, load_config
from .errors import ConfigError, IndefiniteMetricError, PedalLabError, SingularPointError
from .foliation import (FieldSpec, Polyline, TraceError, find_singular_points, line_field_index,
                        rational_string, refine_singular_point, trace_both_ways)

log = logging.getLogger("pedal_lab")

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, allow_nan=False) + "\n", encoding="utf-8", newline="\n")


def _g17(x: float) -> str:
    return format(float(x), ".17g")


def _list(a) -> list:
    return np.asarray(a, dtype=float).tolist()


# -- verify ---------------------------------------------------------------------


def cmd_verify(s: Scenario, out: Path) -> int:
    results = run_checks(s)
    ok = all(r.passed for r in results)
    _write_json(out / "verify.json", {"scenario": s.name, "all_pass": ok,
                                      "checks": [r.as_json() for r in results]})
    for r in results:
        res = "error" if r.max_residual is None else f"{r.max_residual:.3e}"
        print(f"{'PASS' if r.passed else 'FAIL'}  {r.name:<26} {res:>10}  (tol {r.tolerance:.0e})")
    return EXIT_OK if ok else EXIT_FAIL


# -- foliate --------------------------------------------------------------------


def field_spec(s: Scenario, kind: str | None = None, side: str | None = None) -> FieldSpec:
    return FieldSpec(s.lifting(), kind=kind or s.line_field, side=side or s.side, tol=s.tolerances.flag)


def _indexed_points(spec: FieldSpec, s: Scenario):
    points = find_singular_points(spec, grid=(s.nu * 2, s.nv * 2))
    for p in points:
        # keep the circle clear of the other singular points
        others = [np.linalg.norm(p.location - q.location) for q in points if q is not p]
        radius = min([s.radius] + [d / 3 for d in others])
        p.index = line_field_index(spec, p.location, radius, s.samples).index
    return points


def cmd_foliate(s: Scenario, out: Path) -> int:
    spec = field_spec(s)
    patch = s.patch()
    points = _indexed_points(spec, s)
    traces: list[tuple[int, Polyline]] = []
    for seed in s.seeds:
        for branch in (1, 2):
            try:
                line = trace_both_ways(spec.with_branch(branch), seed, s.step, s.max_steps, points)
            except TraceError as exc:
                log.warning("trace from %s stopped early: %s", seed, exc)
                line = exc.partial
            except SingularPointError as exc:
                log.warning("skipping seed %s: %s", seed, exc)
                continue
            traces.append((branch, line))
    rows = ["trace_id,step,u,v,x1,x2,x3,branch"]
    for tid, (branch, line) in enumerate(traces):
        for k, (u, v) in enumerate(line.vertices):
            x = patch((u, v))
            rows.append(",".join([str(tid), str(k), _g17(u), _g17(v), *map(_g17, x), str(branch)]))
    (out / "lines.csv").write_text("\n".join(rows) + "\n", encoding="utf-8", newline="\n")
    (out / "lines.svg").write_text(render_svg(s, traces, points), encoding="utf-8", newline="\n")
    print(f"{len(traces)} traces, {len(points)} singular points -> {out}")
    return EXIT_OK


def render_svg(s: Scenario, traces, points) -> str:
    (u0, u1), (v0, v1) = s.u, s.v
    w, h = u1 - u0, v1 - v0
    stroke = 0.003 * max(w, h)
    # flip v so it increases upwards
    lines = [f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="{u0:.6g} {-v1:.6g} {w:.6g} {h:.6g}" '
             f'width="800" height="{800 * h / w:.0f}">',
             f'<rect x="{u0:.6g}" y="{-v1:.6g}" width="{w:.6g}" height="{h:.6g}" fill="white" stroke="black" '
             f'stroke-width="{stroke:.3g}"/>']
    colors = {1: "#1f5fa8", 2: "#c0392b"}
    for tid, (branch, line) in enumerate(traces):
        pts = " ".join(f"{u:.6g},{-v:.6g}" for u, v in line.vertices)
        lines.append(f'<polyline id="trace-{tid}" points="{pts}" fill="none" stroke="{colors[branch]}" '
                     f'stroke-width="{stroke:.3g}"/>')
    r = 0.012 * max(w, h)
    for p in points:
        u, v = p.location
        label = "?" if p.index is None else rational_string(p.index)
        lines.append(f'<circle cx="{u:.6g}" cy="{-v:.6g}" r="{r:.3g}" fill="none" stroke="black" '
                     f'stroke-width="{stroke:.3g}"/>')
        lines.append(f'<text x="{u + 1.5 * r:.6g}" y="{-v - 1.5 * r:.6g}" font-size="{3 * r:.3g}">{label}</text>')
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


# -- index ----------------------------------------------------------------------


def cmd_index(s: Scenario, out: Path, point, kind: str) -> int:
    if kind == "umbilic":
        spec = field_spec(s, "principal", "primal")
    else:
        # a lifting is inflectional everywhere; inflections live on the dual side
        spec = field_spec(s, "asymptotic", "dual")
    start = np.asarray(point, dtype=float)
    loc = start
    try:
        cand = refine_singular_point(spec, start, max_step=s.radius)
        dev, thr = spec.deviation(cand)
        # only snap to a singular point close to the requested one
        if dev < thr and np.linalg.norm(cand - start) < 4 * s.radius:
            loc = cand
    except PedalLabError:
        pass
    dev, _ = spec.deviation(loc)
    res = line_field_index(spec, loc, s.radius, s.samples)
    record = {"location": _list(loc), "kind": kind, "deviation": float(dev), "index": rational_string(res.index),
              "raw": res.raw, "residual": res.residual, "radius": res.radius, "samples": res.samples}
    _write_json(out / "index.json", record)
    print(json.dumps(record))
    return EXIT_OK


# -- analyze --------------------------------------------------------------------


def cmd_analyze(s: Scenario, out: Path) -> int:
    patch, xi, imm = s.patch(), s.transversal_spec(), s.lifting()
    rows = []
    for p in sample_points(s):
        d1 = codim1.gauss_decompose(patch, xi, p)
        d2 = codim2.centro_decompose(imm, p)
        row = {"u": float(p[0]), "v": float(p[1]), "f": _list(patch(p)), "xi": _list(d1.frame[:, 2]),
               "h": _list(d1.h), "B": _list(d1.B), "tau1": _list(d1.tau),
               "T": _list(d2.T), "H": _list(d2.H), "S": _list(d2.S), "rho": _list(d2.rho), "tau": _list(d2.tau),
               "pedal": _list(pedal.projective_pedal(patch, xi, p).G)}
        try:
            du, di = codim2.singularity_deviations(d2)
            row["umbilic_deviation"], row["inflection_deviation"] = du, di
        except IndefiniteMetricError:
            pass
        rows.append(row)
    _write_json(out / "analyze.json", {"scenario": s.name, "points": rows})
    print(f"{len(rows)} points -> {out / 'analyze.json'}")
    return EXIT_OK


# -- entry point ----------------------------------------------------------------


def _point(text: str):
    try:
        u, v = (float(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected U,V, got {text!r}") from None
    return (u, v)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pedal-lab", description=__doc__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)
    for name, help_ in [("verify", "run the identity suite"), ("foliate", "trace line fields"),
                        ("index", "index of a singular point"), ("analyze", "dump grid tensors")]:
        p = sub.add_parser(name, help=help_)
        p.add_argument("config", type=Path)
        p.add_argument("--out", type=Path, default=Path("out"))
        if name == "index":
            p.add_argument("--point", type=_point, required=True)
            p.add_argument("--kind", choices=("umbilic", "inflection"), default=None)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        s = load_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        args.out.mkdir(parents=True, exist_ok=True)
        if args.command == "verify":
            return cmd_verify(s, args.out)
        if args.command == "foliate":
            return cmd_foliate(s, args.out)
        if args.command == "index":
            return cmd_index(s, args.out, args.point, args.kind or s.index_kind)
        return cmd_analyze(s, args.out)
    except (PedalLabError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
