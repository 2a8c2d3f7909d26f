"""Curvature lines and umbilics of the ellipsoid (1.5, 1.0, 0.5).

Runs ``verify``, ``foliate`` and ``index`` on configs/ellipsoid.conf and leaves
verify.json, lines.csv, lines.svg and index.json in the output directory.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from pedal_lab import catalog
from pedal_lab.cli import main as cli

CONFIG = Path(__file__).resolve().parent.parent / "configs" / "ellipsoid.conf"


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=Path("out/ellipsoid"))
    args = ap.parse_args()
    out = str(args.out)
    code = cli(["verify", str(CONFIG), "--out", out]) or cli(["foliate", str(CONFIG), "--out", out])
    for u, v in catalog.ellipsoid_umbilics():
        code = code or cli(["index", str(CONFIG), "--point", f"{u},{v}", "--out", out])
    return code


if __name__ == "__main__":
    sys.exit(main())
