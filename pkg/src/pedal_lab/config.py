"""Scenario files: a small sectioned ``key = value`` format.

Example::

    # ellipsoid with its Euclidean normal
    [surface]
    x = "1.5*sin(u)*cos(v)"
    y = "sin(u)*sin(v)"
    z = "0.5*cos(u)"
    u = 0.4, 2.74
    v = -0.8, 3.94

    [transversal]
    kind = euclidean

Expressions are double-quoted; numbers and words are bare.  ``#`` starts a
comment outside quotes.  Unknown sections or keys are errors.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

from .codim1 import SurfacePatch, TransversalSpec
from .codim2 import Lifting, lift
from .errors import ConfigError, ExpressionSyntaxError
from .expr import parse_expression


@dataclass(frozen=True)
class Tolerances:
    flag: float = 1e-6
    reconstruction: float = 1e-9
    equiaffinity: float = 1e-8
    conormal: float = 1e-10
    blaschke: float = 1e-7
    pairing: float = 1e-8
    involution: float = 1e-8
    dual_structure: float = 1e-7
    conjugate: float = 1e-6
    normal_plane: float = 1e-8
    duality_angle: float = 1e-6
    lifting: float = 1e-8
    fixed_line: float = 1e-7
    pedal: float = 1e-10
    umbilical: float = 1e-7
    congruence: float = 1e-8
    projective: float = 1e-7
    recovery: float = 1e-8


@dataclass(frozen=True)
class Scenario:
    x: str
    y: str
    z: str
    u: tuple[float, float] = (-1.0, 1.0)
    v: tuple[float, float] = (-1.0, 1.0)
    name: str = "scenario"
    transversal: str = "euclidean"
    xi: tuple[str, str, str] | None = None
    lam: str = "1"
    mu: str = "0"
    nu: int = 12
    nv: int = 12
    margin: float = 0.05
    step: float = 0.02
    max_steps: int = 400
    seeds: tuple[tuple[float, float], ...] = ()
    line_field: str = "principal"
    side: str = "primal"
    radius: float = 0.05
    samples: int = 256
    index_kind: str = "umbilic"
    tolerances: Tolerances = field(default_factory=Tolerances)

    def patch(self) -> SurfacePatch:
        return SurfacePatch.from_strings(self.x, self.y, self.z, u=self.u, v=self.v)

    def transversal_spec(self) -> TransversalSpec:
        if self.transversal == "explicit":
            return TransversalSpec.explicit(*self.xi)
        return TransversalSpec(self.transversal)

    def lifting(self) -> Lifting:
        return lift(self.patch(), self.transversal_spec(), self.lam, self.mu)

    def dump(self) -> str:
        return dump(self)


# section -> key -> (attribute, kind)
_SCHEMA: dict[str, dict[str, tuple[str, str]]] = {
    "surface": {"name": ("name", "word"), "x": ("x", "expr"), "y": ("y", "expr"), "z": ("z", "expr"),
                "u": ("u", "range"), "v": ("v", "range")},
    "transversal": {"kind": ("transversal", "word"), "x": ("xi0", "expr"), "y": ("xi1", "expr"),
                    "z": ("xi2", "expr")},
    "lifting": {"lambda": ("lam", "expr"), "mu": ("mu", "expr")},
    "grid": {"nu": ("nu", "int"), "nv": ("nv", "int"), "margin": ("margin", "float")},
    "trace": {"step": ("step", "float"), "max_steps": ("max_steps", "int"), "seeds": ("seeds", "points"),
              "field": ("line_field", "word"), "side": ("side", "word")},
    "index": {"radius": ("radius", "float"), "samples": ("samples", "int"), "kind": ("index_kind", "word")},
    "tolerances": {f.name: (f.name, "float") for f in fields(Tolerances)},
}
_REQUIRED = {"surface": ("x", "y", "z")}
_CHOICES = {
    "transversal": ("euclidean", "blaschke", "explicit"),
    "line_field": ("principal", "asymptotic"),
    "side": ("primal", "dual"),
    "index_kind": ("umbilic", "inflection"),
}

_LINE = re.compile(r"^\s*([A-Za-z_][A-Za-z0-9_]*)\s*=\s*(.*?)\s*$")
_SECTION = re.compile(r"^\s*\[\s*([A-Za-z_]+)\s*\]\s*$")


def _strip_comment(line: str) -> str:
    quoted = False
    for i, ch in enumerate(line):
        if ch == '"':
            quoted = not quoted
        elif ch == "#" and not quoted:
            return line[:i]
    return line


def _convert(raw: str, kind: str, where: str, path, lineno: int):
    def fail(msg):
        raise ConfigError(f"{where}: {msg}", path, lineno)

    if kind == "expr":
        if len(raw) >= 2 and raw[0] == raw[-1] == '"':
            text = raw[1:-1]
        elif re.fullmatch(r"[-+0-9.eE]+", raw):
            text = raw
        else:
            fail(f"expressions must be double-quoted, got {raw!r}")
        try:
            parse_expression(text)
        except ExpressionSyntaxError as exc:
            fail(f"{exc}")
        return text.strip()
    if kind == "word":
        return raw.strip('"')
    try:
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
        if kind == "range":
            lo, hi = (float(p) for p in raw.split(","))
            if not lo < hi:
                fail(f"empty range {raw!r}")
            return (lo, hi)
        if kind == "points":
            raw = raw.strip('"').strip()
            if not raw:
                return ()
            pts = []
            for chunk in raw.split(";"):
                a, b = (float(p) for p in chunk.split(","))
                pts.append((a, b))
            return tuple(pts)
    except ConfigError:
        raise
    except ValueError:
        fail(f"cannot read {raw!r} as {kind}")
    raise AssertionError(kind)


def loads(text: str, path=None) -> Scenario:
    values: dict[str, object] = {}
    tols: dict[str, float] = {}
    seen: set[tuple[str, str]] = set()
    section = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = _strip_comment(line).strip()
        if not body:
            continue
        m = _SECTION.match(body)
        if m:
            section = m.group(1)
            if section not in _SCHEMA:
                raise ConfigError(f"unknown section [{section}]", path, lineno)
            continue
        m = _LINE.match(body)
        if not m:
            raise ConfigError(f"expected 'key = value', got {body!r}", path, lineno)
        if section is None:
            raise ConfigError("entry before any [section]", path, lineno)
        key, raw = m.groups()
        if key not in _SCHEMA[section]:
            raise ConfigError(f"unknown key {section}.{key}", path, lineno)
        if (section, key) in seen:
            raise ConfigError(f"duplicate key {section}.{key}", path, lineno)
        seen.add((section, key))
        attr, kind = _SCHEMA[section][key]
        value = _convert(raw, kind, f"{section}.{key}", path, lineno)
        if attr in _CHOICES and value not in _CHOICES[attr]:
            raise ConfigError(f"{section}.{key} must be one of {', '.join(_CHOICES[attr])}, got {value!r}",
                              path, lineno)
        if section == "tolerances":
            tols[attr] = value
        else:
            values[attr] = value
    for section, keys in _REQUIRED.items():
        for key in keys:
            if (section, key) not in seen:
                raise ConfigError(f"missing required key {section}.{key}", path)
    xi = tuple(values.pop(f"xi{i}", None) for i in range(3))
    kind = values.get("transversal", "euclidean")
    if kind == "explicit":
        if None in xi:
            raise ConfigError("transversal.kind = explicit needs x, y and z", path)
        values["xi"] = xi
    elif any(c is not None for c in xi):
        raise ConfigError(f"transversal components given but kind is {kind}", path)
    return Scenario(**values, tolerances=replace(Tolerances(), **tols))


def load_config(path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}", str(path)) from exc
    return loads(text, str(path))


def _num(x) -> str:
    return repr(float(x))


def dump(s: Scenario) -> str:
    """Canonical text form; ``loads(dump(s)) == s`` and the dump is a fixed point."""
    out = ["[surface]", f"name = {s.name}"]
    out += [f'{k} = "{getattr(s, k)}"' for k in ("x", "y", "z")]
    out += [f"u = {_num(s.u[0])}, {_num(s.u[1])}", f"v = {_num(s.v[0])}, {_num(s.v[1])}", ""]
    out += ["[transversal]", f"kind = {s.transversal}"]
    if s.xi is not None:
        out += [f'{k} = "{e}"' for k, e in zip("xyz", s.xi)]
    out += ["", "[lifting]", f'lambda = "{s.lam}"', f'mu = "{s.mu}"', ""]
    out += ["[grid]", f"nu = {s.nu}", f"nv = {s.nv}", f"margin = {_num(s.margin)}", ""]
    seeds = "; ".join(f"{_num(a)}, {_num(b)}" for a, b in s.seeds)
    out += ["[trace]", f"step = {_num(s.step)}", f"max_steps = {s.max_steps}", f'seeds = "{seeds}"',
            f"field = {s.line_field}", f"side = {s.side}", ""]
    out += ["[index]", f"radius = {_num(s.radius)}", f"samples = {s.samples}", f"kind = {s.index_kind}", ""]
    out += ["[tolerances]"] + [f"{f.name} = {_num(getattr(s.tolerances, f.name))}" for f in fields(Tolerances)]
    return "\n".join(out) + "\n"
