import json
from pathlib import Path

import pytest

from pedal_lab.cli import EXIT_FAIL, EXIT_NUMERIC, EXIT_OK, EXIT_USAGE, main

CONFIGS = Path(__file__).parent.parent / "configs"

SMALL_PARABOLOID = """
[surface]
name = small
x = "u"
y = "v"
z = "(u^2 + v^2)/2"

[transversal]
kind = explicit
x = "0"
y = "0"
z = "1"

[lifting]
lambda = "1 + 0.25*u^2"
mu = "0.5*v"

[grid]
nu = 3
nv = 3
"""

# -(1 + 0.5 u) f is transversal but not equiaffine
BAD_SPHERE = """
[surface]
name = bad_sphere
x = "cos(u)*cos(v)"
y = "cos(u)*sin(v)"
z = "sin(u)"
u = -1, 1
v = -1, 1

[transversal]
kind = explicit
x = "-(1 + 0.5*u)*cos(u)*cos(v)"
y = "-(1 + 0.5*u)*cos(u)*sin(v)"
z = "-(1 + 0.5*u)*sin(u)"

[grid]
nu = 3
nv = 3
"""


def write(tmp_path, text, name="s.conf"):
    p = tmp_path / name
    p.write_text(text)
    return p


@pytest.fixture(scope="module")
def ellipsoid_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("ellipsoid")
    assert main(["foliate", str(CONFIGS / "ellipsoid.conf"), "--out", str(out)]) == EXIT_OK
    return out


def test_verify_passes(tmp_path):
    out = tmp_path / "out"
    assert main(["verify", str(write(tmp_path, SMALL_PARABOLOID)), "--out", str(out)]) == EXIT_OK
    report = json.loads((out / "verify.json").read_text())
    assert report["all_pass"] and report["scenario"] == "small"
    for c in report["checks"]:
        assert set(c) >= {"name", "paper_ref", "max_residual", "tolerance", "pass", "samples"}
        assert c["samples"] == 9


def test_verify_flags_non_equiaffine_field(tmp_path):
    out = tmp_path / "out"
    assert main(["verify", str(write(tmp_path, BAD_SPHERE)), "--out", str(out)]) == EXIT_FAIL
    checks = {c["name"]: c for c in json.loads((out / "verify.json").read_text())["checks"]}
    assert not checks["equiaffinity"]["pass"]
    assert checks["codim1-reconstruction"]["pass"]


@pytest.mark.slow
def test_foliate_ellipsoid_outputs(ellipsoid_run):
    svg = (ellipsoid_run / "lines.svg").read_text()
    assert svg.count("<polyline") == 16
    assert svg.count("<circle") == 4
    assert svg.count(">1/2</text>") == 4
    rows = (ellipsoid_run / "lines.csv").read_text().splitlines()
    assert rows[0] == "trace_id,step,u,v,x1,x2,x3,branch"
    ids = {r.split(",")[0] for r in rows[1:]}
    assert ids == {str(i) for i in range(16)}
    assert {r.split(",")[-1] for r in rows[1:]} == {"1", "2"}


def test_foliate_without_seeds(tmp_path):
    text = (CONFIGS / "perturbed_paraboloid.conf").read_text().replace(
        'seeds = "0.2, 0.1; -0.2, 0.25; 0.1, -0.3; -0.3, -0.1"', 'seeds = ""')
    out = tmp_path / "out"
    assert main(["foliate", str(write(tmp_path, text)), "--out", str(out)]) == EXIT_OK
    assert (out / "lines.csv").read_text() == "trace_id,step,u,v,x1,x2,x3,branch\n"
    assert (out / "lines.svg").read_text().count("<circle") == 1


@pytest.mark.slow
def test_foliate_is_deterministic(tmp_path):
    cfg = str(CONFIGS / "perturbed_paraboloid.conf")
    assert main(["foliate", cfg, "--out", str(tmp_path / "a")]) == EXIT_OK
    assert main(["foliate", cfg, "--out", str(tmp_path / "b")]) == EXIT_OK
    for name in ("lines.csv", "lines.svg"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    assert b"\r" not in (tmp_path / "a" / "lines.csv").read_bytes()


@pytest.mark.parametrize("config,point,expected", [
    ("perturbed_paraboloid.conf", "0.02,-0.01", "-1/2"),
    ("perturbed_paraboloid.conf", "0.3,0.3", "0"),
    ("ellipsoid.conf", "0.9,0.05", "1/2"),
])
def test_index(tmp_path, capsys, config, point, expected):
    assert main(["index", str(CONFIGS / config), "--point", point, "--out", str(tmp_path)]) == EXIT_OK
    rec = json.loads((tmp_path / "index.json").read_text())
    assert rec["index"] == expected
    assert rec["residual"] < 0.05


def test_inflection_index_on_pedal_side(tmp_path):
    args = ["index", str(CONFIGS / "ellipsoid.conf"), "--point", "0.9,0.05", "--kind", "inflection",
            "--out", str(tmp_path)]
    assert main(args) == EXIT_OK
    assert json.loads((tmp_path / "index.json").read_text())["index"] == "1/2"


def test_analyze(tmp_path):
    assert main(["analyze", str(write(tmp_path, SMALL_PARABOLOID)), "--out", str(tmp_path / "o")]) == EXIT_OK
    pts = json.loads((tmp_path / "o" / "analyze.json").read_text())["points"]
    assert len(pts) == 9
    assert {"h", "B", "T", "H", "S", "pedal"} <= set(pts[0])


def test_bad_config_exits_2(tmp_path, capsys):
    bad = write(tmp_path, SMALL_PARABOLOID.replace('mu = "0.5*v"', 'mu = "u+"'))
    assert main(["verify", str(bad), "--out", str(tmp_path / "o")]) == EXIT_USAGE
    assert "lifting.mu" in capsys.readouterr().err


def test_missing_config_exits_2(tmp_path):
    assert main(["verify", str(tmp_path / "none.conf")]) == EXIT_USAGE


@pytest.mark.parametrize("config", ["saddle.conf", "sphere.conf"])
def test_foliate_numeric_failures_exit_3(tmp_path, capsys, config):
    # indefinite metric on the saddle; the Blaschke sphere is umbilic everywhere
    assert main(["foliate", str(CONFIGS / config), "--out", str(tmp_path)]) == EXIT_NUMERIC
    assert "numerical failure" in capsys.readouterr().err


def test_usage_error():
    with pytest.raises(SystemExit) as exc:
        main(["index", "x.conf", "--point", "nonsense"])
    assert exc.value.code == 2
