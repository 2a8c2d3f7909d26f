from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, strategies as st

from pedal_lab.codim1 import blaschke_transversal
from pedal_lab.config import Scenario, Tolerances, dump, load_config, loads
from pedal_lab.errors import ConfigError

CONFIGS = sorted((Path(__file__).parent.parent / "configs").glob("*.conf"))

MINIMAL = """
[surface]
x = "u"
y = "v"
z = "(u^2 + v^2)/2"
"""


def test_minimal_defaults():
    s = loads(MINIMAL)
    assert s.transversal == "euclidean" and s.lam == "1" and s.mu == "0"
    assert s.u == (-1.0, 1.0) and s.seeds == ()
    assert s.tolerances == Tolerances()


def test_blaschke_sphere_config():
    s = load_config(Path(__file__).parent.parent / "configs" / "sphere.conf")
    at = (0.3, 0.7)
    b = blaschke_transversal(s.patch(), at)
    assert np.allclose(b.xi, -s.patch()(at), atol=1e-9)


def test_expression_error_names_key_and_offset():
    with pytest.raises(ConfigError) as exc:
        loads(MINIMAL + '[lifting]\nmu = "u+"\n', "demo.conf")
    msg = str(exc.value)
    assert "demo.conf:7" in msg and "lifting.mu" in msg and "offset 2" in msg


@pytest.mark.parametrize("text,fragment", [
    (MINIMAL + "[grid]\nnw = 3\n", "unknown key grid.nw"),
    (MINIMAL + "[mesh]\n", "unknown section"),
    (MINIMAL + "[grid]\nnu = 3\nnu = 4\n", "duplicate key"),
    ('[surface]\nx = "u"\ny = "v"\n', "missing required key surface.z"),
    (MINIMAL + "[transversal]\nkind = affine\n", "must be one of"),
    (MINIMAL + "[transversal]\nkind = explicit\nx = \"0\"\n", "needs x, y and z"),
    (MINIMAL + "[grid]\nnu = many\n", "cannot read"),
    (MINIMAL.replace('"u"', "u", 1), "double-quoted"),
    ("x = \"u\"\n", r"before any \[section\]"),
    (MINIMAL + "[surface]\nu = 1, -1\n", "empty range"),
])
def test_config_errors(text, fragment):
    with pytest.raises(ConfigError, match=fragment):
        loads(text)


def test_missing_file():
    with pytest.raises(ConfigError, match="cannot read"):
        load_config("/nonexistent/x.conf")


def test_comments_and_hash_in_quotes():
    s = loads('# c\n[surface]  # trailing\nx = "u"  # x\ny = "v"\nz = "u*v"\nname = a\n')
    assert s.x == "u" and s.name == "a"


@pytest.mark.parametrize("path", CONFIGS, ids=lambda p: p.stem)
def test_shipped_configs_round_trip(path):
    s = load_config(path)
    text = dump(s)
    assert loads(text) == s
    assert dump(loads(text)) == text


@given(st.floats(1e-3, 1.0), st.integers(2, 50), st.lists(st.tuples(st.floats(-1, 1), st.floats(-1, 1)),
                                                          max_size=4))
def test_dump_round_trip(step, nu, seeds):
    s = Scenario(x="u", y="v", z="sin(u*v)", step=step, nu=nu, seeds=tuple(seeds))
    assert loads(dump(s)) == s
