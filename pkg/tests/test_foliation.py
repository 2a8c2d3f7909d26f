import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pedal_lab import catalog
from pedal_lab.codim1 import Domain, TransversalSpec
from pedal_lab.codim2 import Codim2Data, centro_decompose
from pedal_lab.errors import (EverywhereSingularError, IndefiniteMetricError, SingularPointError, WindingError)
from pedal_lab.foliation import (FieldSpec, find_singular_points, line_field_index, rational_string, trace_both_ways,
                                 trace_line)

from oracles import winding_brute_force

BOX = Domain(-1.0, 1.0, -1.0, 1.0)


def synthetic(S_of):
    return FieldSpec(lambda at: Codim2Data.synthetic(S=S_of(*at)), domain_override=BOX)


STAR = synthetic(lambda u, v: [[u, -v], [-v, -u]])  # index -1/2
LEMON = synthetic(lambda u, v: [[u, v], [v, -u]])  # index +1/2
ELLIPSOID = catalog.ellipsoid()
ELL_SPEC = FieldSpec(ELLIPSOID.lifting(catalog.LAMBDA, catalog.MU, TransversalSpec("euclidean")))


def unit_angle(a, b):
    c = abs(float(np.dot(a, b)) / (np.linalg.norm(a) * np.linalg.norm(b)))
    return math.acos(min(1.0, c))


def test_synthetic_directions():
    dirs = {tuple(np.round(np.abs(STAR.with_branch(b)((1.0, 0.0))), 12)) for b in (1, 2)}
    assert dirs == {(1.0, 0.0), (0.0, 1.0)}


def test_synthetic_origin_is_singular():
    with pytest.raises(SingularPointError):
        STAR((0.0, 0.0))


def test_trivial_paraboloid_lifting_is_singular_everywhere():
    s = catalog.paraboloid()
    spec = FieldSpec(s.lifting())
    with pytest.raises(SingularPointError):
        spec((0.1, 0.2))
    with pytest.raises(EverywhereSingularError):
        find_singular_points(spec, grid=(8, 8))


def test_indefinite_gate():
    spec = FieldSpec(catalog.saddle().lifting(catalog.LAMBDA, catalog.MU))
    with pytest.raises(IndefiniteMetricError):
        spec((0.1, 0.1))
    with pytest.raises(IndefiniteMetricError):
        find_singular_points(spec, grid=(6, 6))


@settings(max_examples=15)
@given(st.floats(0.5, 2.6), st.floats(-0.7, 3.8))
def test_ellipsoid_directions_are_H_orthogonal(u, v):
    at = (u, v)
    try:
        d1, d2 = ELL_SPEC.with_branch(1)(at), ELL_SPEC.with_branch(2)(at)
    except SingularPointError:
        return
    data = centro_decompose(ELL_SPEC.source, at)
    H = data.H
    scale = math.sqrt((d1 @ H @ d1) * (d2 @ H @ d2))
    assert abs(d1 @ H @ d2) / scale < 1e-8
    # each branch is an eigendirection of S
    for d in (d1, d2):
        Sd = data.S @ d
        assert abs(Sd[0] * d[1] - Sd[1] * d[0]) < 1e-8 * (1 + np.abs(data.S).max())


def test_ellipsoid_umbilics_match_closed_form():
    found = find_singular_points(ELL_SPEC, grid=(24, 24))
    expected = catalog.ellipsoid_umbilics()
    assert len(found) == len(expected) == 4
    for e in expected:
        assert min(np.linalg.norm(p.location - e) for p in found) < 1e-3


def test_ellipsoid_umbilic_indices():
    for e in catalog.ellipsoid_umbilics():
        assert line_field_index(ELL_SPEC, e, 0.05).index == 0.5


def test_constant_field_index():
    r = line_field_index(lambda at: (1.0, 0.0), (0.0, 0.0), 0.3)
    assert r.index == 0 and r.residual < 1e-12


@pytest.mark.parametrize("spec,expected", [(STAR, -0.5), (LEMON, 0.5)])
def test_model_indices(spec, expected):
    r = line_field_index(spec, (0.0, 0.0), 0.2)
    assert float(r.index) == expected
    assert abs(winding_brute_force(spec, (0.0, 0.0), 0.2, 4000) - expected) < 1e-9
    assert rational_string(r.index) == ("-1/2" if expected < 0 else "1/2")


@pytest.mark.parametrize("spec", [STAR, LEMON])
def test_index_is_stable_under_radius_and_samples(spec):
    base = line_field_index(spec, (0.0, 0.0), 0.2).index
    assert line_field_index(spec, (0.0, 0.0), 0.1).index == base
    assert line_field_index(spec, (0.0, 0.0), 0.2, samples=512).index == base


def test_index_off_center_is_zero():
    assert line_field_index(STAR, (0.5, 0.5), 0.1).index == 0


def test_index_of_wild_field_raises():
    # angle jumps on every sample
    with pytest.raises(WindingError):
        line_field_index(lambda at: (math.cos(1e4 * at[0]), math.sin(1e4 * at[0])), (0.0, 0.0), 0.5,
                         samples=64, max_samples=256)


def test_perturbed_paraboloid_star():
    s = catalog.perturbed_paraboloid()
    spec = FieldSpec(s.lifting(transversal=TransversalSpec("euclidean")))
    pts = find_singular_points(spec, grid=(16, 16))
    assert len(pts) == 1
    assert np.linalg.norm(pts[0].location) < 1e-6
    assert line_field_index(spec, pts[0].location, 0.1).index == -0.5


def test_trace_constant_field():
    line = trace_line(lambda at: (1.0, 0.0), (0.0, 0.0), 0.01, 100)
    assert line.reason == "step-limit"
    assert np.allclose(line.vertices[-1], (1.0, 0.0), atol=1e-9)


def test_trace_stops_at_boundary():
    line = trace_line(lambda at: (1.0, 0.0), (0.0, 0.0), 0.1, 100, domain=BOX)
    assert line.reason == "boundary"
    assert BOX.contains(line.vertices[-1])


def test_trace_circle_closes():
    n = int(round(2 * math.pi / 0.001))
    line = trace_line(lambda at: (-at[1], at[0]), (1.0, 0.0), 0.001, n)
    assert np.linalg.norm(line.vertices[-1] - (1.0, 0.0)) < 1e-3
    assert np.abs(np.linalg.norm(line.vertices, axis=1) - 1).max() < 1e-6


def test_trace_stops_near_singular_point():
    line = trace_line(lambda at: (1.0, 0.0), (-0.5, 0.0), 0.01, 500, singular_points=[(0.0, 0.0)])
    assert line.reason == "singularity-proximity"
    assert np.linalg.norm(line.vertices[-1]) < 0.02 + 1e-12


def test_trace_from_singular_seed():
    with pytest.raises(SingularPointError):
        trace_line(STAR, (0.0, 0.0), 0.01, 10)


def test_ellipsoid_segments_follow_field():
    line = trace_line(ELL_SPEC, (1.5, 1.0), 0.01, 20)
    verts = line.vertices
    for a, b in zip(verts[:-1], verts[1:]):
        assert unit_angle(b - a, ELL_SPEC(0.5 * (a + b))) < 0.01


def test_trace_both_ways_passes_through_seed():
    line = trace_both_ways(lambda at: (1.0, 0.0), (0.0, 0.0), 0.1, 3)
    assert np.allclose(line.vertices[:, 0], [-0.3, -0.2, -0.1, 0.0, 0.1, 0.2, 0.3])
