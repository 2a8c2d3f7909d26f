import numpy as np
import pytest
from hypothesis import given, strategies as st

from pedal_lab import catalog
from pedal_lab.codim1 import SurfacePatch, TransversalSpec, equiaffinity_residual
from pedal_lab.codim2 import dual_pair, lift, singularity_deviations
from pedal_lab.errors import PoleError, SingularFrameError
from pedal_lab.pedal import (CovectorImmersion, PedalMap, ProjectiveMap, apply_projective, congruence_move_reference,
                             congruence_rescale_field, pedal_invariant_residual, pedal_structure,
                             projective_pair_structure, projective_pedal, recover_from_pedal,
                             rescaled_pair_structure)

from test_codim1 import surface_points

PARABOLOID = SurfacePatch.from_strings("u", "v", "(u^2 + v^2)/2")
UP = TransversalSpec.explicit("0", "0", "1")
SPHERE = catalog.sphere()
MINUS_F = TransversalSpec.explicit("-cos(u)*cos(v)", "-cos(u)*sin(v)", "-sin(u)")

unit = st.floats(-1, 1)


@given(unit, unit)
def test_paraboloid_pedal(u, v):
    G = projective_pedal(PARABOLOID, UP, (u, v)).G
    assert np.allclose(G, [-u, -v, 1, (u * u + v * v) / 2], atol=1e-12)


def test_sphere_pedal():
    at = (0.3, -1.2)
    G = projective_pedal(SPHERE.patch, MINUS_F, at).G
    assert np.allclose(G, np.append(-SPHERE.patch(at), 1.0), atol=1e-12)


@given(surface_points())
def test_pedal_pairings(case):
    s, at = case
    assert pedal_invariant_residual(s.patch, s.transversal, at) < 1e-10


@given(surface_points(), st.sampled_from(["1", catalog.LAMBDA, "2 + sin(u*v)"]),
       st.sampled_from(["0", catalog.MU, "-2"]))
def test_pedal_is_dual_of_any_lifting(case, lam, mu):
    s, at = case
    G = projective_pedal(s.patch, s.transversal, at).G
    assert np.allclose(dual_pair(s.lifting(lam, mu), at).G, G, atol=1e-10 * max(1, np.abs(G).max()))


@given(surface_points(definite_only=True))
def test_pedal_pair_is_umbilical(case):
    s, at = case
    for xi in (s.transversal, s.generic):
        assert singularity_deviations(pedal_structure(PedalMap(s.patch, xi), at))[0] < 1e-7


@given(unit, unit)
def test_recover_paraboloid(u, v):
    r = recover_from_pedal(PedalMap(PARABOLOID, UP), (u, v))
    assert np.allclose(r.f, [u, v, (u * u + v * v) / 2], atol=1e-9)
    assert np.allclose(r.xi, [0, 0, 1], atol=1e-9)


def test_recover_sphere():
    at = (0.5, 2.0)
    r = recover_from_pedal(PedalMap(SPHERE.patch, MINUS_F), at)
    assert np.allclose(r.f, SPHERE.patch(at), atol=1e-9)
    assert np.allclose(r.xi, -SPHERE.patch(at), atol=1e-9)


def test_recover_from_explicit_covectors():
    G = CovectorImmersion.from_strings("-u", "-v", "1", "(u^2 + v^2)/2")
    r = recover_from_pedal(G, (0.2, 0.4))
    assert np.allclose(r.f, [0.2, 0.4, 0.1])


def test_recover_needs_transversal_psi0():
    G = CovectorImmersion.from_strings("u", "v", "0", "1")
    with pytest.raises(SingularFrameError):
        recover_from_pedal(G, (0.2, 0.4))


@given(surface_points())
def test_recover_round_trip(case):
    s, at = case
    xi = TransversalSpec.explicit("0", "0", "1") if s.name not in ("sphere", "ellipsoid") else s.generic
    r = recover_from_pedal(PedalMap(s.patch, xi), at)
    assert np.allclose(r.f, s.patch(at), atol=1e-8)


def test_projective_map_is_unimodular():
    T = ProjectiveMap.random(np.random.default_rng(0))
    assert abs(abs(np.linalg.det(T.matrix)) - 1) < 1e-12


def test_identity_map_keeps_pedal():
    at = (0.3, 0.1)
    r = apply_projective(PARABOLOID, UP, ProjectiveMap.identity(), at)
    assert np.allclose(r.pedal, projective_pedal(PARABOLOID, UP, at).G, atol=1e-14)


def test_translation():
    r = apply_projective(PARABOLOID, UP, ProjectiveMap.translation([1, 0, 0]), (0.3, -0.6))
    assert r.residual < 1e-9
    assert np.allclose(r.f, PARABOLOID((0.3, -0.6)) + [1, 0, 0])


def test_random_maps_on_paraboloid():
    rng = np.random.default_rng(11)
    pts = PARABOLOID.domain.sample(rng, 20)
    for _ in range(20):
        T = ProjectiveMap.random(rng)
        for p in pts:
            assert apply_projective(PARABOLOID, UP, T, p).residual < 1e-7


@given(surface_points(), st.integers(0, 2 ** 32 - 1))
def test_projective_image_stays_equiaffine(case, seed):
    s, at = case
    T = ProjectiveMap.random(np.random.default_rng(seed))
    try:
        d = projective_pair_structure(s.patch, s.transversal, T, at)
    except PoleError:
        return
    assert equiaffinity_residual(d) < 1e-7 * max(1.0, np.abs(d.h).max())


def test_move_along_field_paraboloid():
    u, v = 0.4, -0.3
    r = congruence_move_reference(PARABOLOID, UP, 1.0, (u, v))
    # p is the last pedal coordinate -nu.f, so f + a xi shifts it by -a
    assert np.allclose(r.actual, [-u, -v, 1, (u * u + v * v) / 2 - 1], atol=1e-12)
    assert r.residual < 1e-12


def test_move_by_zero():
    r = congruence_move_reference(PARABOLOID, UP, 0.0, (0.2, 0.2))
    assert np.allclose(r.actual, projective_pedal(PARABOLOID, UP, (0.2, 0.2)).G)


def test_move_sphere():
    at = (0.2, 0.9)
    r = congruence_move_reference(SPHERE.patch, MINUS_F, 0.5, at)
    assert np.allclose(r.actual, np.append(-SPHERE.patch(at), 0.5), atol=1e-12)


def test_rescale_by_constant():
    at = (0.2, -0.7)
    r = congruence_rescale_field(PARABOLOID, UP, 0.0, 2.0, at)
    assert np.allclose(r.actual, projective_pedal(PARABOLOID, UP, at).G / 2)


def test_rescale_paraboloid():
    u, v = 0.5, 0.3
    q = (u * u + v * v) / 2
    r = congruence_rescale_field(PARABOLOID, UP, 1.0, 1.0, (u, v))
    assert np.allclose(r.actual, np.array([-u, -v, 1, q]) / (1 - q), atol=1e-12)
    assert r.residual < 1e-12


def test_rescale_pole():
    at = (0.5, 0.3)
    p = projective_pedal(PARABOLOID, UP, at).p
    with pytest.raises(PoleError):
        congruence_rescale_field(PARABOLOID, UP, 1.0, p, at)


@given(surface_points(), st.floats(-0.3, 0.3), st.floats(0.5, 2.0), st.floats(-0.3, 0.3))
def test_congruence_laws(case, a, b, shift):
    s, at = case
    assert congruence_move_reference(s.patch, s.transversal, shift, at).residual < 1e-8
    try:
        r = congruence_rescale_field(s.patch, s.transversal, a, b, at)
    except PoleError:
        return
    assert r.residual < 1e-8
    assert equiaffinity_residual(rescaled_pair_structure(s.patch, s.transversal, a, b, at)) < 1e-8


def test_pedal_of_lifting_matches_on_saddle():
    s = catalog.saddle()
    at = (0.2, 0.3)
    assert np.allclose(dual_pair(lift(s.patch, s.transversal), at).G, projective_pedal(s.patch, s.transversal, at).G)
