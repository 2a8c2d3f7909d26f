import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from pedal_lab.errors import JetDomainError
from pedal_lab.expr import parse_expression
from pedal_lab.jet import Jet, evaluate_jet, multi_indices, n_coefficients

import strategies
from oracles import fd_partial, monomial_partial


def richardson(e, at, i, j, h=2e-3):
    """Fourth-order accurate mixed partial from two central stencils."""
    return (4 * fd_partial(e, at, i, j, h / 2) - fd_partial(e, at, i, j, h)) / 3


@pytest.mark.parametrize("order", range(6))
def test_coefficient_count(order):
    assert len(multi_indices(order)) == n_coefficients(order) == (order + 1) * (order + 2) // 2


def test_storage_order():
    assert multi_indices(2) == ((0, 0), (0, 1), (1, 0), (0, 2), (1, 1), (2, 0))


def test_product_rule_example():
    j = evaluate_jet("u*v", (2, 3), 2)
    assert (j.value, j.partial(1, 0), j.partial(0, 1)) == (6, 3, 2)
    assert (j.partial(2, 0), j.partial(1, 1), j.partial(0, 2)) == (0, 1, 0)


def test_sine_at_zero():
    j = evaluate_jet("sin(u)", (0, 0), 2)
    assert j.value == 0 and j.partial(1, 0) == 1 and j.partial(2, 0) == 0


def test_exp_uv_against_finite_differences():
    e = parse_expression("exp(u*v)")
    j = evaluate_jet(e, (1, 2), 3)
    for i, k in multi_indices(3):
        fd = fd_partial(e, (1, 2), i, k)
        assert abs(j.partial(i, k) - fd) <= 1e-5 * max(1.0, abs(fd))


def test_arithmetic_keeps_order():
    a = evaluate_jet("u + v^2", (0.3, 0.2), 3)
    b = evaluate_jet("cos(u)", (0.3, 0.2), 3)
    for c in (a + b, a - b, a * b, a / b, a ** 2.5):
        assert c.order == 3


def test_mixed_orders_truncate_to_lower():
    a = evaluate_jet("u", (0.3, 0.2), 4)
    b = evaluate_jet("v", (0.3, 0.2), 2)
    assert (a * b).order == 2


def test_derivative_jet_shifts_coefficients():
    j = evaluate_jet("sin(u)*exp(v)", (0.4, -0.1), 4)
    dj = j.d(1, 1)
    assert dj.order == 2
    for i, k in multi_indices(2):
        assert dj.partial(i, k) == pytest.approx(j.partial(i + 1, k + 1), rel=1e-14)


def test_matrix_inverse_jet():
    at = (0.3, -0.4)
    entries = [["2 + u", "v"], ["sin(u*v)", "3 - v^2"]]
    M = Jet.stack([Jet.stack([evaluate_jet(e, at, 3) for e in row]) for row in entries], axis=-2)
    prod = M @ M.inv()
    assert np.allclose(prod.taylor[0], np.eye(2))
    assert np.allclose(prod.taylor[1:], 0, atol=1e-13)


@pytest.mark.parametrize("src", ["log(u - 1)", "1/(u - 0.5)", "sqrt(u - 2)"])
def test_domain_errors(src):
    with pytest.raises(JetDomainError):
        evaluate_jet(src, (0.5, 0.0), 2)


def test_non_constant_exponent():
    at = (0.7, 0.4)
    j = evaluate_jet("(1 + u)^v", at, 3)
    ref = evaluate_jet("exp(v*log(1 + u))", at, 3)
    assert np.allclose(j.coefficients, ref.coefficients, rtol=1e-14)


@given(strategies.expressions, strategies.points)
def test_partials_match_extrapolated_differences(src, at):
    e = parse_expression(src)
    j = evaluate_jet(e, at, 3)
    for i, k in multi_indices(3):
        ref = richardson(e, at, i, k)
        assert abs(j.partial(i, k) - ref) <= 1e-6 * max(1.0, abs(ref)), (src, at, i, k)


@given(strategies.polynomials(), strategies.points)
def test_polynomials_are_exact(poly, at):
    src, terms = poly
    j = evaluate_jet(src, at, 4)
    for i, k in multi_indices(4):
        exact = sum(monomial_partial(c, a, b, at, i, k) for c, a, b in terms)
        assert abs(j.partial(i, k) - exact) <= 1e-12 * max(1.0, abs(exact))


@given(st.floats(-3, 3), st.floats(-3, 3))
def test_integer_powers_are_exact(u, v):
    j = evaluate_jet("(u + 2*v)^3", (u, v), 4)
    assert j.partial(3, 0) == pytest.approx(6.0)
    assert j.partial(0, 3) == pytest.approx(48.0)
    assert j.partial(2, 2) == 0.0
    assert j.partial(1, 0) == pytest.approx(3 * (u + 2 * v) ** 2, abs=1e-12 * max(1.0, (u + 2 * v) ** 2))


def test_constant_folding_for_pi():
    j = evaluate_jet("sin(pi*u)", (0.5, 0.0), 2)
    assert j.value == pytest.approx(1.0)
    assert j.partial(2, 0) == pytest.approx(-math.pi ** 2)
