import math

import numpy as np
import pytest
from scipy import special

from model.errors import ArgumentError, DomainError
from model.specfun import (
    GAUSS_HERMITE,
    GAUSS_LEGENDRE,
    HERMITE_PHI,
    LAGUERRE_PSI,
    LAGUERRE_PSI_INTEGRAL,
    OrthoFunctionId,
    airy_ai,
    airy_ai_series,
    evaluate_ortho,
    hermite_phi_row,
    interval_rule,
    laguerre_psi_integral_row,
    laguerre_psi_row,
    mapped_rule,
    quadrature_rule,
    row_entry,
)


# -------------------- ORTHOGONAL FUNCTIONS --------------------

def test_hermite_functions_are_orthonormal():
    rule = quadrature_rule(GAUSS_HERMITE, 60)
    phi = hermite_phi_row(29, rule.nodes)
    gram = (phi * rule.scaled_weights) @ phi.T
    assert np.max(np.abs(gram - np.eye(30))) < 1e-12


def test_hermite_row_matches_scipy_polynomials():
    x = np.linspace(-4.0, 4.0, 17)
    row = hermite_phi_row(10, x)
    for n in (0, 3, 10):
        norm = math.sqrt(2.0 ** n * math.factorial(n) * math.sqrt(math.pi))
        expected = special.eval_hermite(n, x) * np.exp(-0.5 * x * x) / norm
        assert np.allclose(row[n], expected, atol=1e-13)


def test_rows_keep_input_shape():
    x = np.zeros((3, 4))
    assert hermite_phi_row(5, x).shape == (6, 3, 4)
    assert laguerre_psi_row(5, x).shape == (6, 3, 4)
    assert hermite_phi_row(2, 0.5).shape == (3,)


def test_laguerre_functions_are_orthonormal():
    x, w = interval_rule(0.0, 250.0)
    psi = laguerre_psi_row(15, x)
    gram = (psi * w) @ psi.T
    assert np.max(np.abs(gram - np.eye(16))) < 1e-10


def test_laguerre_row_matches_scipy():
    x = np.array([0.0, 0.3, 2.0, 11.5])
    row = laguerre_psi_row(12, x)
    for n in (0, 1, 7, 12):
        assert np.allclose(row[n], special.eval_laguerre(n, x) * np.exp(-0.5 * x), atol=1e-12)


def test_psi_integral_matches_quadrature():
    s = 3.7
    x, w = interval_rule(0.0, s)
    expected = laguerre_psi_row(10, x) @ w
    assert np.allclose(laguerre_psi_integral_row(10, s), expected, atol=1e-13)


@pytest.mark.parametrize("s", [0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0])
def test_psi_recurrence_matches_quadrature_up_to_degree_twenty(s):
    x, w = interval_rule(0.0, s)
    expected = laguerre_psi_row(20, x) @ w
    assert np.allclose(laguerre_psi_integral_row(20, s), expected, rtol=0.0, atol=1e-12)


def test_psi_integral_at_zero_and_limit():
    assert np.all(laguerre_psi_integral_row(6, 0.0) == 0.0)
    # int_0^inf psi_n = 2 (-1)^n
    tail = laguerre_psi_integral_row(6, 400.0)
    assert np.allclose(tail, 2.0 * (-1.0) ** np.arange(7), atol=1e-12)


def test_negative_degree_is_zero():
    assert evaluate_ortho(HERMITE_PHI, -1, 0.7) == 0.0
    assert evaluate_ortho(LAGUERRE_PSI_INTEGRAL, -3, 1.2) == 0.0
    assert row_entry(laguerre_psi_row(3, 1.0), -1) == 0.0


def test_ortho_function_id_evaluates_member():
    f = OrthoFunctionId(LAGUERRE_PSI, 4)
    assert f(2.5) == pytest.approx(laguerre_psi_row(4, 2.5)[4], abs=1e-15)
    with pytest.raises(ArgumentError):
        OrthoFunctionId("chebyshev", 1)
    with pytest.raises(ArgumentError):
        OrthoFunctionId(HERMITE_PHI, -1)


def test_invalid_arguments():
    with pytest.raises(ArgumentError):
        laguerre_psi_row(3, -0.1)
    with pytest.raises(ArgumentError):
        hermite_phi_row(3, np.nan)
    with pytest.raises(ArgumentError):
        hermite_phi_row(-1, 0.0)


# -------------------- AIRY --------------------

def test_airy_matches_scipy_away_from_seam():
    x = np.concatenate([
        np.linspace(-12.0, -7.5, 60),
        np.linspace(-6.0, 6.0, 121),
        np.linspace(7.5, 40.0, 60),
    ])
    assert np.max(np.abs(airy_ai(x) - special.airy(x)[0])) < 1e-11


def test_airy_seam_is_continuous():
    x = np.concatenate([np.linspace(-7.5, -6.5, 41), np.linspace(6.5, 7.5, 41)])
    assert np.max(np.abs(airy_ai(x) - special.airy(x)[0])) < 1e-10


def test_airy_decaying_tail_relative_accuracy():
    x = np.linspace(8.0, 40.0, 33)
    ref = special.airy(x)[0]
    assert np.max(np.abs(airy_ai(x) / ref - 1.0)) < 1e-8


def test_airy_special_values():
    assert airy_ai(0.0) == pytest.approx(0.355028053887817, abs=1e-14)
    assert 0.0 < airy_ai(40.0) < 1e-70


def test_airy_series_agrees_inside_switch():
    x = np.linspace(-7.0, 7.0, 29)
    assert np.array_equal(airy_ai(x), airy_ai_series(x))


def test_airy_outside_domain():
    with pytest.raises(DomainError):
        airy_ai(-12.5)
    with pytest.raises(DomainError):
        airy_ai(np.array([0.0, 41.0]))


# -------------------- QUADRATURE --------------------

def test_gauss_hermite_moments():
    rule = quadrature_rule(GAUSS_HERMITE, 20)
    assert rule.integrate(np.ones(20)) == pytest.approx(math.sqrt(math.pi), rel=1e-14)
    assert rule.integrate(rule.nodes ** 2) == pytest.approx(0.5 * math.sqrt(math.pi), rel=1e-14)
    assert rule.integrate(rule.nodes ** 5) == pytest.approx(0.0, abs=1e-13)
    assert np.allclose(rule.nodes, -rule.nodes[::-1], atol=0.0)


def test_gauss_hermite_matches_numpy():
    nodes, weights = np.polynomial.hermite.hermgauss(40)
    rule = quadrature_rule(GAUSS_HERMITE, 40)
    assert np.allclose(rule.nodes, nodes, atol=1e-13)
    assert np.allclose(rule.weights, weights, rtol=1e-10, atol=1e-300)


def test_high_order_scaled_weights_stay_positive():
    rule = quadrature_rule(GAUSS_HERMITE, 400)
    assert np.all(np.isfinite(rule.scaled_weights))
    assert np.all(rule.scaled_weights > 0)
    # raw weights at the outermost nodes fall below the smallest subnormal
    assert np.all(rule.weights >= 0)
    assert rule.weights[0] == 0.0 and rule.weights[-1] == 0.0


def test_gauss_legendre_matches_numpy():
    nodes, weights = np.polynomial.legendre.leggauss(30)
    rule = quadrature_rule(GAUSS_LEGENDRE, 30)
    assert np.allclose(rule.nodes, nodes, atol=1e-14)
    assert np.allclose(rule.weights, weights, atol=1e-14)
    assert rule.integrate(rule.nodes ** 58) == pytest.approx(2.0 / 59.0, rel=1e-12)


def test_rules_are_cached_and_read_only():
    rule = quadrature_rule(GAUSS_LEGENDRE, 12)
    assert quadrature_rule(GAUSS_LEGENDRE, 12) is rule
    with pytest.raises(ValueError):
        rule.nodes[0] = 1.0


@pytest.mark.parametrize("m", [0, 513, 2.5])
def test_bad_quadrature_order(m):
    with pytest.raises(ArgumentError):
        quadrature_rule(GAUSS_HERMITE, m)


def test_unknown_quadrature_kind():
    with pytest.raises(ArgumentError):
        quadrature_rule("gauss-jacobi", 4)


def test_mapped_and_interval_rules():
    x, w = mapped_rule(5, 1.0, 3.0)
    assert np.dot(w, x ** 2) == pytest.approx(26.0 / 3.0, rel=1e-14)

    x, w = interval_rule(0.0, 30.0)
    assert np.dot(w, np.exp(-x)) == pytest.approx(-math.expm1(-30.0), rel=1e-13)

    x, w = interval_rule(2.0, 2.0)
    assert x.size == 0 and w.size == 0

    with pytest.raises(ArgumentError):
        interval_rule(1.0, 0.0)
