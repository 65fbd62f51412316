import math

import numpy as np
import pytest

from model.errors import ArgumentError
from model.fredholm import (
    FGOE_AT_ZERO_BRACKET,
    FredholmProblem,
    airy_kernel,
    fgoe,
    finite_n_scaled_cdf,
    fredholm_det,
    loe_soft_edge_cdf,
    matched_soft_edge_argument,
    nystrom_matrix,
    tw_limit_compare,
)
from model.kernelmat import maxheight_cdf


# -------------------- NYSTROM --------------------

def test_nystrom_matrix_is_symmetric():
    A = nystrom_matrix(FredholmProblem(-1.0, 16, 8.0))
    assert A.shape == (16, 16)
    assert np.array_equal(A, A.T)


def test_airy_kernel_truncates_far_arguments():
    z = np.array([0.0, 39.0, 41.0, 100.0])
    values = airy_kernel(z)
    assert values[2] == 0.0 and values[3] == 0.0
    assert values[0] > 0.3


def test_zero_kernel_gives_unit_determinant():
    problem = FredholmProblem(0.0, 16, 6.0)
    assert fredholm_det(problem, kernel=np.zeros_like) == 1.0


def test_problem_validation():
    with pytest.raises(ArgumentError):
        FredholmProblem(0.0, m=4)
    with pytest.raises(ArgumentError):
        FredholmProblem(0.0, T=2.0)
    with pytest.raises(ArgumentError):
        FredholmProblem(math.inf)
    doubled = FredholmProblem(1.0, 32, 10.0).doubled()
    assert (doubled.m, doubled.T) == (64, 20.0)


# -------------------- F_GOE --------------------

def test_fgoe_is_a_monotone_cdf():
    s = np.linspace(-6.0, 4.0, 100)
    values = np.array([fgoe(x) for x in s])
    assert np.all(np.diff(values) >= -1e-12)
    assert values[0] < 1e-3
    assert values[-1] > 0.999


def test_fgoe_tails():
    assert fgoe(5.0) > 0.9999
    assert fgoe(-8.0) < 1e-6


def test_fgoe_stable_under_doubling():
    coarse = fredholm_det(FredholmProblem(-2.0, 128, 24.0))
    fine = fredholm_det(FredholmProblem(-2.0, 256, 48.0))
    assert abs(coarse - fine) < 1e-8


def test_fgoe_at_zero_self_converges():
    coarse = fredholm_det(FredholmProblem(0.0, 100, 12.0))
    fine = fredholm_det(FredholmProblem(0.0, 200, 16.0))
    assert abs(coarse - fine) < 1e-8
    assert FGOE_AT_ZERO_BRACKET[0] < fine < FGOE_AT_ZERO_BRACKET[1]


def test_fgoe_argument_range():
    with pytest.raises(ArgumentError):
        fgoe(10.5)
    with pytest.raises(ArgumentError):
        fgoe(-11.0)


# -------------------- FINITE N --------------------

def test_scaled_cdf_is_maxheight():
    N, s = 9, -1.0
    m = 3.0 + 0.5 * s * N ** (-1.0 / 6.0)
    assert finite_n_scaled_cdf(N, s) == pytest.approx(maxheight_cdf(N, m), abs=1e-15)


@pytest.mark.parametrize("N", [4, 8, 16])
def test_scalings_describe_one_law(N):
    for s in np.linspace(-3.0, 1.5, 10):
        sigma = matched_soft_edge_argument(N, s)
        assert loe_soft_edge_cdf(N, sigma) == pytest.approx(finite_n_scaled_cdf(N, s), abs=1e-9)


def test_tw_limit_convergence():
    result = tw_limit_compare([8, 16, 32], np.linspace(-4.0, 2.0, 13))
    errors = [result.errors[N] for N in (8, 16, 32)]
    assert errors[0] > errors[1] > errors[2]
    assert errors[2] <= 0.1
    assert all(result.matched_diff[N] <= 1e-9 for N in (8, 16, 32))
    assert result.limit.shape == (13,)
    assert set(result.G) == {8, 16, 32}


def test_tw_limit_rejects_small_n_and_wide_grid():
    with pytest.raises(ArgumentError):
        tw_limit_compare([2, 8], [0.0])
    with pytest.raises(ArgumentError):
        tw_limit_compare([8], [-6.0, 0.0])


def test_single_bridge_scaled_cdf_closed_form():
    # N = 1: P(max <= m) = 1 - exp(-2 m^2) with m = 1 + s / 2
    for s in (-1.5, -0.5, 0.0, 1.0, 3.0):
        m = 1.0 + 0.5 * s
        assert finite_n_scaled_cdf(1, s) == pytest.approx(-math.expm1(-2.0 * m * m), abs=1e-13)


def test_larger_n_is_closer_to_the_limit_at_zero():
    limit = fgoe(0.0)
    assert abs(finite_n_scaled_cdf(64, 0.0) - limit) < abs(finite_n_scaled_cdf(16, 0.0) - limit)
