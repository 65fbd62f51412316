import math

import numpy as np
import pytest
from scipy import stats

from config.settings import worker_count
from model import montecarlo
from model.errors import ArgumentError, DomainError
from model.kernelmat import loe_cdf, maxheight_cdf
from model.montecarlo import (
    PathGrid,
    RngStream,
    SampleSummary,
    bridge_top_path,
    barrier_event,
    dyson_to_bridge,
    embed_hermitian,
    grid_refinement_study,
    height_event,
    hermitian_eigenvalues,
    hermitian_path_top,
    ks_statistic,
    sample_bridges,
    sample_bridges_max,
    sample_gue_top,
    sample_loe,
    sample_loe_max,
    time_change_to_dyson,
)


# -------------------- STREAMS AND GRIDS --------------------

def test_streams_are_reproducible_and_distinct():
    a = RngStream(7, 3).generator().standard_normal(4)
    b = RngStream(7, 3).generator().standard_normal(4)
    c = RngStream(7, 4).generator().standard_normal(4)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_stream_validation():
    with pytest.raises(ArgumentError):
        RngStream(-1, 0)
    with pytest.raises(ArgumentError):
        RngStream(2 ** 64, 0)
    with pytest.raises(ArgumentError):
        RngStream(1, -2)


def test_path_grids():
    assert PathGrid.uniform_in_s(2).times == (0.0, 0.5, 1.0)

    grid = PathGrid.uniform_in_s(100, s_max=3.0)
    t = grid.array
    assert grid.K == 100
    assert t[0] == 0.0 and t[-1] == 1.0
    assert np.all(np.diff(t) > 0)

    assert PathGrid.uniform_in_t(4).times == (0.0, 0.25, 0.5, 0.75, 1.0)

    with pytest.raises(ArgumentError):
        PathGrid.uniform_in_t(1)
    with pytest.raises(ArgumentError):
        PathGrid((0.0, 0.6, 0.4, 1.0))
    with pytest.raises(ArgumentError):
        PathGrid((0.1, 0.5, 1.0))


def test_worker_count_from_environment(monkeypatch):
    monkeypatch.setenv("BRIDGE_LOE_THREADS", "3")
    assert worker_count() == 3
    monkeypatch.setenv("BRIDGE_LOE_THREADS", "zero")
    with pytest.raises(ArgumentError):
        worker_count()


# -------------------- LOE --------------------

def test_loe_single_draw_is_deterministic():
    assert sample_loe_max(3, RngStream(11, 5)) == sample_loe_max(3, RngStream(11, 5))


def test_loe_samples_do_not_depend_on_chunking(monkeypatch):
    reference = sample_loe(2, 40, seed=9, workers=1)
    monkeypatch.setattr(montecarlo, "CHUNK_FLOAT_BUDGET", 64)
    split = sample_loe(2, 40, seed=9, workers=2)
    assert np.array_equal(reference.samples, split.samples)
    assert reference.label == "loe-N2"


def test_loe_sample_matches_first_draws():
    summary = sample_loe(3, 5, seed=4, workers=1)
    draws = sorted(sample_loe_max(3, RngStream(4, i)) for i in range(5))
    assert np.array_equal(summary.samples, np.array(draws))


def test_loe_one_against_exponential():
    summary = sample_loe(1, 2000, seed=21, workers=1)
    assert ks_statistic(summary, lambda s: -math.expm1(-0.5 * s) if s > 0 else 0.0) < 0.05


def test_loe_three_against_exact_cdf():
    summary = sample_loe(3, 1000, seed=22, workers=1)
    assert ks_statistic(summary, lambda s: loe_cdf(3, s)) < 0.07


# -------------------- HERMITIAN BRIDGES --------------------

def test_hermitian_embedding_spectrum():
    gen = np.random.default_rng(5)
    A = gen.standard_normal((4, 4)) + 1j * gen.standard_normal((4, 4))
    H = 0.5 * (A + A.conj().T)
    X, Y = H.real[None], H.imag[None]
    assert embed_hermitian(X, Y).shape == (1, 8, 8)
    eigenvalues, defect = hermitian_eigenvalues(X, Y)
    assert defect <= 1e-9
    assert np.allclose(eigenvalues[0], np.linalg.eigvalsh(H), atol=1e-9)


def test_path_top_matches_independent_diagonalization():
    gen = np.random.default_rng(8)
    steps = np.cumsum(0.05 * gen.standard_normal((3, 40, 4, 4, 2)), axis=1)
    A = steps[..., 0] + 1j * steps[..., 1]
    H = 0.5 * (A + np.conj(np.swapaxes(A, -1, -2)))
    top, defect = hermitian_path_top(H.real, H.imag)
    assert top.shape == (3, 40)
    assert defect <= 1e-9
    assert np.allclose(top, np.linalg.eigvalsh(H)[..., -1], atol=1e-10)


def test_bridge_midpoint_is_half_a_gue_matrix():
    # Var B(1/2) = 1/4, so the top bridge at t = 1/2 is half the GUE top eigenvalue
    grid = PathGrid.uniform_in_t(2, False)
    mid = montecarlo._bridge_paths(3, grid.array, 41, 0, 2000)[:, 1]
    gue = [sample_gue_top(3, RngStream(42, i), scale=0.5) for i in range(2000)]
    assert stats.ks_2samp(mid, gue).statistic < 0.07


def test_gue_top_is_standard_normal_for_one():
    draws = [sample_gue_top(1, RngStream(13, i)) for i in range(2000)]
    assert stats.kstest(draws, stats.norm.cdf).statistic < 0.05


def test_bridge_path_shape_and_pins():
    grid = PathGrid.uniform_in_t(50)
    path = bridge_top_path(3, grid, RngStream(2, 0))
    assert path.shape == (51,)
    assert path[0] == 0.0 and path[-1] == 0.0
    assert sample_bridges_max(3, grid, RngStream(2, 0)) == np.max(path)


def test_single_bridge_maximum_law():
    grid = PathGrid.uniform_in_t(200)
    summary = sample_bridges(1, 2000, seed=31, grid=grid, workers=1)
    assert summary.crossing_corrected
    assert summary.label == "bridges-N1-K200"
    assert ks_statistic(summary, lambda m: maxheight_cdf(1, m)) < 0.05


def test_two_bridges_against_loe():
    grid = PathGrid.uniform_in_s(400)
    summary = sample_bridges(2, 1500, seed=32, grid=grid, workers=1, scale=math.sqrt(2.0))
    cdf = lambda r: loe_cdf(2, 2.0 * r * r) if r > 0 else 0.0
    assert ks_statistic(summary, cdf) < 0.06


def test_crossing_correction_lowers_the_cdf():
    grid = PathGrid.uniform_in_t(20)
    corrected = sample_bridges(1, 300, seed=33, grid=grid, workers=1)
    plain = sample_bridges(1, 300, seed=33, grid=PathGrid(grid.times, False), workers=1)
    assert np.array_equal(corrected.samples, plain.samples)
    x = np.linspace(0.2, 2.0, 10)
    assert np.all(corrected.cdf(x) <= plain.cdf(x) + 1e-15)
    assert np.all((corrected.cdf(x) >= 0.0) & (corrected.cdf(x) <= 1.0))


def test_refinement_study_structure():
    study = grid_refinement_study(1, (20, 40, 80), n=100, seed=3, workers=1)
    assert study.K_list == (20, 40, 80)
    assert len(study.means) == 3 and len(study.shifts) == 2
    assert study.shifts[0] == pytest.approx(study.means[1] - study.means[0])
    assert math.isfinite(study.extrapolated)
    with pytest.raises(ArgumentError):
        grid_refinement_study(1, (40, 20))


def test_finer_grid_sees_higher_maxima():
    study = grid_refinement_study(1, (20, 80), n=4000, seed=9, workers=1)
    assert study.shifts[0] > 0.03


# -------------------- TIME CHANGE --------------------

def test_time_change_round_trip():
    t = np.array([0.1, 0.5, 0.93])
    B = np.array([0.2, -0.4, 1.1])
    s, lam = time_change_to_dyson(t, B)
    t2, B2 = dyson_to_bridge(s, lam)
    assert np.allclose(t2, t, atol=1e-15)
    assert np.allclose(B2, B, atol=1e-15)
    with pytest.raises(DomainError):
        time_change_to_dyson(np.array([0.0, 0.5]), np.zeros(2))


def test_barrier_and_height_events_coincide():
    grid = PathGrid.uniform_in_s(60)
    for path in montecarlo._bridge_paths(2, grid.array, 17, 0, 1000):
        top = math.sqrt(2.0) * np.max(path)
        for r in (0.5 * top, 0.99 * top, 1.01 * top, 2.0 * top, -1.0):
            assert barrier_event(grid, path, r) == height_event(path, r)


# -------------------- SCORING --------------------

def test_ks_needs_ten_samples():
    summary = SampleSummary("tiny", np.arange(5.0), 0)
    with pytest.raises(ArgumentError):
        ks_statistic(summary, lambda x: 0.5)


def test_ks_detects_a_shifted_model():
    grid = PathGrid.uniform_in_t(200)
    summary = sample_bridges(1, 2000, seed=31, grid=grid, workers=1)
    assert ks_statistic(summary, lambda m: maxheight_cdf(1, m)) < 0.05
    assert ks_statistic(summary, lambda m: maxheight_cdf(1, m - 0.2)) > 0.05


def test_ks_at_exact_quantiles_is_within_one_over_n():
    n = 400
    samples = -2.0 * np.log1p(-(np.arange(n) + 0.5) / n)
    summary = SampleSummary("quantiles", samples, 0)
    D = ks_statistic(summary, lambda s: -math.expm1(-0.5 * s) if s > 0 else 0.0)
    assert 0.5 / n - 1e-12 <= D <= 1.0 / n


def test_summary_rejects_unsorted():
    with pytest.raises(ArgumentError):
        SampleSummary("bad", np.array([2.0, 1.0]), 0)


@pytest.mark.slow
@pytest.mark.parametrize("N", [1, 2, 3, 5])
def test_bridge_acceptance_run(N):
    summary = sample_bridges(N, 20_000, grid=PathGrid.uniform_in_s(2000), scale=math.sqrt(2.0))
    cdf = lambda r: loe_cdf(N, 2.0 * r * r) if r > 0 else 0.0
    assert ks_statistic(summary, cdf) < 0.025


@pytest.mark.slow
@pytest.mark.parametrize("N", [1, 2, 4, 8])
def test_loe_acceptance_run(N):
    summary = sample_loe(N, 10_000)
    assert ks_statistic(summary, lambda s: loe_cdf(N, s)) < 0.02
