"""Tests for the empirical diagnostics module."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats
from scipy.optimize import linear_sum_assignment

import sgula.metrics as metrics
from sgula import (
    DensityEstimate,
    empirical_moment2,
    kde_silverman,
    loglog_slope,
    mode_detect,
    relative_model_error,
    silverman_bandwidth,
    sliced_w2,
    wasserstein_1d,
)


# ---------------------------------------------------------------------------
# Wasserstein distances

def test_w1_tiny_cases():
    assert wasserstein_1d([0.0], [3.0]) == 3.0
    assert wasserstein_1d([0.0, 1.0], [1.0, 0.0]) == 0.0
    assert wasserstein_1d([0.0, 0.0], [1.0, 3.0], order=2) == pytest.approx(np.sqrt(5.0))


def test_w1_matches_scipy():
    rng = np.random.default_rng(1)
    a = rng.standard_normal(500)
    b = rng.standard_normal(500) + 0.3
    assert wasserstein_1d(a, b) == pytest.approx(stats.wasserstein_distance(a, b))


def test_w2_matches_assignment_oracle():
    # the sorted coupling must equal the optimal transport plan in 1D
    rng = np.random.default_rng(2)
    a = rng.standard_normal(60)
    b = rng.uniform(-2, 2, 60)
    cost = (a[:, None] - b[None, :]) ** 2
    rows, cols = linear_sum_assignment(cost)
    oracle = np.sqrt(cost[rows, cols].mean())
    assert wasserstein_1d(a, b, order=2) == pytest.approx(oracle)


def test_unequal_sizes_resampled():
    rng = np.random.default_rng(3)
    a = rng.standard_normal(100_000)
    b = rng.standard_normal(999)
    # both empirical laws are N(0,1); the quantile-resampled distance is small
    assert wasserstein_1d(a, b) < 0.08
    assert wasserstein_1d(a, a[:999]) < 0.12


def test_wasserstein_validation():
    with pytest.raises(ValueError):
        wasserstein_1d([], [1.0])
    with pytest.raises(ValueError):
        wasserstein_1d([1.0], [1.0], order=3)


@settings(max_examples=50, deadline=None)
@given(shift=st.floats(-50, 50), scale=st.floats(0.01, 20))
def test_w1_translation_and_scale_equivariance(shift, scale):
    rng = np.random.default_rng(4)
    a = rng.standard_normal(64)
    b = rng.standard_normal(64) + 1.0
    base = wasserstein_1d(a, b)
    assert wasserstein_1d(a + shift, b + shift) == pytest.approx(base, abs=1e-9)
    assert wasserstein_1d(scale * a, scale * b) == pytest.approx(scale * base, rel=1e-9)


def test_sliced_w2_basics():
    rng = np.random.default_rng(5)
    a = rng.standard_normal((400, 3))
    assert sliced_w2(a, a) == 0.0
    v = np.array([1.0, 2.0, -2.0])
    shifted = sliced_w2(a, a + v, n_proj=512)
    # per direction u the distance is |v . u|; the root mean square over
    # uniform directions is |v| / sqrt(d)
    assert shifted == pytest.approx(np.linalg.norm(v) / np.sqrt(3), rel=0.1)
    assert sliced_w2(a, a + v, seed=9) == sliced_w2(a, a + v, seed=9)
    with pytest.raises(ValueError):
        sliced_w2(a, rng.standard_normal((10, 2)))
    with pytest.raises(ValueError):
        sliced_w2(a, a, n_proj=0)


def test_empirical_moment2():
    assert empirical_moment2([[3.0, 4.0], [0.0, 0.0]]) == pytest.approx(12.5)
    assert empirical_moment2([1.0, -1.0]) == pytest.approx(1.0)   # 1D promoted
    with pytest.raises(ValueError):
        empirical_moment2([])


# ---------------------------------------------------------------------------
# Kernel density estimation

def test_silverman_formula():
    rng = np.random.default_rng(6)
    s = rng.standard_normal((1000, 2)) * np.array([1.0, 3.0])
    h = silverman_bandwidth(s)
    want = s.std(axis=0, ddof=1) * (4.0 / (4 * 1000)) ** (1.0 / 6.0)
    assert np.allclose(h, want)
    with pytest.raises(ValueError):
        silverman_bandwidth(np.array([[1.0]]))
    with pytest.raises(ValueError):
        silverman_bandwidth(np.zeros((10, 1)))


def test_kde_integrates_to_one_and_tracks_gaussian():
    rng = np.random.default_rng(7)
    s = rng.standard_normal(20_000)
    est = kde_silverman(s)
    assert est.integral() == pytest.approx(1.0, abs=0.01)
    x = est.axes[0]
    assert np.max(np.abs(est.values - stats.norm.pdf(x))) < 0.02


def test_kde_exact_and_binned_agree(monkeypatch):
    rng = np.random.default_rng(8)
    s = rng.standard_normal((5000, 2))
    axes = [np.linspace(-4, 4, 101)] * 2
    exact = kde_silverman(s, axes=axes)
    monkeypatch.setattr(metrics, "_EXACT_KDE_BUDGET", 0)
    binned = kde_silverman(s, axes=axes)
    assert np.max(np.abs(exact.values - binned.values)) < 2e-3
    assert np.allclose(exact.bandwidth, binned.bandwidth)


def test_kde_bandwidth_scale_smooths():
    rng = np.random.default_rng(9)
    s = rng.standard_normal(5000)
    narrow = kde_silverman(s, axes=[np.linspace(-4, 4, 201)])
    wide = kde_silverman(s, axes=[np.linspace(-4, 4, 201)], bandwidth_scale=3.0)
    assert np.allclose(wide.bandwidth, 3.0 * narrow.bandwidth)
    assert wide.values.max() < narrow.values.max()
    with pytest.raises(ValueError):
        kde_silverman(s, bandwidth_scale=0.0)


def test_density_csv(tmp_path):
    est = DensityEstimate(axes=[np.array([0.0, 1.0]), np.array([0.0, 1.0])],
                          values=np.arange(4.0).reshape(2, 2),
                          bandwidth=np.array([1.0, 1.0]))
    path = tmp_path / "density.csv"
    est.to_csv(path)
    lines = path.read_text().strip().split("\n")
    assert lines[0] == "x1,x2,density"
    assert lines[1] == "0,0,0"
    assert len(lines) == 5
    assert est.cell_volume == 1.0


# ---------------------------------------------------------------------------
# Mode detection

def _bump_grid():
    x = np.linspace(-5, 5, 201)
    xx, yy = np.meshgrid(x, x, indexing="ij")
    v = (np.exp(-((xx + 2) ** 2 + yy ** 2))
         + 0.5 * np.exp(-((xx - 2) ** 2 + (yy - 1) ** 2)))
    return DensityEstimate(axes=[x, x], values=v, bandwidth=np.array([1.0, 1.0]))


def test_mode_detect_finds_bumps_in_order():
    modes = mode_detect(_bump_grid(), min_separation=1.0)
    assert len(modes) == 2
    assert np.allclose(modes[0], [-2.0, 0.0], atol=0.05)   # taller bump first
    assert np.allclose(modes[1], [2.0, 1.0], atol=0.05)


def test_mode_detect_suppression_radius():
    modes = mode_detect(_bump_grid(), min_separation=10.0)
    assert len(modes) == 1
    with pytest.raises(ValueError):
        mode_detect(DensityEstimate(axes=[np.array([])], values=np.array([]),
                                    bandwidth=np.array([1.0])), 1.0)


# ---------------------------------------------------------------------------
# Rate fitting

def test_loglog_slope_recovers_power_law():
    lams = np.array([0.2, 0.1, 0.05, 0.025])
    fit = loglog_slope(lams, 3.0 * lams ** 0.5)
    assert fit.slope == pytest.approx(0.5)
    assert np.exp(fit.intercept) == pytest.approx(3.0)
    assert fit.r_squared == pytest.approx(1.0)


def test_loglog_slope_validation():
    with pytest.raises(ValueError):
        loglog_slope([0.1, 0.1, 0.1], [1.0, 1.0, 1.0])
    with pytest.raises(ValueError):
        loglog_slope([0.1, 0.2], [1.0, 2.0])
    with pytest.raises(ValueError):
        loglog_slope([0.1, 0.2, -0.3], [1.0, 2.0, 3.0])


# ---------------------------------------------------------------------------
# Relative model error

def test_relative_model_error_hand_case():
    sigma = np.array([[2.0, 0.0], [0.0, 1.0]])
    star = np.array([1.0, 0.0])
    hat = np.array([2.0, 1.0])      # delta (1, 1): ME = 2 + 1 = 3
    ols = np.array([1.0, 2.0])      # delta (0, 2): ME = 4
    me, rme = relative_model_error(hat, star, sigma, ols)
    assert me == pytest.approx(3.0)
    assert rme == pytest.approx(0.75)


def test_relative_model_error_edge_cases():
    sigma = np.eye(2)
    star = np.zeros(2)
    assert relative_model_error(star, star, sigma, star) == (0.0, 0.0)
    with pytest.raises(ZeroDivisionError):
        relative_model_error(np.ones(2), star, sigma, star)
    with pytest.raises(ValueError):
        relative_model_error(np.ones(3), star, sigma, np.zeros(2))
