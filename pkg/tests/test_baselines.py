"""Tests for the benchmark factor extractors and the penalized regression."""

import math
import warnings

import numpy as np
import pytest

import gosdpca.baselines as baselines
from gosdpca.baselines import (
    LassoFit,
    lasso_bic,
    lasso_coordinate_descent,
    lyb_factors,
    sw_factors,
)
from gosdpca.errors import ConvergenceError, InputError
from gosdpca.series import SeriesMatrix


def standardized(x, y):
    """Internal scaling convention: mean 0, population variance 1."""
    means = x.mean(axis=0)
    sds = np.sqrt(((x - means) ** 2).mean(axis=0))
    return (x - means) / sds, y - y.mean()


def lambda_max(x, y):
    xs, cy = standardized(x, y)
    return float(np.max(np.abs(xs.T @ cy))) / len(y)


def kkt_max_violation(x, y, fit):
    """Stationarity residual of a soft-threshold fit on the scaled design."""
    xs, cy = standardized(x, y)
    sds = np.sqrt(((x - x.mean(axis=0)) ** 2).mean(axis=0))
    b = fit.coefficients * sds
    g = xs.T @ (cy - xs @ b) / len(y)
    worst = 0.0
    for j in range(len(b)):
        if b[j] == 0.0:
            worst = max(worst, abs(g[j]) - fit.lam)
        else:
            worst = max(worst, abs(g[j] - fit.lam * math.copysign(1.0, b[j])))
    return worst


def centered_orthonormal_design(rng, n, p):
    """Columns that survive internal standardization unchanged.

    QR of a centered matrix gives orthonormal columns orthogonal to the
    ones vector; scaling by sqrt(n) makes each column have mean 0 and
    population variance exactly 1 while keeping X'X/n = I.
    """
    a = rng.normal(size=(n, p))
    a -= a.mean(axis=0)
    q_mat, _ = np.linalg.qr(a)
    return math.sqrt(n) * q_mat


def test_sw_two_identical_columns():
    rng = np.random.default_rng(0)
    a = rng.normal(size=500)
    panel = sw_factors(np.column_stack([a, a]), r=1)
    assert panel.eigenvalues[0] == pytest.approx(2.0, abs=1e-10), (
        "perfectly correlated pair must give top correlation eigenvalue 2"
    )
    assert panel.loadings[:, 0] == pytest.approx(
        np.full(2, 1 / math.sqrt(2)), abs=1e-10
    )
    assert float(np.mean(panel.factors[:, 0] ** 2)) == pytest.approx(2.0, abs=1e-8)


def test_sw_identity_covariance_eigenvalues_near_one():
    rng = np.random.default_rng(1)
    panel = sw_factors(rng.normal(size=(5000, 5)), r=5)
    assert np.max(np.abs(np.asarray(panel.eigenvalues) - 1.0)) < 0.1, (
        "independent columns should give correlation eigenvalues near 1"
    )
    gram = panel.loadings.T @ panel.loadings
    assert gram == pytest.approx(np.eye(5), abs=1e-10), "loadings not orthonormal"


def test_sw_factors_are_projections_of_standardized_data():
    rng = np.random.default_rng(2)
    x = rng.normal(size=(120, 6)) * np.array([1, 2, 5, 0.2, 3, 1.5])
    series = SeriesMatrix(x, tuple(f"v{j}" for j in range(6)))
    panel = sw_factors(series, r=3)
    z, _ = standardized(x, np.zeros(120))
    assert panel.factors == pytest.approx(z @ panel.loadings, abs=1e-10)
    assert panel.method == "sw"
    assert panel.t_start == 0
    assert panel.r == 3
    diffs = np.diff(panel.eigenvalues)
    assert np.all(diffs <= 1e-12), "eigenvalues must be sorted descending"


def test_sw_zero_variance_column_dropped_with_warning():
    rng = np.random.default_rng(3)
    x = rng.normal(size=(200, 4))
    x[:, 2] = 7.25
    with pytest.warns(UserWarning):
        panel = sw_factors(x, r=2)
    assert panel.loadings.shape == (4, 2), "loadings must keep one row per column"
    assert panel.loadings[2] == pytest.approx(np.zeros(2), abs=0.0), (
        "dropped column must get an exactly-zero loading row"
    )
    assert np.all(np.isfinite(panel.factors))


def test_sw_r_out_of_range():
    rng = np.random.default_rng(4)
    x = rng.normal(size=(50, 3))
    with pytest.raises(InputError):
        sw_factors(x, r=0)
    with pytest.raises(InputError):
        sw_factors(x, r=4)
    x[:, 0] = 1.0
    with pytest.raises(InputError), warnings.catch_warnings():
        warnings.simplefilter("ignore")
        sw_factors(x, r=3)


def test_sw_sign_convention_largest_entry_positive():
    rng = np.random.default_rng(5)
    panel = sw_factors(rng.normal(size=(300, 8)), r=4)
    for k in range(4):
        v = panel.loadings[:, k]
        assert v[int(np.argmax(np.abs(v)))] > 0, f"factor {k} violates sign rule"


def test_lyb_white_noise_eigenvalue_shrinks_with_sample_size():
    tops = {200: [], 800: []}
    for seed in range(5):
        rng = np.random.default_rng(100 + seed)
        draws = rng.normal(size=(1000, 8))
        for n in (200, 800):
            panel = lyb_factors(draws[:n], q=2, r=1)
            tops[n].append(panel.eigenvalues[0])
    assert np.mean(tops[800]) < np.mean(tops[200]), (
        "autocovariance eigenvalues of white noise must shrink as n grows"
    )


def test_lyb_recovers_common_autoregressive_factor():
    rng = np.random.default_rng(6)
    n, p = 1000, 20
    f = np.zeros(n)
    for t in range(1, n):
        f[t] = 0.8 * f[t - 1] + rng.normal()
    lam = rng.uniform(0.5, 1.5, size=p)
    x = np.outer(f, lam) + 0.3 * rng.normal(size=(n, p))
    panel = lyb_factors(x, q=2, r=1)
    corr = np.corrcoef(panel.factors[:, 0], f)[0, 1]
    assert abs(corr) > 0.95, f"extracted factor decorrelated from truth: {corr:.3f}"


def test_lyb_eigenvalues_nonnegative_and_sorted():
    rng = np.random.default_rng(7)
    panel = lyb_factors(rng.normal(size=(150, 10)), q=3, r=10)
    vals = np.asarray(panel.eigenvalues)
    assert vals[0] >= 0
    assert np.all(vals >= -1e-8 * vals[0]), (
        "sum of C(l) C(l)' terms is non-negative definite"
    )
    assert np.all(np.diff(vals) <= 1e-12)


def test_lyb_factors_are_projections_of_demeaned_data():
    rng = np.random.default_rng(8)
    x = rng.normal(size=(90, 5)) + 4.0
    panel = lyb_factors(x, q=1, r=2)
    z = x - x.mean(axis=0)
    assert panel.factors == pytest.approx(z @ panel.loadings, abs=1e-10)
    assert panel.method == "lyb"
    assert panel.t_start == 0
    gram = panel.loadings.T @ panel.loadings
    assert gram == pytest.approx(np.eye(2), abs=1e-10)


def test_lyb_matches_looped_autocovariance_oracle():
    rng = np.random.default_rng(9)
    n, p, q = 50, 4, 2
    x = rng.normal(size=(n, p))
    z = x - x.mean(axis=0)
    target = np.zeros((p, p))
    for lag in range(1, q + 1):
        cov = np.zeros((p, p))
        for t in range(lag, n):
            cov += np.outer(z[t], z[t - lag])
        cov /= n
        target += cov @ cov.T
    ref_vals = np.linalg.eigvalsh(target)[::-1]
    panel = lyb_factors(x, q=q, r=p)
    assert panel.eigenvalues == pytest.approx(ref_vals, abs=1e-10), (
        "vectorized autocovariance eigenvalues disagree with looped oracle"
    )


def test_lyb_validation():
    rng = np.random.default_rng(10)
    x = rng.normal(size=(30, 3))
    with pytest.raises(InputError):
        lyb_factors(x, q=0, r=1)
    with pytest.raises(InputError):
        lyb_factors(x[:5], q=3, r=1)
    with pytest.raises(InputError):
        lyb_factors(x, q=1, r=4)


def test_lasso_zero_penalty_matches_least_squares():
    rng = np.random.default_rng(11)
    n, p = 80, 10
    x = rng.normal(size=(n, p))
    y = x @ rng.normal(size=p) + 0.5 * rng.normal(size=n) + 2.0
    fit = lasso_coordinate_descent(x, y, 0.0)
    d = np.column_stack([np.ones(n), x])
    ref = np.linalg.solve(d.T @ d, d.T @ y)
    assert fit.intercept == pytest.approx(ref[0], abs=1e-6)
    assert fit.coefficients == pytest.approx(ref[1:], abs=1e-6), (
        "unpenalized fit must match the normal equations"
    )


def test_lasso_at_lambda_max_all_zero():
    rng = np.random.default_rng(12)
    x = rng.normal(size=(60, 8))
    y = x[:, 0] + rng.normal(size=60)
    fit = lasso_coordinate_descent(x, y, lambda_max(x, y))
    assert fit.nonzero_count == 0, "penalty at the activation threshold keeps b = 0"
    assert fit.coefficients == pytest.approx(np.zeros(8), abs=0.0)
    assert fit.intercept == pytest.approx(float(np.mean(y)), abs=1e-12)


def test_lasso_orthonormal_design_soft_threshold():
    rng = np.random.default_rng(13)
    n, p = 100, 6
    x = centered_orthonormal_design(rng, n, p)
    y = x @ np.array([2.0, -1.0, 0.4, 0.0, 0.05, -3.0]) + 0.1 * rng.normal(size=n)
    lam = 0.5
    fit = lasso_coordinate_descent(x, y, lam)
    cy = y - y.mean()
    c = x.T @ cy / n
    expected = np.sign(c) * np.maximum(np.abs(c) - lam, 0.0)
    assert fit.coefficients == pytest.approx(expected, abs=1e-8), (
        "orthonormal design must reproduce the soft-threshold closed form"
    )


def test_lasso_kkt_conditions_random_problems():
    shapes = [(60, 10), (50, 80), (100, 30), (40, 40), (70, 120)]
    for i, (n, p) in enumerate(shapes * 2):
        rng = np.random.default_rng(200 + i)
        x = rng.normal(size=(n, p))
        beta = np.zeros(p)
        beta[: min(5, p)] = rng.normal(size=min(5, p)) * 2
        y = x @ beta + rng.normal(size=n)
        fit = lasso_coordinate_descent(x, y, 0.3 * lambda_max(x, y))
        viol = kkt_max_violation(x, y, fit)
        assert viol <= 1e-6, f"KKT violation {viol:.2e} on problem {i} ({n}x{p})"


def test_lasso_nonconvergence_raises_with_last_fit(monkeypatch):
    rng = np.random.default_rng(14)
    n = 100
    base = rng.normal(size=(n, 1))
    x = base + 0.01 * rng.normal(size=(n, 10))
    y = x @ np.ones(10) + rng.normal(size=n)
    monkeypatch.setattr(baselines, "MAX_SWEEPS", 1)
    with pytest.raises(ConvergenceError) as excinfo:
        lasso_coordinate_descent(x, y, 0.001)
    last = excinfo.value.last_fit
    assert isinstance(last, LassoFit), "error must carry the last iterate"
    assert np.all(np.isfinite(last.coefficients))


def test_lasso_bic_sweep_cap_warns_and_still_returns(monkeypatch):
    rng = np.random.default_rng(15)
    n = 80
    base = rng.normal(size=(n, 1))
    x = base + 0.01 * rng.normal(size=(n, 8))
    y = x @ np.ones(8) + rng.normal(size=n)
    monkeypatch.setattr(baselines, "MAX_SWEEPS", 2)
    with pytest.warns(UserWarning, match="sweep cap"):
        fit = lasso_bic(x, y, path_len=20)
    assert isinstance(fit, LassoFit)
    assert math.isfinite(fit.bic)


def test_lasso_bic_pure_noise_selects_null_model_at_largest_lambda():
    rng = np.random.default_rng(16)
    x = rng.normal(size=(200, 10))
    y = rng.normal(size=200)
    fit = lasso_bic(x, y)
    assert fit.nonzero_count == 0, "pure noise should keep the null model"
    assert fit.lam == pytest.approx(lambda_max(x, y), rel=1e-12), (
        "ties on the flat null stretch must resolve to the largest penalty"
    )


def test_lasso_bic_recovers_planted_support():
    rng = np.random.default_rng(17)
    n, p = 200, 30
    x = rng.normal(size=(n, p))
    beta = np.zeros(p)
    beta[[3, 11, 27]] = [4.0, -3.5, 5.0]
    y = x @ beta + rng.normal(size=n)
    fit = lasso_bic(x, y)
    support = set(np.flatnonzero(fit.coefficients).tolist())
    assert {3, 11, 27} <= support, f"missed planted coefficients: {support}"
    assert fit.nonzero_count <= 10, f"too many spurious picks: {fit.nonzero_count}"
    assert fit.coefficients[3] > 0 > fit.coefficients[11]


def test_lasso_path_nonzeros_monotone_on_orthonormal_design():
    rng = np.random.default_rng(18)
    n, p = 120, 8
    x = centered_orthonormal_design(rng, n, p)
    y = x @ np.linspace(2.0, 0.1, p) + 0.2 * rng.normal(size=n)
    lam0 = lambda_max(x, y)
    counts = []
    for lam in np.geomspace(lam0, 1e-3 * lam0, 25):
        counts.append(lasso_coordinate_descent(x, y, float(lam)).nonzero_count)
    assert np.all(np.diff(counts) >= 0), f"nonzero counts not monotone: {counts}"


def test_lasso_bic_wide_design_walks_to_the_path_floor():
    # with more columns than rows the criterion keeps improving as the fit
    # densifies, so the selection lands at the path end; the default floor
    # there is one percent of the all-zero penalty
    rng = np.random.default_rng(21)
    n, p = 60, 150
    x = rng.normal(size=(n, p))
    y = x @ rng.normal(size=p) + rng.normal(size=n)
    fit = lasso_bic(x, y)
    assert fit.lam == pytest.approx(0.01 * lambda_max(x, y), rel=1e-9), (
        "wide-design default walk should reach the one-percent floor"
    )
    assert fit.nonzero_count > p // 4, (
        f"dense-end fit expected, got {fit.nonzero_count} nonzeros"
    )


def test_lasso_bic_max_active_caps_the_walk():
    rng = np.random.default_rng(19)
    n, p = 60, 120
    x = rng.normal(size=(n, p))
    y = x @ (0.2 * rng.normal(size=p)) + rng.normal(size=n)
    fit = lasso_bic(x, y, max_active=10)
    assert fit.nonzero_count <= 10, (
        "path walk must stop before fits beyond the active-set budget"
    )
    with pytest.raises(InputError):
        lasso_bic(x, y, max_active=0)


def test_lasso_input_validation():
    rng = np.random.default_rng(20)
    x = rng.normal(size=(30, 4))
    y = rng.normal(size=30)
    with pytest.raises(InputError):
        lasso_coordinate_descent(x, y, -0.1)
    with pytest.raises(InputError):
        lasso_coordinate_descent(x, y[:-1], 0.1)
    with pytest.raises(InputError):
        lasso_bic(x, y, path_len=1)
    with pytest.raises(InputError):
        lasso_bic(x, y, lambda_min_ratio=1.0)
