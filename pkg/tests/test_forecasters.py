"""Tests for the one-shot forecaster adapters."""

import numpy as np
import pytest

from gosdpca.errors import InputError
from gosdpca.forecasters import (
    GoSdpcaForecaster,
    LassoForecaster,
    LybForecaster,
    NaiveForecaster,
    SdpcaForecaster,
    SwForecaster,
    TruthOracleForecaster,
)
from gosdpca.pipeline import GoSdpcaConfig, fit_go_sdpca, predict_go_sdpca
from gosdpca.series import SeriesMatrix


def planted_factor_series(rng, n, p, coef=0.8):
    # single noiseless factor drives every predictor and, lagged, the target
    f = rng.standard_normal(n)
    lam = rng.uniform(1.0, 2.0, size=p)
    x = np.outer(f, lam)
    y = np.zeros(n)
    for t in range(2, n):
        y[t] = 0.6 * y[t - 1] + 0.2 * y[t - 2] + coef * f[t - 1]
    cols = ("y",) + tuple(f"x{j}" for j in range(p))
    return SeriesMatrix(np.column_stack([y, x]), cols), f


class TestDigests:
    def test_stable_and_short(self):
        d1 = NaiveForecaster(h=1).digest()
        d2 = NaiveForecaster(h=1).digest()
        assert d1 == d2, "digest must be deterministic"
        assert len(d1) == 12 and int(d1, 16) >= 0, "digest must be 12 hex chars"

    def test_config_sensitivity(self):
        assert NaiveForecaster(h=1).digest() != NaiveForecaster(h=2).digest()
        a = GoSdpcaForecaster(GoSdpcaConfig(M=10))
        b = GoSdpcaForecaster(GoSdpcaConfig(M=1))
        assert a.digest() != b.digest(), "digest must track the configuration"

    def test_distinct_across_methods(self):
        digests = {
            NaiveForecaster().digest(),
            SwForecaster(r=2).digest(),
            LybForecaster(r=2).digest(),
            SdpcaForecaster(r=2).digest(),
            LassoForecaster().digest(),
            TruthOracleForecaster().digest(),
        }
        assert len(digests) == 6, "every method must hash differently"


class TestHorizonGuard:
    def test_mismatch_rejected(self):
        rng = np.random.default_rng(0)
        series, _ = planted_factor_series(rng, 40, 4)
        for method in (
            NaiveForecaster(h=1),
            SwForecaster(r=1, h=1),
            LassoForecaster(h=1),
            SdpcaForecaster(r=1, h=1),
        ):
            with pytest.raises(InputError):
                method.fit_and_forecast(series, "y", 3)


class TestNaive:
    def test_returns_last_target(self):
        rng = np.random.default_rng(1)
        series, _ = planted_factor_series(rng, 30, 3)
        got = NaiveForecaster(h=1).fit_and_forecast(series, "y", 1)
        assert got == series.values[-1, 0], "naive must carry the last value forward"


class TestLasso:
    def test_design_layout(self):
        # row k of the design holds [y_t, y_{t-1}, x_t, x_{t-1}] at t = q-1+k
        n, p = 30, 3
        y = np.arange(n, dtype=float)
        x = np.arange(n * p, dtype=float).reshape(n, p)
        design, resp = LassoForecaster(q=2, h=1)._design(y, x)
        assert design.shape == (n - 2, 2 + 2 * p), f"shape {design.shape}"
        assert resp.shape == (n - 2,)
        want_first = np.concatenate([[y[1], y[0]], x[1], x[0]])
        assert np.array_equal(design[0], want_first), "first design row misaligned"
        assert resp[0] == y[2], "first response must lead the row by h"
        want_last = np.concatenate([[y[28], y[27]], x[28], x[27]])
        assert np.array_equal(design[-1], want_last), "last design row misaligned"
        assert resp[-1] == y[29]

    def test_recovers_planted_map(self):
        # y_{t+1} = 2 x_{t,0} exactly, so the forecast is 2 x_{n-1,0}
        rng = np.random.default_rng(8)
        n, p = 80, 5
        x = rng.standard_normal((n, p))
        y = np.zeros(n)
        y[1:] = 2.0 * x[:-1, 0]
        cols = ("y",) + tuple(f"x{j}" for j in range(p))
        series = SeriesMatrix(np.column_stack([y, x]), cols)
        got = LassoForecaster(q=2, h=1).fit_and_forecast(series, "y", 1)
        want = 2.0 * x[-1, 0]
        assert abs(got - want) < 0.05, f"forecast {got} vs planted {want}"

    def test_short_window_rejected(self):
        rng = np.random.default_rng(9)
        series, _ = planted_factor_series(rng, 8, 3)
        with pytest.raises(InputError):
            LassoForecaster(q=2, h=1).fit_and_forecast(series, "y", 1)


class TestFactorAdapters:
    def test_sdpca_noiseless_exact(self):
        rng = np.random.default_rng(14)
        series, f = planted_factor_series(rng, 120, 6)
        method = SdpcaForecaster(r=1, q2=1, q3=2, h=1)
        got = method.fit_and_forecast(series, "y", 1)
        y = series.values[:, 0]
        want = 0.6 * y[-1] + 0.2 * y[-2] + 0.8 * f[-1]
        assert abs(got - want) < 1e-6, f"noiseless forecast off by {abs(got - want)}"

    def test_sw_and_lyb_finite_deterministic(self):
        rng = np.random.default_rng(15)
        series, _ = planted_factor_series(rng, 100, 8)
        noisy = SeriesMatrix(
            series.values + 0.05 * np.random.default_rng(16).standard_normal(series.values.shape),
            series.columns,
        )
        for method in (SwForecaster(r=1, q3=2, h=1), LybForecaster(r=1, q=2, q3=2, h=1)):
            a = method.fit_and_forecast(noisy, "y", 1)
            b = method.fit_and_forecast(noisy, "y", 1)
            assert np.isfinite(a), f"{method.tag} returned a non-finite forecast"
            assert a == b, f"{method.tag} must be deterministic"

    def test_go_sdpca_matches_pipeline_composition(self):
        rng = np.random.default_rng(17)
        series, _ = planted_factor_series(rng, 100, 6)
        cfg = GoSdpcaConfig(r=1, q1=1, q2=1, q3=2, h=1, M=3)
        method = GoSdpcaForecaster(cfg)
        got = method.fit_and_forecast(series, "y", 1)
        fit = fit_go_sdpca(series, "y", cfg)
        want = predict_go_sdpca(fit, series)
        assert got == want, "adapter must equal the fit/predict composition"


class TestOracle:
    def test_refuses_series_interface(self):
        rng = np.random.default_rng(18)
        series, _ = planted_factor_series(rng, 30, 3)
        with pytest.raises(InputError):
            TruthOracleForecaster().fit_and_forecast(series, "y", 1)
