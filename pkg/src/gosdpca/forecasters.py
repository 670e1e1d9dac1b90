"""Uniform one-shot forecaster adapters: each fits on a window and returns
one h-step-ahead prediction from the window's final row."""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass

import numpy as np

from .baselines import lasso_bic, lyb_factors, sw_factors
from .dgp import GeneratedPanel, replay_target
from .errors import InputError
from .pipeline import GoSdpcaConfig, fit_go_sdpca, predict_go_sdpca
from .sdpca import (
    build_intermediate_panel,
    extract_sdpca_factors,
    fit_predictive,
    forecast_one,
    predictor_xhat,
)
from .series import SeriesMatrix


def _digest(tag: str, fields: dict) -> str:
    payload = json.dumps({"tag": tag, **fields}, sort_keys=True, default=str)
    return hashlib.sha1(payload.encode()).hexdigest()[:12]


def _check_h(h: int, own: int) -> None:
    if h != own:
        raise InputError(f"forecaster is configured for h={own}, asked for h={h}")


@dataclass(frozen=True)
class GoSdpcaForecaster:
    """Full chain: screening with peeling, supervised factors, prediction.

    ``tag`` distinguishes the peeled variant from the single-round one; the
    config's M carries the actual round count.
    """

    config: GoSdpcaConfig
    tag: str = "gsp_star"

    def digest(self) -> str:
        return _digest(self.tag, asdict(self.config))

    def fit_and_forecast(self, series: SeriesMatrix, target, h: int) -> float:
        _check_h(h, self.config.h)
        fit = fit_go_sdpca(series, target, self.config)
        return predict_go_sdpca(fit, series)


@dataclass(frozen=True)
class SdpcaForecaster:
    """Supervised factors on all predictors (no screening step)."""

    r: int
    q2: int = 2
    q3: int = 2
    h: int = 1
    fit_method: str = "ols"
    tag: str = "sdpca"

    def digest(self) -> str:
        return _digest(self.tag, asdict(self))

    def fit_and_forecast(self, series: SeriesMatrix, target, h: int) -> float:
        _check_h(h, self.h)
        y, x, _ = series.target_and_predictors(target)
        panel = build_intermediate_panel(y, x, self.q2, self.h, q3=self.q3)
        r_used = min(self.r, panel.n_cols, panel.n_rows)
        factors = extract_sdpca_factors(panel, r_used)
        model = fit_predictive(y, factors, self.q3, self.h, self.fit_method)
        xe = predictor_xhat(panel, x)
        return forecast_one(
            model, y[::-1][: self.q3], xe @ factors.loadings
        )


@dataclass(frozen=True)
class SwForecaster:
    """Principal components of the standardized predictors plus AR terms."""

    r: int
    q3: int = 2
    h: int = 1
    tag: str = "sw"

    def digest(self) -> str:
        return _digest(self.tag, asdict(self))

    def fit_and_forecast(self, series: SeriesMatrix, target, h: int) -> float:
        _check_h(h, self.h)
        y, x, _ = series.target_and_predictors(target)
        factors = sw_factors(x, self.r)
        model = fit_predictive(y, factors, self.q3, self.h, "ols")
        return forecast_one(
            model, y[::-1][: self.q3], factors.factors[-1]
        )


@dataclass(frozen=True)
class LybForecaster:
    """Autocovariance-eigenanalysis factors plus AR terms."""

    r: int
    q: int = 2
    q3: int = 2
    h: int = 1
    tag: str = "lyb"

    def digest(self) -> str:
        return _digest(self.tag, asdict(self))

    def fit_and_forecast(self, series: SeriesMatrix, target, h: int) -> float:
        _check_h(h, self.h)
        y, x, _ = series.target_and_predictors(target)
        factors = lyb_factors(x, self.q, self.r)
        model = fit_predictive(y, factors, self.q3, self.h, "ols")
        return forecast_one(
            model, y[::-1][: self.q3], factors.factors[-1]
        )


@dataclass(frozen=True)
class LassoForecaster:
    """Penalized regression on q lags of the target and every predictor.

    The design is far wider than tall, so the penalty path's default floor
    (one percent of the all-zero penalty) is what bounds model size; the
    criterion typically settles near the dense end of the path.
    """

    q: int = 2
    h: int = 1
    path_len: int = 100
    tag: str = "lasso"

    def digest(self) -> str:
        return _digest(self.tag, asdict(self))

    def _design(self, y: np.ndarray, x: np.ndarray):
        n = y.shape[0]
        q, h = self.q, self.h
        rows = n - q - h + 1
        if rows < q + 5:
            raise InputError(f"window too short: {n} rows for q={q}, h={h}")
        blocks = [
            np.column_stack([y[q - 1 - l : n - h - l] for l in range(q)])
        ]
        blocks.extend(x[q - 1 - l : n - h - l, :] for l in range(q))
        return np.hstack(blocks), y[q - 1 + h :]

    def fit_and_forecast(self, series: SeriesMatrix, target, h: int) -> float:
        _check_h(h, self.h)
        y, x, _ = series.target_and_predictors(target)
        design, resp = self._design(y, x)
        fit = lasso_bic(design, resp, self.path_len)
        t = y.shape[0] - 1
        row = np.concatenate(
            [y[t - self.q + 1 : t + 1][::-1]]
            + [x[t - l, :] for l in range(self.q)]
        )
        return float(fit.intercept + fit.coefficients @ row)


@dataclass(frozen=True)
class NaiveForecaster:
    """Carries the last observed target value forward."""

    h: int = 1
    tag: str = "naive"

    def digest(self) -> str:
        return _digest(self.tag, asdict(self))

    def fit_and_forecast(self, series: SeriesMatrix, target, h: int) -> float:
        _check_h(h, self.h)
        y, _, _ = series.target_and_predictors(target)
        return float(y[-1])


@dataclass(frozen=True)
class TruthOracleForecaster:
    """Uses a generated panel's truth record: the prediction is the target
    recursion with the final innovation removed, so forecast errors are
    exactly the planted innovations."""

    tag: str = "oracle"
    uses_truth: bool = True

    def digest(self) -> str:
        return _digest(self.tag, {})

    def forecast_truth(self, panel: GeneratedPanel) -> float:
        return float(replay_target(panel)[-1] - panel.truth.eps[-1])

    def fit_and_forecast(self, series: SeriesMatrix, target, h: int) -> float:
        raise InputError("oracle forecaster needs the generated truth record")
