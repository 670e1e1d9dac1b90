"""End-to-end forecaster: lagged group screening with peeling, supervised
factor extraction on the survivors, and a final predictive equation."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import InputError
from .sdpca import (
    FactorPanel,
    IntermediatePanel,
    PredictiveModel,
    build_intermediate_panel,
    extract_sdpca_factors,
    fit_predictive,
    forecast_one,
    predictor_xhat,
)
from .selection import PeelResult, build_group_design, peel
from .series import SeriesMatrix


@dataclass(frozen=True)
class GoSdpcaConfig:
    """Settings for one end-to-end fit.

    ``q1`` is the screening lag count (kept deliberately small), ``q2`` the
    lag count of the per-predictor regressions, ``q3`` the autoregressive
    order of the final equation, ``h`` the horizon, ``r`` the requested
    factor count, ``M`` the number of peeling rounds, ``K_n`` the greedy
    path cap (None picks the sample-size default), and ``C`` the stopping
    criterion constant.
    """

    r: int = 1
    q1: int = 2
    q2: int = 2
    q3: int = 2
    h: int = 1
    M: int = 10
    K_n: int | None = None
    C: float = 2.0
    fit_method: str = "ols"

    def __post_init__(self):
        for name in ("r", "q1", "q2", "q3", "h", "M"):
            if getattr(self, name) < 1:
                raise InputError(f"{name} must be at least 1")
        if self.K_n is not None and self.K_n < 1:
            raise InputError("K_n must be at least 1 when given")
        if not self.C > 0:
            raise InputError("C must be positive")
        if self.fit_method not in ("ols", "lasso"):
            raise InputError(f"unknown fit_method: {self.fit_method!r}")


@dataclass(frozen=True)
class FittedGoSdpca:
    """Everything produced by one fit, sufficient to forecast out of sample.

    ``selected`` holds the surviving predictor indices (positions within the
    non-target columns, sorted). When screening selects nothing the model
    degrades to a pure autoregression: ``degraded`` is True, ``panel`` and
    ``factors`` are None, and ``r_used`` is 0. Otherwise ``r_used`` is the
    extracted factor count, clipped below ``config.r`` when the survivors
    cannot support it.
    """

    selection: PeelResult
    panel: IntermediatePanel | None
    factors: FactorPanel | None
    model: PredictiveModel
    config: GoSdpcaConfig
    target: str
    selected: tuple[int, ...]
    r_used: int
    degraded: bool


def fit_go_sdpca(
    series: SeriesMatrix,
    target,
    config: GoSdpcaConfig,
    *,
    bic_lags: bool = False,
    factor_lags: int = 0,
) -> FittedGoSdpca:
    """Fit the full chain on one window: group screening with peeling, then
    per-predictor regressions on the selected subset, factor extraction, and
    the predictive equation.

    When no group survives screening, the fit degrades to an AR(q3) model
    with ``degraded`` set instead of raising.
    """
    design = build_group_design(series, target, config.q1, config.h)
    sel = peel(design, config.M, K_n=config.K_n, C=config.C, null_guard=True)
    y, x, _ = series.target_and_predictors(target)
    selected = tuple(sorted(sel.union_set))
    if not selected:
        empty = FactorPanel(
            np.zeros((y.shape[0], 0)), np.zeros((0, 0)), "none", 0, 0, ()
        )
        model = fit_predictive(
            y, empty, config.q3, config.h, config.fit_method, 0
        )
        return FittedGoSdpca(
            sel, None, None, model, config, target, selected, 0, True
        )
    panel = build_intermediate_panel(
        y, x[:, selected], config.q2, config.h, q3=config.q3, bic_lags=bic_lags
    )
    r_used = min(config.r, panel.n_cols, panel.n_rows)
    if r_used < config.r:
        warnings.warn(
            f"requested r={config.r} clipped to {r_used}: only "
            f"{panel.n_cols} usable predictors over {panel.n_rows} rows",
            stacklevel=2,
        )
    factors = extract_sdpca_factors(panel, r_used)
    model = fit_predictive(
        y, factors, config.q3, config.h, config.fit_method, factor_lags
    )
    return FittedGoSdpca(
        sel, panel, factors, model, config, target, selected, r_used, False
    )


def predict_go_sdpca(fit: FittedGoSdpca, series_through_t: SeriesMatrix) -> float:
    """Forecast h steps past the last row of ``series_through_t``.

    Per-predictor fitted values at the forecast origin are recomputed with
    the stored in-sample coefficients (no refitting), projected onto the
    stored loadings, and passed through the predictive equation.
    """
    y_hist, x_hist, _ = series_through_t.target_and_predictors(fit.target)
    q3 = fit.config.q3
    if y_hist.shape[0] < q3:
        raise InputError(
            f"history has {y_hist.shape[0]} rows, AR terms need {q3}"
        )
    y_recent = y_hist[::-1][:q3]
    if fit.degraded:
        return forecast_one(fit.model, y_recent, np.zeros(0))
    if fit.selected and x_hist.shape[1] <= fit.selected[-1]:
        raise InputError(
            f"series has {x_hist.shape[1]} predictor columns, fit used "
            f"index {fit.selected[-1]}"
        )
    x_sel = x_hist[:, fit.selected]
    terms = []
    for g in range(fit.model.factor_lags + 1):
        rows = x_sel.shape[0] - g
        xe = predictor_xhat(fit.panel, x_sel[:rows])
        terms.append(xe @ fit.factors.loadings)
    return forecast_one(fit.model, y_recent, np.concatenate(terms))
