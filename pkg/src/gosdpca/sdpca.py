"""Supervised dynamic PCA.

Each predictor is first turned into an h-step-ahead forecast of the target by
regressing y_{t+h} on an intercept and the predictor's own recent lags; the
centered fitted series all live in target units, so PCA on their covariance
needs no per-column rescaling. The top factors then enter a final predictive
regression alongside autoregressive lags of the target.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import InputError
from .linalg import least_squares, sym_eig_top


@dataclass(frozen=True)
class IntermediateFit:
    """Centered fitted series of one per-predictor lag regression.

    ``xhat[i]`` is the slope part of the fit at time ``t_start + i``;
    ``intercept`` is the mean of the aligned response, so intercept + xhat
    reproduces the regression's fitted values. ``gammas`` (newest lag first)
    and ``lag_means`` allow recomputing xhat out of sample.
    """

    xhat: np.ndarray
    intercept: float
    gammas: np.ndarray
    lag_means: np.ndarray
    t_start: int


@dataclass(frozen=True)
class IntermediatePanel:
    """Fitted-value panel over a shared time range.

    Rows of ``xhat`` correspond to times usable_range[0] .. usable_range[1];
    column k belongs to predictor ``column_ids[k]`` of the matrix the panel
    was built from. Zero-variance predictors are excluded and listed in
    ``dropped``.
    """

    xhat: np.ndarray
    intercepts: tuple[float, ...]
    lags_used: tuple[int, ...]
    usable_range: tuple[int, int]
    gammas: tuple[tuple[float, ...], ...]
    lag_means: tuple[tuple[float, ...], ...]
    column_ids: tuple[int, ...]
    dropped: tuple[int, ...]
    h: int

    @property
    def t_start(self) -> int:
        return self.usable_range[0]

    @property
    def n_rows(self) -> int:
        return self.xhat.shape[0]

    @property
    def n_cols(self) -> int:
        return self.xhat.shape[1]


@dataclass(frozen=True)
class FactorPanel:
    """Extracted factors with their loadings.

    ``factors`` row i corresponds to time ``t_start + i`` of the series the
    factors were extracted from; loadings columns are orthonormal and ordered
    by descending eigenvalue.
    """

    factors: np.ndarray
    loadings: np.ndarray
    method: str
    r: int
    t_start: int
    eigenvalues: tuple[float, ...]


@dataclass(frozen=True)
class PredictiveModel:
    """Linear h-step predictive equation: intercept, AR lags of the target
    (newest first), and factor terms."""

    ar_coefficients: np.ndarray
    factor_coefficients: np.ndarray
    intercept: float
    fit_method: str
    h: int
    q3: int
    factor_lags: int = 0


def _lag_block(x: np.ndarray, q: int, t_start: int, t_end: int) -> np.ndarray:
    """Rows t = t_start..t_end of (x_t, x_{t-1}, ..., x_{t-q+1})."""
    w = sliding_window_view(x, q)[t_start - q + 1 : t_end - q + 2]
    return w[:, ::-1]


def intermediate_prediction(
    y, x_j, q2: int, h: int, t_start: int | None = None
) -> IntermediateFit:
    """Regress y_{t+h} on an intercept and q2 own lags of one predictor.

    Returns the centered fitted part (slope terms only, exact sample mean 0)
    and the intercept, which equals the mean of the aligned response because
    the lag regressors are centered before solving. ``t_start`` can push the
    first usable row later than q2-1 so several predictors share one range.
    """
    y = np.asarray(y, dtype=float).ravel()
    x_j = np.asarray(x_j, dtype=float).ravel()
    if y.shape[0] != x_j.shape[0]:
        raise InputError("target and predictor lengths differ")
    if q2 < 1 or h < 1:
        raise InputError("q2 and h must be at least 1")
    n = y.shape[0]
    if t_start is None:
        t_start = q2 - 1
    elif t_start < q2 - 1:
        raise InputError("t_start leaves too little history for q2 lags")
    usable = n - h - t_start
    if usable < q2 + h + 5:
        raise InputError(
            f"insufficient rows: {usable} usable, need {q2 + h + 5}"
        )
    lags = _lag_block(x_j, q2, t_start, n - 1 - h)
    resp = y[t_start + h :]
    lag_means = lags.mean(axis=0)
    centered = lags - lag_means
    mu = float(resp.mean())
    fit = least_squares(centered, resp - mu)
    return IntermediateFit(fit.fitted, mu, fit.coefficients, lag_means, t_start)


def select_lag_bic(y, x_j, h: int, q2_max: int) -> int:
    """Pick the lag count in 1..q2_max by BIC, all candidates evaluated on
    the rows aligned at q2_max so their criteria are comparable. Ties go to
    the smallest lag count.
    """
    if q2_max < 1:
        raise InputError("q2_max must be at least 1")
    y = np.asarray(y, dtype=float).ravel()
    x_j = np.asarray(x_j, dtype=float).ravel()
    if y.shape[0] != x_j.shape[0]:
        raise InputError("target and predictor lengths differ")
    n = y.shape[0]
    t_start = q2_max - 1
    n_a = n - h - t_start
    if n_a < q2_max + h + 5:
        raise InputError(
            f"insufficient rows at q2_max={q2_max}: {n_a} usable"
        )
    lags_full = _lag_block(x_j, q2_max, t_start, n - 1 - h)
    resp = y[t_start + h :]
    mu = float(resp.mean())
    best_q, best_bic = 1, math.inf
    for q in range(1, q2_max + 1):
        block = lags_full[:, :q]
        fit = least_squares(block - block.mean(axis=0), resp - mu)
        rss = max(float(fit.residuals @ fit.residuals), 1e-300)
        bic = n_a * math.log(rss / n_a) + (q + 1) * math.log(n_a)
        if bic < best_bic:
            best_q, best_bic = q, bic
    return best_q


def build_intermediate_panel(
    y, x, q2: int, h: int, q3: int = 1, bic_lags: bool = False
) -> IntermediatePanel:
    """Per-predictor intermediate predictions over one shared time range.

    The range starts at max(q2, q3) - 1 so the downstream predictive
    regression's AR lags align with the factors row for row. With
    ``bic_lags`` each predictor's lag count is chosen by BIC with q2 as the
    maximum; otherwise q2 is used uniformly. Zero-variance predictors are
    dropped and reported in the result.
    """
    y = np.asarray(y, dtype=float).ravel()
    x = np.asarray(x, dtype=float)
    if x.ndim != 2 or x.shape[0] != y.shape[0]:
        raise InputError("x must be 2-D with rows matching the target length")
    n = y.shape[0]
    t_start = max(q2, q3) - 1
    cols, mus, qs, gammas, lag_means, kept, dropped = [], [], [], [], [], [], []
    for j in range(x.shape[1]):
        col = x[:, j]
        if float(np.std(col)) <= 1e-12 * max(1.0, abs(float(col.mean()))):
            dropped.append(j)
            continue
        q2_j = select_lag_bic(y, col, h, q2) if bic_lags else q2
        fit = intermediate_prediction(y, col, q2_j, h, t_start=t_start)
        cols.append(fit.xhat)
        mus.append(fit.intercept)
        qs.append(q2_j)
        gammas.append(tuple(fit.gammas.tolist()))
        lag_means.append(tuple(fit.lag_means.tolist()))
        kept.append(j)
    if not kept:
        raise InputError("all predictors have zero variance")
    xhat = np.column_stack(cols)
    return IntermediatePanel(
        xhat,
        tuple(mus),
        tuple(qs),
        (t_start, n - 1 - h),
        tuple(gammas),
        tuple(lag_means),
        tuple(kept),
        tuple(dropped),
        h,
    )


def extract_sdpca_factors(panel: IntermediatePanel, r: int) -> FactorPanel:
    """PCA on the covariance of the centered fitted panel.

    Columns are already in response units, so no re-standardization is
    applied; loadings are the top-r eigenvectors and factors their scores.
    """
    xhat = panel.xhat
    rows, cols = xhat.shape
    if not 1 <= r <= min(rows, cols):
        raise InputError(f"r={r} out of range for a {rows}x{cols} panel")
    s = (xhat.T @ xhat) / rows
    pairs = sym_eig_top(s, r)
    loadings = np.column_stack([p.vector for p in pairs])
    factors = xhat @ loadings
    return FactorPanel(
        factors,
        loadings,
        "sdpca",
        r,
        panel.t_start,
        tuple(p.value for p in pairs),
    )


def predictor_xhat(panel: IntermediatePanel, x_history) -> np.ndarray:
    """Recompute the centered fitted vector at the last row of a history
    matrix, using the panel's stored per-predictor coefficients.

    ``x_history`` must contain the same predictor columns the panel was built
    from (kept and dropped alike) and end at the desired origin.
    """
    x_history = np.asarray(x_history, dtype=float)
    if x_history.ndim != 2:
        raise InputError("x_history must be 2-D")
    t = x_history.shape[0] - 1
    out = np.empty(len(panel.column_ids))
    for k, j in enumerate(panel.column_ids):
        q = panel.lags_used[k]
        if t - q + 1 < 0:
            raise InputError("history too short for stored lag counts")
        lags = x_history[t - q + 1 : t + 1, j][::-1]
        out[k] = float(
            np.dot(np.asarray(panel.gammas[k]), lags - np.asarray(panel.lag_means[k]))
        )
    return out


def fit_predictive(
    y,
    factors: FactorPanel,
    q3: int,
    h: int,
    fit_method: str = "ols",
    factor_lags: int = 0,
) -> PredictiveModel:
    """Fit y_{t+h} on an intercept, q3 AR lags of the target, and the factor
    row at t (plus ``factor_lags`` lagged factor rows when requested).

    ``fit_method`` "ols" solves least squares with the intercept kept out of
    any rank decision; "lasso" delegates to the BIC-tuned lasso path on the
    identical design.
    """
    if q3 < 1 or h < 1 or factor_lags < 0:
        raise InputError("q3, h must be >= 1 and factor_lags >= 0")
    if fit_method not in ("ols", "lasso"):
        raise InputError(f"unknown fit_method: {fit_method!r}")
    y = np.asarray(y, dtype=float).ravel()
    n = y.shape[0]
    f = factors.factors
    t0 = max(q3 - 1, factors.t_start + factor_lags)
    t1 = min(n - 1 - h, factors.t_start + f.shape[0] - 1)
    width = q3 + f.shape[1] * (1 + factor_lags)
    if t1 - t0 + 1 < q3 + f.shape[1] + 5:
        raise InputError(
            f"insufficient aligned rows: {t1 - t0 + 1} for {width} terms"
        )
    ar = np.column_stack([y[t0 - k : t1 + 1 - k] for k in range(q3)])
    fac = [
        f[t0 - g - factors.t_start : t1 + 1 - g - factors.t_start]
        for g in range(factor_lags + 1)
    ]
    design = np.hstack([ar] + fac)
    resp = y[t0 + h : t1 + 1 + h]
    if fit_method == "ols":
        means = design.mean(axis=0)
        mu = float(resp.mean())
        fit = least_squares(design - means, resp - mu)
        coef = fit.coefficients
        intercept = mu - float(means @ coef)
    else:
        from .baselines import lasso_bic

        lfit = lasso_bic(design, resp)
        coef = lfit.coefficients
        intercept = lfit.intercept
    return PredictiveModel(
        coef[:q3].copy(), coef[q3:].copy(), intercept, fit_method, h, q3, factor_lags
    )


def forecast_one(model: PredictiveModel, y_recent, f_latest) -> float:
    """Apply the fitted predictive equation once.

    ``y_recent`` holds the last q3 target values newest first; ``f_latest``
    holds the factor terms in the same order the model was fitted with.
    """
    y_recent = np.asarray(y_recent, dtype=float).ravel()
    f_latest = np.asarray(f_latest, dtype=float).ravel()
    if y_recent.shape[0] != model.q3:
        raise InputError(
            f"y_recent has {y_recent.shape[0]} values, model expects {model.q3}"
        )
    if f_latest.shape[0] != model.factor_coefficients.shape[0]:
        raise InputError(
            f"f_latest has {f_latest.shape[0]} values, model expects "
            f"{model.factor_coefficients.shape[0]}"
        )
    return float(
        model.intercept
        + model.ar_coefficients @ y_recent
        + model.factor_coefficients @ f_latest
    )
