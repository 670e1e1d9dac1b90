"""Benchmark forecasting components: principal-component factors from the
standardized panel, autocovariance-eigenanalysis factors, and an L1-penalized
regression tuned by BIC.

All three feed the same predictive-equation and rolling-forecast machinery
as the supervised pipeline.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, InputError
from .linalg import sym_eig_top
from .sdpca import FactorPanel
from .series import SeriesMatrix

MAX_SWEEPS = 10_000
COEF_TOL = 1e-8


@dataclass(frozen=True)
class LassoFit:
    """One penalized fit: coefficients on the original scale, the penalty
    level it was computed at (standardized scale), and its BIC."""

    intercept: float
    coefficients: np.ndarray
    lam: float
    bic: float
    nonzero_count: int


def _values(series) -> np.ndarray:
    if isinstance(series, SeriesMatrix):
        return series.values
    x = np.asarray(series, dtype=float)
    if x.ndim != 2:
        raise InputError("expected a 2-D panel")
    return x


def sw_factors(series, r: int) -> FactorPanel:
    """Principal components of the standardized predictor panel.

    Each column is scaled to mean 0 and variance 1 over the window, so the
    eigendecomposition acts on the sample correlation matrix. Zero-variance
    columns are dropped with a warning; their loading rows are zero so the
    loading matrix keeps one row per input column.
    """
    x = _values(series)
    n, p = x.shape
    if n < 2:
        raise InputError("need at least 2 rows")
    means = x.mean(axis=0)
    sds = x.std(axis=0)
    keep = sds > 1e-12 * np.maximum(1.0, np.abs(means))
    if not np.all(keep):
        warnings.warn(
            f"dropping {int((~keep).sum())} zero-variance columns", stacklevel=2
        )
    kept = np.flatnonzero(keep)
    if not 1 <= r <= min(n, kept.size):
        raise InputError(f"r={r} out of range for {n} rows x {kept.size} usable columns")
    z = (x[:, kept] - means[kept]) / sds[kept]
    corr = (z.T @ z) / n
    pairs = sym_eig_top(corr, r)
    loadings = np.zeros((p, r))
    loadings[kept] = np.column_stack([pair.vector for pair in pairs])
    factors = z @ loadings[kept]
    return FactorPanel(factors, loadings, "sw", r, 0, tuple(p.value for p in pairs))


def lyb_factors(series, q: int, r: int) -> FactorPanel:
    """Factors from the eigenanalysis of summed autocovariance Gram products.

    With demeaned data z_t, the target matrix is the sum over lags l = 1..q
    of C(l) C(l)' where C(l) = (1/n) sum_t z_t z_{t-l}'; it is symmetric
    non-negative definite by construction. Factors are the demeaned data
    projected on the top-r eigenvectors.
    """
    x = _values(series)
    n, p = x.shape
    if q < 1:
        raise InputError("q must be at least 1")
    if n <= q + 2:
        raise InputError(f"need more than q + 2 = {q + 2} rows, got {n}")
    if not 1 <= r <= p:
        raise InputError(f"r={r} out of range for {p} columns")
    z = x - x.mean(axis=0)
    m = np.zeros((p, p))
    for lag in range(1, q + 1):
        cov = (z[lag:].T @ z[:-lag]) / n
        m += cov @ cov.T
    m = (m + m.T) / 2.0
    pairs = sym_eig_top(m, r)
    loadings = np.column_stack([pair.vector for pair in pairs])
    factors = z @ loadings
    return FactorPanel(factors, loadings, "lyb", r, 0, tuple(p.value for p in pairs))


def _standardize(x: np.ndarray, y: np.ndarray):
    n = x.shape[0]
    means = x.mean(axis=0)
    sds = np.sqrt(((x - means) ** 2).mean(axis=0))
    keep = np.flatnonzero(sds > 1e-12 * np.maximum(1.0, np.abs(means)))
    xs = (x[:, keep] - means[keep]) / sds[keep]
    my = float(y.mean())
    return xs, y - my, my, means, sds, keep


def _cd_path_point(gram, c, lam, b):
    """Cyclic coordinate descent with an active-set outer loop.

    Works entirely on the standardized Gram matrix (diagonal 1) and the
    column-response correlations ``c``, maintaining the full gradient
    g = c - gram @ b so a coordinate that does not move costs O(1). ``b`` is
    modified in place. Raises _NonConvergence past the sweep cap.
    """
    g = c - gram @ b
    active = set(np.flatnonzero(b).tolist())
    sweeps = 0
    while True:
        if active:
            order = sorted(active)
            while True:
                sweeps += 1
                if sweeps > MAX_SWEEPS:
                    raise _NonConvergence(b, sweeps)
                max_delta = 0.0
                for j in order:
                    bj = b[j]
                    zj = g[j] + bj
                    new = math.copysign(max(abs(zj) - lam, 0.0), zj)
                    if new != bj:
                        g -= gram[j] * (new - bj)
                        b[j] = new
                        max_delta = max(max_delta, abs(new - bj))
                if max_delta < COEF_TOL:
                    break
        # resync against accumulated drift, then admit every coordinate
        # violating stationarity at the current point
        g = c - gram @ b
        viol = set(np.flatnonzero(np.abs(g) > lam + 1e-12).tolist()) - active
        if not viol:
            return sweeps
        active |= viol


class _NonConvergence(Exception):
    def __init__(self, b, sweeps):
        self.b = b
        self.sweeps = sweeps


def _assemble_fit(b_std, xs, cy, my, means, sds, keep, p, lam, n):
    coef = np.zeros(p)
    coef[keep] = b_std / sds[keep]
    intercept = my - float(means @ coef)
    res = cy - xs @ b_std
    rss = max(float(res @ res), 1e-300)
    nnz = int(np.count_nonzero(coef))
    bic = n * math.log(rss / n) + nnz * math.log(n)
    return LassoFit(intercept, coef, float(lam), bic, nnz)


def lasso_coordinate_descent(x, y, lam: float) -> LassoFit:
    """Minimize (2n)^-1 ||y - b0 - X b||^2 + lam ||b||_1.

    Columns are standardized internally and the intercept is unpenalized;
    coefficients come back on the original scale. Convergence is declared
    when no standardized coefficient moves more than 1e-8 in a sweep; after
    10,000 sweeps a convergence error carrying the last iterate is raised.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    if x.ndim != 2 or x.shape[0] != y.shape[0]:
        raise InputError("design rows must match response length")
    if lam < 0:
        raise InputError("lambda must be nonnegative")
    n, p = x.shape
    xs, cy, my, means, sds, keep = _standardize(x, y)
    gram = (xs.T @ xs) / n
    c = xs.T @ cy / n
    b = np.zeros(xs.shape[1])
    try:
        _cd_path_point(gram, c, lam, b)
    except _NonConvergence as nc:
        fit = _assemble_fit(nc.b, xs, cy, my, means, sds, keep, p, lam, n)
        raise ConvergenceError(
            f"coordinate descent not converged after {MAX_SWEEPS} sweeps",
            last_fit=fit,
        ) from None
    return _assemble_fit(b, xs, cy, my, means, sds, keep, p, lam, n)


def lasso_bic(
    x,
    y,
    path_len: int = 100,
    *,
    lambda_min_ratio: float | None = None,
    max_active: int | None = None,
) -> LassoFit:
    """Fit a geometric penalty path and return the BIC-smallest fit.

    The path runs from the smallest penalty zeroing every coefficient down
    to ``lambda_min_ratio`` of it, warm-starting each step; BIC is
    n ln(RSS/n) plus the nonzero count times ln(n). Ties go to the larger
    penalty.

    ``lambda_min_ratio`` defaults to 0.01 when the design is wider than
    tall and 1e-4 otherwise, the usual path-floor convention. The floor is
    what keeps wide-design walks short of interpolation: with more columns
    than rows the criterion keeps falling as the fit densifies, so the
    selected model sits near the path end rather than at a sparse knee.
    ``max_active`` optionally hard-stops the walk before any fit with more
    nonzero coefficients than the budget; None walks the full path.

    Deep path points with more active coordinates than rows converge slowly
    in coefficient-change terms even though their fit is settled; a point
    still moving after the sweep cap contributes its last iterate (within
    ~1e-5 of optimum, far inside BIC resolution) and raises a warning
    instead of aborting the whole path.
    """
    if path_len < 2:
        raise InputError("path_len must be at least 2")
    if lambda_min_ratio is not None and not 0.0 < lambda_min_ratio < 1.0:
        raise InputError("lambda_min_ratio must be strictly between 0 and 1")
    if max_active is not None and max_active < 1:
        raise InputError("max_active must be at least 1")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    if x.ndim != 2 or x.shape[0] != y.shape[0]:
        raise InputError("design rows must match response length")
    n, p = x.shape
    xs, cy, my, means, sds, keep = _standardize(x, y)
    if lambda_min_ratio is None:
        lambda_min_ratio = 0.01 if xs.shape[1] > n else 1e-4
    if xs.shape[1] == 0:
        return _assemble_fit(np.zeros(0), xs, cy, my, means, sds, keep, p, 0.0, n)
    lam_max = float(np.max(np.abs(xs.T @ cy))) / n
    if lam_max <= 0.0:
        return _assemble_fit(
            np.zeros(xs.shape[1]), xs, cy, my, means, sds, keep, p, 0.0, n
        )
    gram = (xs.T @ xs) / n
    c = xs.T @ cy / n
    lams = np.geomspace(lam_max, lambda_min_ratio * lam_max, path_len)
    b = np.zeros(xs.shape[1])
    best = None
    capped = 0
    for lam in lams:
        try:
            _cd_path_point(gram, c, float(lam), b)
        except _NonConvergence as nc:
            b = nc.b
            capped += 1
        if max_active is not None and int(np.count_nonzero(b)) > max_active:
            break
        fit = _assemble_fit(b, xs, cy, my, means, sds, keep, p, float(lam), n)
        if best is None or fit.bic < best.bic:
            best = fit
    if capped:
        warnings.warn(
            f"{capped} path points stopped at the sweep cap; last iterates used",
            stacklevel=2,
        )
    return best
