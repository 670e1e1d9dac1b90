"""Rolling-window forecasting protocol, error aggregation, the paired
forecast-accuracy test, and the replicated simulation driver."""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np
from scipy import stats

from .dgp import DgpConfig, generate_panel
from .errors import ConvergenceError, InputError
from .series import SeriesMatrix


@dataclass(frozen=True)
class ForecastRecord:
    """One out-of-sample prediction: made at ``origin`` for ``origin + h``."""

    origin: int
    horizon: int
    predicted: float
    realized: float
    method: str
    config_digest: str


@dataclass(frozen=True)
class DmResult:
    """Paired accuracy test outcome.

    ``variance_floored`` marks a non-positive long-run variance estimate
    replaced by the lag-0 term; ``zero_differential`` marks two methods with
    identical squared-error paths.
    """

    statistic: float
    p_value: float
    n_forecasts: int
    horizon: int
    variance_floored: bool = False
    zero_differential: bool = False


@dataclass(frozen=True)
class McMethodResult:
    """Per-method summary of a replicated simulation.

    ``rmsfe`` is the average over replications of each replication's
    root-mean-square forecast error; a replication contributes a single
    forecast here, so this equals the mean absolute error. ``records``
    holds one forecast record per successful replication in replication
    order, with the replication seed stored as the origin; ``failures``
    holds one message per failed replication, never silently dropped.
    """

    method: str
    rmsfe: float
    mc_stderr: float
    n_ok: int
    n_failed: int
    records: tuple[ForecastRecord, ...]
    failures: tuple[str, ...]

    @property
    def errors(self) -> tuple[float, ...]:
        """Signed forecast errors of the successful replications."""
        return tuple(r.predicted - r.realized for r in self.records)


def rolling_forecast(
    series: SeriesMatrix, target, method, window: int, h: int, test_len: int
) -> list[ForecastRecord]:
    """Refit ``method`` on a fixed-length trailing window for each origin in
    the test span and record one h-step prediction per origin.

    The realized values are the last ``test_len`` rows of the target; the
    origin for each sits h rows earlier. The window never extends past its
    origin, so no fit sees future data.
    """
    if window < 1 or h < 1 or test_len < 1:
        raise InputError("window, h and test_len must all be at least 1")
    n = series.values.shape[0]
    if window + h + test_len > n + 1:
        raise InputError(
            f"window {window} + h {h} + test_len {test_len} exceeds the "
            f"{n} available rows"
        )
    pos = series.column_position(target)
    digest = method.digest()
    records = []
    for k in range(test_len):
        t = n - test_len - h + k
        start = t - window + 1
        win = SeriesMatrix(
            series.values[start : t + 1],
            series.columns,
            None if series.index is None else series.index[start : t + 1],
        )
        try:
            predicted = float(method.fit_and_forecast(win, target, h))
        except InputError as exc:
            raise InputError(f"fit at origin {t} failed: {exc}") from exc
        except Exception as exc:
            raise ConvergenceError(f"fit at origin {t} failed: {exc}") from exc
        if not math.isfinite(predicted):
            raise ConvergenceError(f"non-finite prediction at origin {t}")
        records.append(
            ForecastRecord(
                origin=t,
                horizon=h,
                predicted=predicted,
                realized=float(series.values[t + h, pos]),
                method=method.tag,
                config_digest=digest,
            )
        )
    return records


def rmsfe(records) -> float:
    """Root mean squared error over forecast records."""
    records = list(records)
    if not records:
        raise InputError("rmsfe needs at least one record")
    total = math.fsum((r.predicted - r.realized) ** 2 for r in records)
    return math.sqrt(total / len(records))


def dm_test(errors_a, errors_b, h: int) -> DmResult:
    """Compare two forecast-error paths under squared loss.

    The test statistic is the mean loss differential d_t = e_a^2 - e_b^2
    over its long-run standard error (autocovariances truncated at h - 1
    lags, 1/T normalization), scaled by the small-sample factor
    sqrt((T + 1 - 2h + h(h-1)/T)/T). The one-sided p-value is small when
    method a is more accurate; it comes from a Student-t with T - 1 degrees
    of freedom, evaluated through the tail of |statistic| so that swapping
    the methods maps p to exactly 1 - p.
    """
    a = np.asarray(errors_a, dtype=float).ravel()
    b = np.asarray(errors_b, dtype=float).ravel()
    if a.shape != b.shape:
        raise InputError("error vectors must have equal length")
    t_len = a.shape[0]
    if t_len < 8:
        raise InputError(f"need at least 8 forecasts, got {t_len}")
    if h < 1:
        raise InputError("h must be at least 1")
    scale_arg = (t_len + 1 - 2 * h + h * (h - 1) / t_len) / t_len
    if scale_arg <= 0:
        raise InputError(f"horizon {h} too large for {t_len} forecasts")
    d = a * a - b * b
    if not d.any():
        return DmResult(0.0, 0.5, t_len, h, False, True)
    dbar = float(d.mean())
    dd = d - dbar
    gamma0 = float(dd @ dd) / t_len
    v_hat = gamma0
    for lag in range(1, h):
        v_hat += 2.0 * float(dd[lag:] @ dd[:-lag]) / t_len
    floored = False
    if v_hat <= 0.0:
        v_hat = gamma0
        floored = True
    if v_hat == 0.0:
        # constant nonzero differential: no sampling variability
        statistic = math.copysign(math.inf, dbar)
        floored = True
    else:
        statistic = (
            dbar / math.sqrt(v_hat / t_len) * math.sqrt(scale_arg)
        )
    tail = float(stats.t.sf(abs(statistic), df=t_len - 1))
    p_value = tail if statistic <= 0 else 1.0 - tail
    return DmResult(float(statistic), p_value, t_len, h, floored, False)


def _resolve_workers(workers: int | None, jobs: int) -> int:
    if workers is None:
        env = os.environ.get("GOSDPCA_WORKERS", "").strip()
        if env:
            try:
                workers = int(env)
            except ValueError:
                raise InputError(
                    f"GOSDPCA_WORKERS must be an integer, got {env!r}"
                ) from None
        else:
            workers = os.cpu_count() or 1
    if workers < 1:
        raise InputError("workers must be at least 1")
    return min(workers, jobs)


def _mc_one(job):
    cfg, methods = job
    panel = generate_panel(cfg)
    train = SeriesMatrix(
        panel.series.values[: cfg.n].copy(), panel.series.columns
    )
    pos = panel.series.column_position("y")
    realized = float(panel.series.values[cfg.n, pos])
    out = {}
    for m in methods:
        try:
            if getattr(m, "uses_truth", False):
                predicted = float(m.forecast_truth(panel))
            else:
                predicted = float(m.fit_and_forecast(train, "y", 1))
            if not math.isfinite(predicted):
                raise ConvergenceError("non-finite prediction")
            out[m.tag] = ("ok", predicted, realized)
        except Exception as exc:
            out[m.tag] = ("fail", f"seed {cfg.seed}: {type(exc).__name__}: {exc}")
    return out


def monte_carlo_study(
    cfg: DgpConfig,
    methods,
    replications: int,
    base_seed: int = 0,
    *,
    workers: int | None = None,
) -> list[McMethodResult]:
    """Replicate a one-step-ahead forecast of the held-out value.

    Each replication regenerates the panel with seed ``base_seed + i``,
    fits every method on the first n rows, and scores the forecast of row
    n + 1. The summary statistic averages the per-replication RMSFE values
    (each a single absolute error), not the pooled squared errors.
    Replications run in parallel processes; the reduction happens in
    replication order, so summaries do not depend on the worker count.
    """
    methods = list(methods)
    if replications < 1:
        raise InputError("replications must be at least 1")
    if not methods:
        raise InputError("need at least one method")
    tags = [m.tag for m in methods]
    if len(set(tags)) != len(tags):
        raise InputError(f"method tags must be unique, got {tags}")
    jobs = [
        (replace(cfg, seed=base_seed + i), tuple(methods))
        for i in range(replications)
    ]
    n_workers = _resolve_workers(workers, len(jobs))
    if n_workers == 1:
        per_rep = [_mc_one(job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            chunk = max(1, len(jobs) // (4 * n_workers))
            per_rep = list(pool.map(_mc_one, jobs, chunksize=chunk))
    digests = {m.tag: m.digest() for m in methods}
    summaries = []
    for tag in tags:
        records: list[ForecastRecord] = []
        failures: list[str] = []
        for i, rep in enumerate(per_rep):
            status = rep[tag]
            if status[0] == "ok":
                records.append(
                    ForecastRecord(
                        origin=base_seed + i,
                        horizon=1,
                        predicted=status[1],
                        realized=status[2],
                        method=tag,
                        config_digest=digests[tag],
                    )
                )
            else:
                failures.append(status[1])
        if records:
            ae = np.abs([r.predicted - r.realized for r in records])
            value = float(ae.mean())
            if len(records) > 1:
                stderr = float(ae.std(ddof=1) / math.sqrt(len(ae)))
            else:
                stderr = 0.0
        else:
            value, stderr = float("nan"), 0.0
        summaries.append(
            McMethodResult(
                method=tag,
                rmsfe=value,
                mc_stderr=stderr,
                n_ok=len(records),
                n_failed=len(failures),
                records=tuple(records),
                failures=tuple(failures),
            )
        )
    return summaries
