"""JSON-configured experiment driver.

Runs either a replicated simulation or a rolling-window forecast comparison
over a grid of (q, r) settings, and writes four artifacts under the output
directory: ``summary.csv``, ``forecasts.csv``, ``dm.csv``, and ``run.json``.
The run file holds the fully resolved configuration, so feeding it back in
reproduces every output byte for byte.
"""

from __future__ import annotations

import csv
import json
import os
from dataclasses import asdict, dataclass, field
from itertools import product

from ._version import __version__
from .dgp import DgpConfig
from .errors import ConfigError, InputError
from .evaluation import dm_test, monte_carlo_study, rmsfe, rolling_forecast
from .forecasters import (
    GoSdpcaForecaster,
    LassoForecaster,
    LybForecaster,
    NaiveForecaster,
    SdpcaForecaster,
    SwForecaster,
)
from .io import DatasetSpec, load_csv
from .pipeline import GoSdpcaConfig

METHOD_KINDS = ("gsp_star", "gsp", "sdpca", "sw", "lyb", "lasso", "naive")


@dataclass(frozen=True)
class MethodSpec:
    """One forecasting method to run at every grid point.

    ``tag`` labels the method in every artifact and defaults to the kind;
    give explicit tags to run the same kind twice with different settings.
    """

    kind: str
    tag: str = ""
    m_rounds: int = 10
    c: float = 2.0
    k_n: int | None = None
    fit_method: str = "ols"
    path_len: int = 100

    def __post_init__(self):
        if self.kind not in METHOD_KINDS:
            raise ConfigError(
                f"unknown method kind {self.kind!r}, expected one of "
                f"{METHOD_KINDS}"
            )
        if not self.tag:
            object.__setattr__(self, "tag", self.kind)


def build_forecaster(spec: MethodSpec, q: int, r: int, h: int):
    """Instantiate the forecaster a method spec describes at one grid point."""
    if spec.kind in ("gsp_star", "gsp"):
        rounds = spec.m_rounds if spec.kind == "gsp_star" else 1
        cfg = GoSdpcaConfig(
            r=r, q1=q, q2=q, q3=q, h=h, M=rounds,
            K_n=spec.k_n, C=spec.c, fit_method=spec.fit_method,
        )
        return GoSdpcaForecaster(cfg, tag=spec.tag)
    if spec.kind == "sdpca":
        return SdpcaForecaster(
            r=r, q2=q, q3=q, h=h, fit_method=spec.fit_method, tag=spec.tag
        )
    if spec.kind == "sw":
        return SwForecaster(r=r, q3=q, h=h, tag=spec.tag)
    if spec.kind == "lyb":
        return LybForecaster(r=r, q=q, q3=q, h=h, tag=spec.tag)
    if spec.kind == "lasso":
        return LassoForecaster(q=q, h=h, path_len=spec.path_len, tag=spec.tag)
    return NaiveForecaster(h=h, tag=spec.tag)


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything a run needs; serializes to and from run.json."""

    mode: str
    methods: tuple[MethodSpec, ...]
    q_grid: tuple[int, ...] = (2,)
    r_grid: tuple[int, ...] = (1,)
    h: int = 1
    test_len: int = 60
    replications: int = 100
    base_seed: int = 0
    reference: str | None = None
    dgp: DgpConfig | None = None
    dataset: DatasetSpec | None = None
    output_dir: str = "runs"
    workers: int | None = field(default=None)

    def __post_init__(self):
        if self.mode not in ("simulate", "forecast"):
            raise ConfigError(
                f"mode must be 'simulate' or 'forecast', got {self.mode!r}"
            )
        object.__setattr__(self, "methods", tuple(self.methods))
        if not self.methods:
            raise ConfigError("methods must be non-empty")
        tags = [m.tag for m in self.methods]
        if len(set(tags)) != len(tags):
            raise ConfigError(f"method tags must be unique, got {tags}")
        for name in ("q_grid", "r_grid"):
            grid = tuple(int(v) for v in getattr(self, name))
            if not grid or any(v < 1 for v in grid):
                raise ConfigError(f"{name} must be non-empty positive integers")
            object.__setattr__(self, name, grid)
        if self.h < 1 or self.test_len < 1 or self.replications < 1:
            raise ConfigError("h, test_len and replications must be at least 1")
        if self.base_seed < 0:
            raise ConfigError("base_seed must be non-negative")
        if (self.dgp is None) == (self.dataset is None):
            raise ConfigError("exactly one of dgp/dataset must be set")
        if self.mode == "simulate":
            if self.dgp is None:
                raise ConfigError("simulate mode needs a dgp block")
            if self.h != 1:
                raise ConfigError("the replication driver forecasts one step")
        if self.mode == "forecast" and self.dataset is None:
            raise ConfigError("forecast mode needs a dataset block")
        if self.reference is not None and self.reference not in tags:
            raise ConfigError(
                f"reference {self.reference!r} is not a method tag"
            )


def _pop_known(d: dict, what: str, known) -> dict:
    extra = set(d) - set(known)
    if extra:
        raise ConfigError(f"unknown {what} keys: {sorted(extra)}")
    return d


def config_from_dict(data: dict) -> ExperimentConfig:
    """Build a validated config from parsed JSON (run.json is accepted)."""
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    data = dict(data)
    data.pop("version", None)
    known = (
        "mode", "methods", "q_grid", "r_grid", "h", "test_len",
        "replications", "base_seed", "reference", "dgp", "dataset",
        "output_dir", "workers",
    )
    _pop_known(data, "config", known)
    if "methods" not in data:
        raise ConfigError("config needs a methods list")
    raw_methods = data.pop("methods")
    if not isinstance(raw_methods, (list, tuple)):
        raise ConfigError("methods must be a list")
    method_fields = ("kind", "tag", "m_rounds", "c", "k_n", "fit_method", "path_len")
    methods = tuple(
        MethodSpec(**_pop_known(dict(m), "method", method_fields))
        for m in raw_methods
    )
    dgp = data.pop("dgp", None)
    if dgp is not None:
        dgp = DgpConfig(
            **_pop_known(dict(dgp), "dgp", ("dgp_id", "n", "p", "r_dgp", "s", "seed"))
        )
    dataset = data.pop("dataset", None)
    if dataset is not None:
        dataset = DatasetSpec(
            **_pop_known(
                dict(dataset),
                "dataset",
                ("path", "target_column", "transform_codes", "date_column"),
            )
        )
    for grid in ("q_grid", "r_grid"):
        if grid in data:
            data[grid] = tuple(data[grid])
    return ExperimentConfig(methods=methods, dgp=dgp, dataset=dataset, **data)


def config_to_dict(cfg: ExperimentConfig) -> dict:
    out = asdict(cfg)
    out["methods"] = [asdict(m) for m in cfg.methods]
    out["q_grid"] = list(cfg.q_grid)
    out["r_grid"] = list(cfg.r_grid)
    return out


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_csv(path: str, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(v) for v in row])


def _dm_row(reference, tag, q, r, h, errors_ref, errors_other):
    if len(errors_ref) >= 8:
        res = dm_test(errors_ref, errors_other, h)
        return (
            reference, tag, q, r, res.n_forecasts, h,
            res.statistic, res.p_value,
            res.variance_floored, res.zero_differential,
        )
    # too few paired forecasts for the test; keep the row, leave stats blank
    return (reference, tag, q, r, len(errors_ref), h, None, None, None, None)


def _run_simulate(cfg: ExperimentConfig):
    summary, forecasts, dm_rows = [], [], []
    for q, r in product(cfg.q_grid, cfg.r_grid):
        methods = [build_forecaster(s, q, r, cfg.h) for s in cfg.methods]
        results = monte_carlo_study(
            cfg.dgp, methods, cfg.replications, cfg.base_seed,
            workers=cfg.workers,
        )
        for res in results:
            summary.append(
                (res.method, q, r, res.rmsfe, res.mc_stderr, res.n_ok, res.n_failed)
            )
            forecasts.extend(
                (res.method, q, r, rec.origin, rec.horizon,
                 rec.predicted, rec.realized, rec.config_digest)
                for rec in res.records
            )
        reference = cfg.reference or cfg.methods[0].tag
        ref = next(res for res in results if res.method == reference)
        ref_err = {rec.origin: rec.predicted - rec.realized for rec in ref.records}
        for res in results:
            if res.method == reference:
                continue
            pairs = [
                (ref_err[rec.origin], rec.predicted - rec.realized)
                for rec in res.records
                if rec.origin in ref_err
            ]
            ea = [p[0] for p in pairs]
            eb = [p[1] for p in pairs]
            dm_rows.append(_dm_row(reference, res.method, q, r, 1, ea, eb))
    header = ("method", "q", "r", "rmsfe", "mc_stderr", "n_ok", "n_failed")
    return header, summary, forecasts, dm_rows


def _run_forecast(cfg: ExperimentConfig):
    series, _report = load_csv(cfg.dataset)
    window = series.n_rows - cfg.test_len - cfg.h + 1
    if window < 1:
        raise InputError(
            f"test_len {cfg.test_len} and h {cfg.h} leave no training window "
            f"in {series.n_rows} rows"
        )
    summary, forecasts, dm_rows = [], [], []
    target = cfg.dataset.target_column
    for q, r in product(cfg.q_grid, cfg.r_grid):
        errors = {}
        for spec in cfg.methods:
            method = build_forecaster(spec, q, r, cfg.h)
            recs = rolling_forecast(
                series, target, method, window, cfg.h, cfg.test_len
            )
            summary.append((spec.tag, q, r, rmsfe(recs), len(recs)))
            forecasts.extend(
                (rec.method, q, r, rec.origin, rec.horizon,
                 rec.predicted, rec.realized, rec.config_digest)
                for rec in recs
            )
            errors[spec.tag] = [rec.predicted - rec.realized for rec in recs]
        reference = cfg.reference or cfg.methods[0].tag
        for spec in cfg.methods:
            if spec.tag == reference:
                continue
            dm_rows.append(
                _dm_row(
                    reference, spec.tag, q, r, cfg.h,
                    errors[reference], errors[spec.tag],
                )
            )
    header = ("method", "q", "r", "rmsfe", "n_windows")
    return header, summary, forecasts, dm_rows


def run_experiment(cfg: ExperimentConfig, output_dir: str | None = None) -> dict:
    """Run the configured experiment and write the four artifacts.

    Returns the artifact paths. ``output_dir`` overrides the configured one
    (useful for replaying a stored run.json into a fresh directory).
    """
    outdir = output_dir if output_dir is not None else cfg.output_dir
    os.makedirs(outdir, exist_ok=True)
    if cfg.mode == "simulate":
        summary_header, summary, forecasts, dm_rows = _run_simulate(cfg)
    else:
        summary_header, summary, forecasts, dm_rows = _run_forecast(cfg)
    paths = {
        "summary": os.path.join(outdir, "summary.csv"),
        "forecasts": os.path.join(outdir, "forecasts.csv"),
        "dm": os.path.join(outdir, "dm.csv"),
        "run": os.path.join(outdir, "run.json"),
    }
    _write_csv(paths["summary"], summary_header, summary)
    _write_csv(
        paths["forecasts"],
        ("method", "q", "r", "origin", "horizon",
         "predicted", "realized", "config_digest"),
        forecasts,
    )
    _write_csv(
        paths["dm"],
        ("method_a", "method_b", "q", "r", "n", "horizon",
         "statistic", "p_value", "variance_floored", "zero_differential"),
        dm_rows,
    )
    payload = {"version": __version__, **config_to_dict(cfg)}
    with open(paths["run"], "w", encoding="utf-8") as fh:
        fh.write(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return paths
