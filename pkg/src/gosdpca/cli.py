"""Command-line surface.

Subcommands: ``simulate`` and ``forecast`` run a JSON-configured experiment,
``dm`` compares two stored forecast tables, ``export-dgp`` writes a
generated panel as CSV. Exit codes: 0 success, 2 configuration error,
3 runtime error; errors are reported as one JSON object on standard error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, replace

import numpy as np

from ._version import __version__
from .dgp import DgpConfig, generate_panel
from .errors import InputError
from .evaluation import dm_test
from .experiment import config_from_dict, run_experiment
from .io import read_forecast_errors, save_series_csv


def _load_json(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON: {exc}") from None


def _cmd_experiment(args) -> int:
    cfg = config_from_dict(_load_json(args.config))
    if cfg.mode != args.command:
        raise InputError(
            f"config mode is {cfg.mode!r} but the {args.command!r} "
            "subcommand was invoked"
        )
    if args.workers is not None:
        cfg = replace(cfg, workers=args.workers)
    paths = run_experiment(cfg, output_dir=args.output_dir)
    print(json.dumps({"artifacts": paths}, sort_keys=True))
    return 0


def _cmd_dm(args) -> int:
    errors_a, origins_a = read_forecast_errors(args.a)
    errors_b, origins_b = read_forecast_errors(args.b)
    if origins_a is not None and origins_b is not None:
        common = [o for o in origins_a if o in set(origins_b)]
        pos_a = {o: i for i, o in enumerate(origins_a)}
        pos_b = {o: i for i, o in enumerate(origins_b)}
        errors_a = np.asarray([errors_a[pos_a[o]] for o in common])
        errors_b = np.asarray([errors_b[pos_b[o]] for o in common])
    elif len(errors_a) != len(errors_b):
        raise InputError(
            f"{len(errors_a)} vs {len(errors_b)} forecasts and no origin "
            "columns to align on"
        )
    res = dm_test(errors_a, errors_b, args.horizon)
    print(json.dumps(asdict(res), sort_keys=True))
    return 0


def _cmd_export_dgp(args) -> int:
    data = _load_json(args.config)
    if not isinstance(data, dict):
        raise InputError("export config must be a JSON object")
    if "dgp" in data:
        data = data["dgp"]
    known = ("dgp_id", "n", "p", "r_dgp", "s", "seed")
    extra = set(data) - set(known)
    if extra:
        raise InputError(f"unknown dgp keys: {sorted(extra)}")
    panel = generate_panel(DgpConfig(**data))
    save_series_csv(panel.series, args.out)
    print(
        json.dumps(
            {
                "out": args.out,
                "rows": panel.series.n_rows,
                "columns": panel.series.n_cols,
            },
            sort_keys=True,
        )
    )
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gosdpca",
        description="Greedy screening + supervised dynamic PCA forecasting harness",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    for name, doc in (
        ("simulate", "run a replicated simulation study from a JSON config"),
        ("forecast", "run a rolling-window comparison from a JSON config"),
    ):
        p = sub.add_parser(name, help=doc)
        p.add_argument("--config", required=True, help="JSON config file")
        p.add_argument(
            "--output-dir", default=None, help="override the configured output_dir"
        )
        p.add_argument(
            "--workers", type=int, default=None,
            help="parallel workers (default: GOSDPCA_WORKERS or all cores)",
        )
        p.set_defaults(func=_cmd_experiment)

    p = sub.add_parser("dm", help="paired accuracy test on two forecast tables")
    p.add_argument("--a", required=True, help="forecast CSV for method a")
    p.add_argument("--b", required=True, help="forecast CSV for method b")
    p.add_argument(
        "--h", dest="horizon", type=int, required=True, help="forecast horizon"
    )
    p.set_defaults(func=_cmd_dm)

    p = sub.add_parser("export-dgp", help="write a generated panel as CSV")
    p.add_argument(
        "--config", required=True, help="JSON file with the generator fields"
    )
    p.add_argument("--out", required=True, help="destination CSV path")
    p.set_defaults(func=_cmd_export_dgp)
    return parser


def _report(exc: Exception) -> None:
    payload = {"error": {"type": type(exc).__name__, "message": str(exc)}}
    print(json.dumps(payload, sort_keys=True), file=sys.stderr)


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        _report(exc)
        return 2
    except Exception as exc:  # noqa: BLE001 - the CLI boundary maps everything
        _report(exc)
        return 3


if __name__ == "__main__":
    sys.exit(main())
