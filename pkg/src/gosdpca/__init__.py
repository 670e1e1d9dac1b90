"""Forecasting with many predictors: greedy group screening with a
high-dimensional information criterion, peeling, supervised dynamic PCA,
benchmark factor and shrinkage methods, and a rolling-window evaluation
harness with simulated data generators and a CSV/JSON command line."""

from ._version import __version__
from .baselines import LassoFit, lasso_bic, lasso_coordinate_descent, lyb_factors, sw_factors
from .dgp import BURN_IN, DgpConfig, DgpTruth, GeneratedPanel, generate_panel, replay_target
from .errors import ConfigError, ConvergenceError, InputError
from .evaluation import (
    DmResult,
    ForecastRecord,
    McMethodResult,
    dm_test,
    monte_carlo_study,
    rmsfe,
    rolling_forecast,
)
from .experiment import (
    ExperimentConfig,
    MethodSpec,
    build_forecaster,
    config_from_dict,
    config_to_dict,
    run_experiment,
)
from .forecasters import (
    GoSdpcaForecaster,
    LassoForecaster,
    LybForecaster,
    NaiveForecaster,
    SdpcaForecaster,
    SwForecaster,
    TruthOracleForecaster,
)
from .io import DatasetSpec, LoadReport, load_csv, read_forecast_errors, save_series_csv
from .pipeline import FittedGoSdpca, GoSdpcaConfig, fit_go_sdpca, predict_go_sdpca
from .sdpca import (
    FactorPanel,
    IntermediatePanel,
    PredictiveModel,
    build_intermediate_panel,
    extract_sdpca_factors,
    fit_predictive,
    forecast_one,
    predictor_xhat,
    select_lag_bic,
)
from .selection import (
    GroupDesign,
    PeelResult,
    SelectionResult,
    build_group_design,
    goga_hdaic,
    goga_step,
    hdaic,
    peel,
)
from .series import SeriesMatrix

__all__ = [
    "__version__",
    "BURN_IN",
    "ConfigError",
    "ConvergenceError",
    "DatasetSpec",
    "DgpConfig",
    "DgpTruth",
    "DmResult",
    "ExperimentConfig",
    "FactorPanel",
    "FittedGoSdpca",
    "ForecastRecord",
    "GeneratedPanel",
    "GoSdpcaConfig",
    "GoSdpcaForecaster",
    "GroupDesign",
    "InputError",
    "IntermediatePanel",
    "LassoFit",
    "LassoForecaster",
    "LoadReport",
    "LybForecaster",
    "McMethodResult",
    "MethodSpec",
    "NaiveForecaster",
    "PeelResult",
    "PredictiveModel",
    "SdpcaForecaster",
    "SelectionResult",
    "SeriesMatrix",
    "SwForecaster",
    "TruthOracleForecaster",
    "build_forecaster",
    "build_group_design",
    "build_intermediate_panel",
    "config_from_dict",
    "config_to_dict",
    "dm_test",
    "extract_sdpca_factors",
    "fit_go_sdpca",
    "fit_predictive",
    "forecast_one",
    "generate_panel",
    "goga_hdaic",
    "goga_step",
    "hdaic",
    "lasso_bic",
    "lasso_coordinate_descent",
    "load_csv",
    "lyb_factors",
    "monte_carlo_study",
    "peel",
    "predict_go_sdpca",
    "predictor_xhat",
    "read_forecast_errors",
    "replay_target",
    "rmsfe",
    "rolling_forecast",
    "run_experiment",
    "save_series_csv",
    "select_lag_bic",
    "sw_factors",
]
