"""Count-aware Box-Jenkins modelling: ARMA by exact maximum likelihood and Poisson GARMA."""

from .arma import ArmaFit, ArmaParams, ArmaSpec
from .correlogram import Correlogram, acf, classify_pattern, pacf
from .diagnostics import EvalReport, LjungBoxResult, aic, ljung_box, mae, rank_models, rmse
from .garma import GarmaFit, GarmaParams, GarmaSpec, garma_fit, garma_loglik, garma_simulate
from .ingest import ingest_csv
from .pipeline import PipelineConfig, RunReport, run_pipeline
from .series import SummaryStats, TimeSeries, difference, split, summarize, undifference
from .stationarity import AdfResult, adf_test, is_stationary

__version__ = "0.1.0"

__all__ = [
    "ArmaFit",
    "ArmaParams",
    "ArmaSpec",
    "Correlogram",
    "acf",
    "classify_pattern",
    "pacf",
    "EvalReport",
    "LjungBoxResult",
    "aic",
    "ljung_box",
    "mae",
    "rank_models",
    "rmse",
    "GarmaFit",
    "GarmaParams",
    "GarmaSpec",
    "garma_fit",
    "garma_loglik",
    "garma_simulate",
    "ingest_csv",
    "PipelineConfig",
    "RunReport",
    "run_pipeline",
    "SummaryStats",
    "TimeSeries",
    "difference",
    "split",
    "summarize",
    "undifference",
    "AdfResult",
    "adf_test",
    "is_stationary",
]
