"""End-to-end Box-Jenkins run: identify, fit, select, diagnose, forecast, report."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
from scipy.special import comb

from . import arma, correlogram, diagnostics, garma, plots, stationarity
from .errors import GarmatsError, InputError, NonCountData, PipelineError, SeriesTooShort
from .ingest import ingest_csv
from .series import SummaryStats, TimeSeries, difference, split, summarize

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
MAX_DIFFERENCES = 2


@dataclass
class PipelineConfig:
    input_path: str
    date_column: Optional[str] = "date"
    value_column: str = "cases"
    train_fraction: float = 0.9
    alpha: float = 0.05
    candidates: list = field(default_factory=lambda: [(1, 1), (0, 5)])
    forecast_horizon: Optional[int] = None
    garma_orders: tuple = (1, 1)
    output_dir: str = "garmats-out"
    seed: int = 0
    ljung_box_lags: int = 10

    def __post_init__(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise InputError("train_fraction must lie in (0, 1)")
        if not 0.0 < self.alpha < 1.0:
            raise InputError("alpha must lie in (0, 1)")
        if not self.candidates:
            raise InputError("at least one candidate order is required")
        self.candidates = [tuple(int(v) for v in c) for c in self.candidates]
        self.garma_orders = tuple(int(v) for v in self.garma_orders)
        if self.forecast_horizon is not None and self.forecast_horizon < 1:
            raise InputError("forecast horizon must be positive")


@dataclass
class ModelResult:
    fit: arma.ArmaFit
    report: diagnostics.EvalReport
    one_step: np.ndarray
    h_step: np.ndarray
    h_step_se: np.ndarray
    residuals: TimeSeries


@dataclass
class RunReport:
    summary: SummaryStats
    adf_before: Optional[stationarity.AdfResult]
    adf_after: Optional[stationarity.AdfResult]
    d_used: int
    train_len: int
    test_len: int
    model_reports: list
    selected: str
    ljung_box: diagnostics.LjungBoxResult
    garma: list
    identification: dict
    forecast: dict
    artifact_paths: list = field(default_factory=list)
    notes: list = field(default_factory=list)
    adf_passes: list = field(default_factory=list)
    seed: int = 0

    def to_dict(self) -> dict:
        return {
            "schema": SCHEMA_VERSION,
            "summary": self.summary.as_dict(),
            "split": {"train_len": self.train_len, "test_len": self.test_len},
            "adf_before": None if self.adf_before is None else self.adf_before.as_dict(),
            "adf_after": None if self.adf_after is None else self.adf_after.as_dict(),
            "adf_passes": [r.as_dict() for r in self.adf_passes],
            "d_used": self.d_used,
            "seed": self.seed,
            "identification": self.identification,
            "models": self.model_reports,
            "selected": self.selected,
            "ljung_box": self.ljung_box.as_dict(),
            "garma": self.garma,
            "forecast": self.forecast,
            "artifact_paths": self.artifact_paths,
            "notes": self.notes,
        }


class _Stage:
    """Context manager tagging package errors with the stage they came from."""

    def __init__(self, name: str):
        self.name = name

    def __enter__(self):
        logger.debug("stage %s", self.name)
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc is not None and isinstance(exc, GarmatsError) and not isinstance(exc, PipelineError):
            raise PipelineError(self.name, exc) from exc
        return False


def integrate_forecast(diff_forecast: np.ndarray, train: TimeSeries, d: int) -> np.ndarray:
    """Map forecasts of the d-times differenced series back to levels."""
    out = np.asarray(diff_forecast, dtype=float)
    for k in range(d - 1, -1, -1):
        last = difference(train, k).values[-1] if k else train.values[-1]
        out = last + np.cumsum(out)
    return out


def integrate_one_step(diff_pred: np.ndarray, levels: np.ndarray, positions: np.ndarray, d: int) -> np.ndarray:
    """Level predictions from one-step predictions of the d-th difference.

    Uses x_t = D^d x_t - sum_{j=1..d} C(d, j) (-1)^j x_{t-j} with observed past levels.
    """
    out = np.asarray(diff_pred, dtype=float).copy()
    for j in range(1, d + 1):
        out -= comb(d, j, exact=True) * (-1) ** j * levels[positions - j]
    return out


def arima_psi(fit: arma.ArmaFit, d: int, h: int) -> np.ndarray:
    ar = np.r_[1.0, -fit.phi]
    for _ in range(d):
        ar = np.convolve(ar, [1.0, -1.0])
    return arma.psi_weights(-ar[1:], fit.theta, h)


def _slug(label: str) -> str:
    return label.lower().replace("(", "_").replace(")", "").replace(",", "_")


def _fit_candidates(config, stationary_train, series, train, d, test_len):
    results = []
    full_diff = difference(series, d) if d else series
    horizon = test_len
    for p, q in config.candidates:
        spec = arma.ArmaSpec(p, q, include_mean=True)
        with _Stage("fit"):
            fit = arma.fit(stationary_train, spec)
        if not fit.converged:
            logger.warning("%s did not converge; keeping best point", spec.label)
        with _Stage("evaluate"):
            start = len(train) - d
            diff_pred = arma.predict_one_step(fit, full_diff, start)
            positions = np.arange(len(train), len(series))
            one_step = integrate_one_step(diff_pred, series.values, positions, d)
            fc = arma.forecast(fit, stationary_train, horizon)
            h_step = integrate_forecast(fc.point, train, d)
            h_se = np.sqrt(fit.sigma2 * np.cumsum(arima_psi(fit, d, horizon) ** 2))
            actual = series.values[len(train) :]
            resid = arma.residuals(fit, stationary_train)
            lb = diagnostics.ljung_box(resid, config.ljung_box_lags, p + q)
            rep = diagnostics.EvalReport(
                model_label=spec.label,
                mae=diagnostics.mae(one_step, actual),
                rmse=diagnostics.rmse(one_step, actual),
                aic=diagnostics.aic(fit.loglik, spec.n_coef),
                ljung_box=lb,
                extra={
                    "one_step": {
                        "mae": diagnostics.mae(one_step, actual),
                        "rmse": diagnostics.rmse(one_step, actual),
                    },
                    "h_step": {
                        "mae": diagnostics.mae(h_step, actual),
                        "rmse": diagnostics.rmse(h_step, actual),
                    },
                },
            )
        results.append(ModelResult(fit, rep, one_step, h_step, h_se, resid))
    return results


def _model_dict(res: ModelResult) -> dict:
    fit, rep = res.fit, res.report
    return {
        "label": rep.model_label,
        "order": [fit.spec.p, fit.spec.q],
        "coefficients": fit.coefficient_table(),
        "ma_sign_convention": "X_t = ... + e_t - sum theta_j e_{t-j}",
        "loglik": fit.loglik,
        "n_params": fit.n_coef,
        "aic": rep.aic,
        "mae": rep.mae,
        "rmse": rep.rmse,
        "evaluation": rep.extra,
        "ljung_box": rep.ljung_box.as_dict(),
        "converged": fit.converged,
        "n_obs": fit.n_obs,
    }


def _garma_dict(fit: garma.GarmaFit) -> dict:
    return {
        "label": fit.spec.label,
        "order": [fit.spec.p, fit.spec.q],
        "coefficients": fit.coefficient_table(),
        "loglik": fit.loglik,
        "aic": diagnostics.aic(fit.loglik, fit.n_coef),
        "converged": fit.converged,
        "n_obs": fit.n_obs,
        "clamp_c": fit.spec.clamp_c,
    }


def _garma_stage(config, train: TimeSeries, notes: list) -> list:
    p, q = config.garma_orders
    orders = [(p, q)]
    if q > 0:
        orders.append((p, 0))
    out = []
    for gp, gq in orders:
        spec = garma.GarmaSpec(gp, gq)
        try:
            with _Stage("garma"):
                fit = garma.garma_fit(train, spec)
        except PipelineError as exc:
            if isinstance(exc.cause, NonCountData):
                msg = f"{spec.label} skipped: training data are not non-negative integer counts"
                logger.warning(msg)
                notes.append(msg)
                out.append({"label": spec.label, "order": [gp, gq], "skipped": str(exc.cause)})
                continue
            raise
        out.append(_garma_dict(fit))
    return out


def run_pipeline(config: PipelineConfig, series: Optional[TimeSeries] = None) -> RunReport:
    """Run every stage in order. ``series`` bypasses CSV ingestion when given."""
    notes: list[str] = []
    if series is None:
        with _Stage("ingest"):
            series = ingest_csv(config.input_path, config.date_column, config.value_column)

    with _Stage("summarize"):
        summary = summarize(series)
    with _Stage("split"):
        train, test = split(series, config.train_fraction)

    with _Stage("stationarity"):
        current, d = train, 0
        try:
            adf_before = stationarity.adf_test(train)
        except SeriesTooShort as exc:
            adf_before = None
            msg = f"ADF skipped, series too short: {exc}"
            logger.warning(msg)
            notes.append(msg)
        adf_after = adf_before
        passes = [] if adf_before is None else [adf_before]
        while adf_after is not None and not stationarity.is_stationary(adf_after, config.alpha):
            if d == MAX_DIFFERENCES:
                raise PipelineError(
                    "stationarity",
                    InputError(
                        f"still non-stationary after {MAX_DIFFERENCES} differences "
                        f"(ADF p={adf_after.p_value:.3f})"
                    ),
                )
            current = difference(current, 1)
            d += 1
            adf_after = stationarity.adf_test(current)
            passes.append(adf_after)
    stationary_train = current

    with _Stage("identify"):
        acf_c = correlogram.acf(stationary_train)
        pacf_c = correlogram.pacf(stationary_train)
        identification = {
            "max_lag": int(len(pacf_c.coefficients)),
            "band": acf_c.band,
            "acf_pattern": str(correlogram.classify_pattern(acf_c)),
            "pacf_pattern": str(correlogram.classify_pattern(pacf_c)),
        }

    results = _fit_candidates(config, stationary_train, series, train, d, len(test))

    with _Stage("select"):
        ranked = diagnostics.rank_models([r.report for r in results])
        selected_label = ranked[0].model_label
        selected = next(r for r in results if r.report.model_label == selected_label)

    garma_tables = _garma_stage(config, train, notes)

    with _Stage("forecast"):
        h = config.forecast_horizon or len(test)
        fc = arma.forecast(selected.fit, stationary_train, h)
        levels = integrate_forecast(fc.point, train, d)
        se = np.sqrt(selected.fit.sigma2 * np.cumsum(arima_psi(selected.fit, d, h) ** 2))
        forecast_block = {
            "model": selected_label,
            "horizon": h,
            "point": levels.tolist(),
            "se": se.tolist(),
        }

    report = RunReport(
        summary=summary,
        adf_before=adf_before,
        adf_after=adf_after,
        d_used=d,
        train_len=len(train),
        test_len=len(test),
        model_reports=[_model_dict(r) for r in results],
        selected=selected_label,
        ljung_box=selected.report.ljung_box,
        garma=garma_tables,
        identification=identification,
        forecast=forecast_block,
        notes=notes,
        adf_passes=passes,
        seed=config.seed,
    )

    if config.output_dir:
        with _Stage("emit"):
            figures = build_figures(series, train, stationary_train, acf_c, pacf_c, results, selected)
            report.artifact_paths = emit_plot_data(report, figures, config.output_dir)
    return report


def build_figures(series, train, stationary_train, acf_c, pacf_c, results, selected) -> list:
    t_all = np.arange(1, len(series) + 1)
    dates = series.index

    def date_col(positions):
        if dates is None:
            return [None] * len(positions)
        return [dates[i].isoformat() for i in positions]

    figs = [
        plots.FigureData(
            "fig01_series",
            "Observed series",
            {"t": t_all.tolist(), "date": date_col(range(len(series))), "value": series.values.tolist()},
            series=["value"],
            colors={"value": "k"},
        ),
    ]
    d = stationary_train.d_applied
    t_st = np.arange(d + 1, len(train) + 1)
    figs.append(
        plots.FigureData(
            "fig02_stationary",
            f"Training series after {d} difference(s)",
            {
                "t": t_st.tolist(),
                "date": date_col(range(d, len(train))),
                "value": stationary_train.values.tolist(),
            },
            series=["value"],
            colors={"value": "k"},
        )
    )
    theo, sample = plots.qq_pairs(stationary_train.values)
    figs.append(
        plots.FigureData(
            "fig03_qq",
            "Normal Q-Q plot of the stationary series",
            {"theoretical": theo.tolist(), "sample": sample.tolist()},
            kind="scatter",
            x="theoretical",
            series=["sample"],
        )
    )
    for stem, title, c in (("fig04_acf", "ACF", acf_c), ("fig05_pacf", "PACF", pacf_c)):
        figs.append(
            plots.FigureData(
                stem,
                f"{title} of the stationary series",
                {
                    "lag": c.lags.tolist(),
                    "coefficient": c.coefficients.tolist(),
                    "band": [c.band] * len(c.coefficients),
                },
                kind="stem",
                x="lag",
                series=["coefficient"],
                band="band",
            )
        )

    t_test = np.arange(len(train) + 1, len(series) + 1)
    test_dates = date_col(range(len(train), len(series)))
    actual = series.values[len(train) :].tolist()
    for i, res in enumerate(results):
        slug = _slug(res.report.model_label)
        fnum, pnum = ("06", "08") if i == 0 else ("07", "09")
        lo = res.h_step - 1.96 * res.h_step_se
        hi = res.h_step + 1.96 * res.h_step_se
        figs.append(
            plots.FigureData(
                f"fig{fnum}_forecast_{slug}",
                f"{res.report.model_label}: forecasts from the end of the training window",
                {
                    "t": t_test.tolist(),
                    "date": test_dates,
                    "actual": actual,
                    "forecast": res.h_step.tolist(),
                    "lower95": lo.tolist(),
                    "upper95": hi.tolist(),
                },
                series=["actual", "forecast", "lower95", "upper95"],
                colors={"actual": "k", "forecast": "tab:red", "lower95": "0.6", "upper95": "0.6"},
            )
        )
        figs.append(
            plots.FigureData(
                f"fig{pnum}_prediction_{slug}",
                f"{res.report.model_label}: one-step predictions vs actual",
                {"t": t_test.tolist(), "actual": actual, "predicted": res.one_step.tolist()},
                series=["actual", "predicted"],
                colors={"actual": "k", "predicted": "tab:red"},
            )
        )
    resid = selected.residuals
    figs.append(
        plots.FigureData(
            "fig10_residuals",
            f"Residuals of {selected.report.model_label}",
            {"t": t_st.tolist(), "date": date_col(range(d, len(train))), "residual": resid.values.tolist()},
            series=["residual"],
            colors={"residual": "k"},
        )
    )
    return figs


def emit_plot_data(report: RunReport, figures: list, output_dir) -> list[str]:
    """Write figure CSV/SVG pairs and ``report.json``; returns every path written."""
    out = Path(output_dir)
    paths = plots.emit(figures, out)
    report_path = out / "report.json"
    paths.append(str(report_path))
    report.artifact_paths = paths
    report_path.write_text(json.dumps(report.to_dict(), indent=2, allow_nan=False, default=_json_default) + "\n")
    return paths


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialise {type(obj).__name__}")
