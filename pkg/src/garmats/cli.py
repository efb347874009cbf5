"""Command line entry point.

    garmats --input cases.csv --date-col date --value-col cases --out results/

Exit codes: 0 success, 1 input error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from .errors import GarmatsError, InputError, PipelineError
from .pipeline import PipelineConfig, RunReport, _json_default, run_pipeline

EXIT_OK, EXIT_INPUT, EXIT_NUMERICAL = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def parse_pairs(text: str) -> list[tuple[int, int]]:
    """``"1,1;0,5"`` -> ``[(1, 1), (0, 5)]``."""
    pairs = []
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        try:
            p, q = (int(v) for v in chunk.split(","))
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected 'p,q' pairs, got {chunk!r}") from None
        if p < 0 or q < 0:
            raise argparse.ArgumentTypeError(f"orders must be non-negative: {chunk!r}")
        pairs.append((p, q))
    if not pairs:
        raise argparse.ArgumentTypeError("no orders given")
    return pairs


def parse_pair(text: str) -> tuple[int, int]:
    pairs = parse_pairs(text)
    if len(pairs) != 1:
        raise argparse.ArgumentTypeError(f"expected a single 'p,q', got {text!r}")
    return pairs[0]


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="garmats", description="Box-Jenkins ARMA + Poisson GARMA pipeline for count series.")
    ap.add_argument("--input", required=True, help="CSV file with a header row")
    ap.add_argument("--date-col", default="date", help="ISO-8601 date column (default: date)")
    ap.add_argument("--value-col", default="cases", help="numeric column (default: cases)")
    ap.add_argument("--train-frac", type=float, default=0.9)
    ap.add_argument("--alpha", type=float, default=0.05, help="ADF significance level")
    ap.add_argument("--candidates", type=parse_pairs, default=[(1, 1), (0, 5)], help='ARMA orders, e.g. "1,1;0,5"')
    ap.add_argument("--horizon", type=int, default=None, help="forecast steps (default: test length)")
    ap.add_argument("--garma", type=parse_pair, default=(1, 1), help='GARMA order "p,q"')
    ap.add_argument("--out", default="garmats-out", help="output directory")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--lb-lags", type=int, default=10, help="Ljung-Box lags")
    ap.add_argument("--format", choices=("json", "text"), default="text")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def format_text(report: RunReport) -> str:
    s = report.summary
    lines = [
        "Summary: "
        + ", ".join(f"{k}={v:.6g}" for k, v in s.as_dict().items()),
        f"Split: train={report.train_len} test={report.test_len}",
    ]
    for name, r in (("ADF before", report.adf_before), ("ADF after", report.adf_after)):
        if r is not None:
            flag = f" (clamped {r.clamped})" if r.clamped != "none" else ""
            lines.append(f"{name}: stat={r.statistic:.4f} lag={r.lag_order} p={r.p_value:.4f}{flag}")
    lines.append(f"Differences applied: {report.d_used}")
    ident = report.identification
    lines.append(f"ACF: {ident['acf_pattern']}  PACF: {ident['pacf_pattern']}")
    lines.append("")
    lines.append(f"{'model':<12}{'AIC':>12}{'RMSE 1-step':>14}{'MAE 1-step':>12}{'RMSE h-step':>14}{'MAE h-step':>12}{'LB p':>10}")
    for m in report.model_reports:
        ev = m["evaluation"]
        lines.append(
            f"{m['label']:<12}{m['aic']:>12.2f}{ev['one_step']['rmse']:>14.3f}{ev['one_step']['mae']:>12.3f}"
            f"{ev['h_step']['rmse']:>14.3f}{ev['h_step']['mae']:>12.3f}{m['ljung_box']['p_value']:>10.5f}"
            + ("" if m["converged"] else "  (not converged)")
        )
        for row in m["coefficients"]:
            se = "NA" if row["std_error"] is None else f"{row['std_error']:.6g}"
            lines.append(f"    {row['term']:<8}{row['estimate']:>14.6g}  se {se}")
    lines.append(f"Selected (min AIC): {report.selected}")
    lb = report.ljung_box
    lines.append(f"Ljung-Box on {report.selected}: Q={lb.q_stat:.4f} df={lb.df} p={lb.p_value:.5f}")
    for g in report.garma:
        if "skipped" in g:
            lines.append(f"{g['label']}: skipped ({g['skipped']})")
            continue
        lines.append(f"{g['label']}: loglik={g['loglik']:.3f}" + ("" if g["converged"] else " (not converged)"))
        for row in g["coefficients"]:
            se = "NA" if row["std_error"] is None else f"{row['std_error']:.6g}"
            lines.append(f"    {row['term']:<10}{row['estimate']:>14.6g}  se {se}")
    if report.artifact_paths:
        lines.append(f"Wrote {len(report.artifact_paths)} files")
    return "\n".join(lines)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        config = PipelineConfig(
            input_path=args.input,
            date_column=args.date_col or None,
            value_column=args.value_col,
            train_fraction=args.train_frac,
            alpha=args.alpha,
            candidates=args.candidates,
            forecast_horizon=args.horizon,
            garma_orders=args.garma,
            output_dir=args.out,
            seed=args.seed,
            ljung_box_lags=args.lb_lags,
        )
        report = run_pipeline(config)
    except GarmatsError as exc:
        cause = exc.cause if isinstance(exc, PipelineError) else exc
        print(f"garmats: error: {exc}", file=sys.stderr)
        return EXIT_INPUT if isinstance(cause, InputError) else EXIT_NUMERICAL
    except (ArithmeticError, ValueError, FloatingPointError, OSError) as exc:
        print(f"garmats: internal failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL

    if args.format == "json":
        print(json.dumps(report.to_dict(), indent=2, default=_json_default))
    else:
        print(format_text(report))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
