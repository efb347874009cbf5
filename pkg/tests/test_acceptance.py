"""Acceptance criteria, one PASS/FAIL/SKIP line each.

Criteria 1-7 need no external data. Criteria 8-12 run against the public
Indonesia daily-cases CSV (2020-03-02 .. 2021-04-30) when it is supplied via
GARMATS_CASES_CSV or tests/data/indonesia_daily_cases.csv, and skip otherwise.

Run ``pytest tests/test_acceptance.py -s`` to see the lines inline; they are
also collected into an "acceptance criteria" section of the terminal summary.
"""

import math
import time

import numpy as np
import pytest

from conftest import cases_csv_path
from garmats import arma, correlogram, diagnostics, garma, stationarity
from garmats.arma import ArmaParams, ArmaSpec
from garmats.diagnostics import EvalReport
from garmats.garma import GarmaParams, GarmaSpec
from garmats.pipeline import PipelineConfig, run_pipeline
from garmats.series import TimeSeries
from oracles import acf_double_loop, dense_arma_loglik, pacf_yule_walker, random_stable_poly


def record(log, number, title, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:>2}: {title} -- {detail}"
    print(line)
    log.append(line)
    assert ok, line


def skip(log, number, title, why):
    line = f"[SKIP] criterion {number:>2}: {title} -- {why}"
    print(line)
    log.append(line)
    pytest.skip(why)


# -- property suite -------------------------------------------------------------------


def test_c01_correlogram_oracles(acceptance_log):
    rng = np.random.default_rng(1)
    t0 = time.perf_counter()
    acf_err = pacf_err = 0.0
    for _ in range(100):
        n = int(rng.integers(20, 201))
        x = rng.normal(size=n).cumsum() if rng.random() < 0.3 else rng.normal(size=n)
        lag = correlogram.default_max_lag(n)
        ts = TimeSeries(x)
        got = correlogram.acf(ts, lag).coefficients
        want = acf_double_loop(x, lag)
        acf_err = max(acf_err, float(np.max(np.abs(got - want))))
        pac = correlogram.pacf(ts, lag).coefficients
        yw = [pacf_yule_walker(want[1:], k) for k in range(1, lag + 1)]
        pacf_err = max(pacf_err, float(np.max(np.abs(pac - yw))))
    elapsed = time.perf_counter() - t0
    ok = acf_err <= 1e-12 and pacf_err <= 1e-8 and elapsed < 10
    record(acceptance_log, 1, "ACF/PACF vs direct oracles", ok,
           f"max ACF err {acf_err:.1e} (tol 1e-12), max PACF err {pacf_err:.1e} (tol 1e-8), {elapsed:.1f}s (< 10s)")


def test_c02_exact_likelihood_oracle(acceptance_log):
    rng = np.random.default_rng(2)
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(200):
        p, q = int(rng.integers(0, 3)), int(rng.integers(0, 3))
        n = int(rng.integers(p + q + 2, 11))
        phi = random_stable_poly(rng, p)
        theta = random_stable_poly(rng, q)
        mean, sigma2 = float(rng.normal()), float(rng.uniform(0.3, 3))
        x = rng.normal(mean, 1.5, size=n)
        got = arma.loglik(TimeSeries(x), ArmaSpec(p, q), ArmaParams(phi, theta, mean, sigma2))
        worst = max(worst, abs(got - dense_arma_loglik(x, phi, theta, mean, sigma2)))
    elapsed = time.perf_counter() - t0
    record(acceptance_log, 2, "Kalman loglik vs dense MVN density", worst <= 1e-8 and elapsed < 30,
           f"max abs err {worst:.1e} over 200 cases (tol 1e-8), {elapsed:.1f}s (< 30s)")


def test_c03_simulate_recover(acceptance_log):
    settings = {
        "AR(1) phi=0.7": (ArmaSpec(1, 0), ArmaParams([0.7], [], 0.0, 1.0)),
        "MA(1) theta=0.5": (ArmaSpec(0, 1), ArmaParams([], [0.5], 0.0, 1.0)),
        "ARMA(1,1) (0.6,0.3)": (ArmaSpec(1, 1), ArmaParams([0.6], [0.3], 0.0, 1.0)),
    }
    t0 = time.perf_counter()
    hits = {}
    for name, (spec, truth) in settings.items():
        good = 0
        for seed in range(20):
            y = arma.simulate(spec, truth, 5000, seed=seed)
            f = arma.fit(y, spec)
            est = np.r_[f.phi, f.theta]
            good += bool(np.all(np.abs(est - np.r_[truth.phi, truth.theta]) <= 0.05))
        hits[name] = good
    elapsed = time.perf_counter() - t0
    ok = all(v >= 19 for v in hits.values()) and elapsed < 120
    detail = ", ".join(f"{k}: {v}/20" for k, v in hits.items())
    # Not part of the gate: the same pair read with the MA sign flipped, which
    # moves the AR and MA roots apart and shrinks the sampling spread.
    flipped = sum(
        bool(np.all(np.abs(np.r_[f.phi, f.theta] - [0.6, -0.3]) <= 0.05))
        for f in (arma.fit(arma.simulate(ArmaSpec(1, 1), ArmaParams([0.6], [-0.3], 0.0, 1.0), 5000, seed=s),
                           ArmaSpec(1, 1)) for s in range(20))
    )
    record(acceptance_log, 3, "ARMA simulate-recover within 0.05", ok,
           f"{detail} (need >= 19), {elapsed:.1f}s (< 120s); info only: theta=-0.3 gives {flipped}/20")


def test_c04_adf_size_power(acceptance_log):
    t0 = time.perf_counter()
    walk_hits = noise_hits = 0
    for seed in range(100):
        e = np.random.default_rng(seed).normal(size=1000)
        walk_hits += stationarity.adf_test(TimeSeries(e.cumsum())).p_value > 0.10
        r = stationarity.adf_test(TimeSeries(e))
        noise_hits += r.p_value == 0.01 and r.clamped == "low"
    elapsed = time.perf_counter() - t0
    ok = walk_hits >= 90 and noise_hits >= 95 and elapsed < 60
    record(acceptance_log, 4, "ADF size/power, n=1000, seeds 0..99", ok,
           f"random walk p>0.10 in {walk_hits}/100 (need >= 90), noise clamped 0.01 in {noise_hits}/100 "
           f"(need >= 95), {elapsed:.1f}s (< 60s)")


def test_c05_ljung_box_calibration(acceptance_log):
    rejections = 0
    for seed in range(200):
        e = np.random.default_rng(seed).normal(size=2000)
        rejections += diagnostics.ljung_box(e, lags=10).p_value < 0.1
    frac = rejections / 200
    record(acceptance_log, 5, "Ljung-Box size on white noise", 0.075 <= frac <= 0.175,
           f"fraction p<0.1 = {frac:.3f} (need in [0.075, 0.175])")


def test_c06_garma_closed_form_and_recovery(acceptance_log):
    rng = np.random.default_rng(6)
    worst = 0.0
    for _ in range(10):
        y = rng.poisson(rng.uniform(0.5, 50), size=int(rng.integers(50, 500)))
        f = garma.garma_fit(TimeSeries(y.astype(float)), GarmaSpec(0, 0))
        worst = max(worst, abs(f.beta[0] - math.log(y.mean())))

    spec = GarmaSpec(1, 0)
    phi_hits = 0
    for seed in range(20):
        y = garma.garma_simulate(spec, GarmaParams([2.0], [0.4]), 3000, seed=seed)
        phi_hits += abs(garma.garma_fit(y, spec).phi[0] - 0.4) <= 0.1

    grid_ok, cells = True, []
    for b0 in (0.5, 2.0):
        for phi in (0.2, 0.4):
            fits = [
                garma.garma_fit(garma.garma_simulate(spec, GarmaParams([b0], [phi]), 3000, seed=100 + s), spec)
                for s in range(20)
            ]
            est = np.array([np.r_[f.beta, f.phi] for f in fits])
            # Monte-Carlo s.e. of the mean estimate, from the per-fit Hessian s.e.
            mc_se = np.array([[f.se["intercept"], f.se["ar1"]] for f in fits]).mean(axis=0) / math.sqrt(len(fits))
            z = np.abs(est.mean(axis=0) - [b0, phi]) / mc_se
            grid_ok &= bool(np.all(z <= 3))
            cells.append(f"({b0},{phi}) z={z.max():.1f}")
    ok = worst <= 1e-6 and phi_hits >= 18 and grid_ok
    record(acceptance_log, 6, "GARMA closed form and recovery", ok,
           f"intercept-only max |b0 - ln ybar| {worst:.1e} (tol 1e-6); phi=0.4+-0.1 in {phi_hits}/20 (need >= 18); "
           f"grid within 3 MC s.e.: {', '.join(cells)}")


def test_c07_validation_identities(acceptance_log):
    rng = np.random.default_rng(7)
    ordered = all(
        diagnostics.rmse(p, a) >= diagnostics.mae(p, a)
        for p, a in (rng.standard_cauchy((2, int(rng.integers(1, 50)))) for _ in range(1000))
    )
    spots = [((-3000.0, 4), 6008.0), ((-3120.5, 5), 6251.0), ((10.0, 1), -18.0)]
    aic_ok = all(diagnostics.aic(ll, k) == want for (ll, k), want in spots)
    reports = [
        EvalReport("b", 1.0, 2.0, 10.0),
        EvalReport("a", 1.0, 2.0, 10.0),
        EvalReport("c", 0.5, 2.0, 10.0),
        EvalReport("d", 9.0, 9.0, 5.0),
        EvalReport("e", 1.0, 1.5, 10.0),
    ]
    rank_ok = [r.model_label for r in diagnostics.rank_models(reports)] == ["d", "e", "c", "a", "b"]
    record(acceptance_log, 7, "rmse >= mae, AIC arithmetic, ranking law", ordered and aic_ok and rank_ok,
           f"rmse>=mae on 1000 vectors: {ordered}; AIC spot checks: {aic_ok}; rank order: {rank_ok}")


# -- published-number reproduction --------------------------------------------------------

SUMMARY_REF = {"min": 0, "q1": 1041, "median": 3622, "mean": 3926, "q3": 5803, "max": 14518}
GARMA_REF = {"intercept": (-4.64217, 0.031575), "ar1": (1.719924, 0.001682)}
PUBLISHED_AIC = {"ARMA(1,1)": 6249.0, "MA(5)": 6512.66}
PUBLISHED_ERR = {"ARMA(1,1)": (850.654, 497.2133), "MA(5)": (1193.662, 820.0247)}
PUBLISHED_LB_P = 0.04591


@pytest.fixture(scope="module")
def cases_run(tmp_path_factory):
    path = cases_csv_path()
    if path is None:
        return None
    config = PipelineConfig(input_path=str(path), output_dir=str(tmp_path_factory.mktemp("cases")))
    return run_pipeline(config)


def _need(run, log, number, title):
    if run is None:
        skip(log, number, title, "dataset not supplied (set GARMATS_CASES_CSV)")


def test_c08_descriptive_stats(cases_run, acceptance_log):
    title = "descriptive statistics"
    _need(cases_run, acceptance_log, 8, title)
    s = cases_run.summary.as_dict()
    bad = [k for k, v in SUMMARY_REF.items() if abs(s[k] - v) > 0.5]
    sd_ok = abs(s["sd"] - 3344.91) <= 0.01
    record(acceptance_log, 8, title, not bad and sd_ok,
           ", ".join(f"{k}={s[k]:.2f}" for k in (*SUMMARY_REF, "sd")) + f"; off: {bad or 'none'}; sd ok: {sd_ok}")


def test_c09_adf(cases_run, acceptance_log):
    title = "ADF before/after differencing"
    _need(cases_run, acceptance_log, 9, title)
    before, after = cases_run.adf_before, cases_run.adf_after
    ok = abs(before.p_value - 0.829) <= 0.05 and after.p_value == 0.01 and after.clamped == "low"
    record(acceptance_log, 9, title, ok,
           f"before p={before.p_value:.4f} (0.829 +- 0.05), after p={after.p_value:.4f} "
           f"clamped={after.clamped}, d={cases_run.d_used}")


def test_c10_aic_and_errors(cases_run, acceptance_log):
    title = "AIC, selection and prediction errors"
    _need(cases_run, acceptance_log, 10, title)
    models = {m["label"]: m for m in cases_run.model_reports}
    parts, ok = [], cases_run.selected == "ARMA(1,1)"
    for label, target in PUBLISHED_AIC.items():
        m = models[label]
        # With and without sigma2 in the parameter count.
        conventions = {"k incl. sigma2": m["aic"], "k excl. sigma2": m["aic"] - 2}
        hit = [name for name, v in conventions.items() if abs(v - target) <= 0.01 * target]
        ok &= bool(hit)
        parts.append(f"{label} AIC={m['aic']:.2f} vs {target} matches {hit or 'none'}")
        rmse_t, mae_t = PUBLISHED_ERR[label]
        modes = [
            mode for mode, ev in m["evaluation"].items()
            if abs(ev["rmse"] - rmse_t) <= 0.05 * rmse_t and abs(ev["mae"] - mae_t) <= 0.05 * mae_t
        ]
        ok &= bool(modes)
        ev = m["evaluation"]
        parts.append(
            f"{label} rmse/mae one-step {ev['one_step']['rmse']:.1f}/{ev['one_step']['mae']:.1f}, "
            f"h-step {ev['h_step']['rmse']:.1f}/{ev['h_step']['mae']:.1f} vs {rmse_t}/{mae_t} matches {modes or 'none'}"
        )
    parts.append(f"selected {cases_run.selected}")
    record(acceptance_log, 10, title, ok, "; ".join(parts))


def test_c11_ljung_box(cases_run, acceptance_log):
    title = "Ljung-Box on selected residuals"
    _need(cases_run, acceptance_log, 11, title)
    lb = cases_run.ljung_box
    record(acceptance_log, 11, title, abs(lb.p_value - PUBLISHED_LB_P) <= 0.01,
           f"Q={lb.q_stat:.3f} df={lb.df} p={lb.p_value:.5f} (target {PUBLISHED_LB_P} +- 0.01)")


def test_c12_garma_best_effort(cases_run, acceptance_log):
    title = "GARMA calibration (best effort)"
    _need(cases_run, acceptance_log, 12, title)
    tables = {g["label"]: g for g in cases_run.garma}
    ok = {"GARMA(1,1)", "GARMA(1,0)"} <= tables.keys() and all(g.get("converged") for g in tables.values())
    shown = []
    for label, g in tables.items():
        coefs = ", ".join(f"{r['term']}={r['estimate']:.5g}" for r in g.get("coefficients", []))
        shown.append(f"{label}: {coefs}")
    reference = ", ".join(f"{k}={v[0]} (se {v[1]})" for k, v in GARMA_REF.items())
    record(acceptance_log, 12, title, ok, "; ".join(shown) + f"; reference table: {reference}")
