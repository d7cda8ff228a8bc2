"""The twelve acceptance criteria, each at its stated tolerance and runtime budget.

Run alone with ``pytest tests/test_acceptance.py -v -s``; one PASS/FAIL line per
criterion is printed as it finishes and again in the terminal summary.
"""
import time

import numpy as np
import pytest
from scipy.optimize import minimize_scalar

import conftest
from constsgd import presets
from constsgd.bounds import alpha_root, contraction_rate, optimal_rate_step
from constsgd.config import parse_config
from constsgd.runner import run

pytestmark = pytest.mark.acceptance


def record(number, title, passed, detail, elapsed, budget):
    within = elapsed < budget
    ok = bool(passed and within)
    line = (f"criterion {number:2d} {'PASS' if ok else 'FAIL'}  {title}: {detail}; "
            f"{elapsed:.1f} s (budget {budget:g} s)")
    conftest.ACCEPTANCE_LINES[number] = line
    print("\n" + line)
    return ok, within


def run_preset(name, **overrides):
    cfg = parse_config(presets.ACCEPTANCE[name], overrides=[f"{k}={v}" for k, v in overrides.items()])
    start = time.perf_counter()
    report = run(cfg)
    return report, time.perf_counter() - start


def test_criterion_01_gmc_envelope():
    rep, t = run_preset("gmc")
    res = rep.payload["details"]
    ok, within = record(1, "GMC envelope", rep.passed,
                        f"max moment/envelope ratio {res['max_violation_ratio']:.3f}", t, 60)
    assert rep.criteria["envelope"], res["max_violation_ratio"]
    assert within


def test_criterion_02_stationarity_gap():
    rep, t = run_preset("asgd_gap")
    fit = rep.payload.get("fit") or {}
    slope = fit.get("fitted_slope", float("nan"))
    ok, within = record(2, "stationarity gap", rep.passed,
                        f"envelope {'ok' if rep.criteria['envelope'] else 'violated'}, "
                        f"k-slope {slope:.3f} (target -1 +/- 0.1)", t, 180)
    assert rep.criteria["envelope"]
    assert rep.criteria.get("slope", False), f"fitted slope {slope}"
    assert within


def test_criterion_03_sqrt_alpha_moment_rate():
    rep, t = run_preset("sgd_moment")
    slope = rep.payload["fit"]["fitted_slope"]
    ok, within = record(3, "sqrt(alpha) moment rate", rep.passed,
                        f"alpha-slope {slope:.3f} (target 0.5 +/- 0.1)", t, 180)
    assert rep.criteria["slope"], slope
    assert within


def test_criterion_04_stationary_variance_rate():
    rep, t = run_preset("asgd_variance")
    slope = rep.payload["fit"]["fitted_slope"]
    ok, within = record(4, "k^(-1/2) stationary variance", rep.passed,
                        f"k-slope {slope:.3f} (target -0.5 +/- 0.05)", t, 300)
    assert rep.criteria["slope"], slope
    assert within


def test_criterion_05_bias_scaling_and_control():
    rep, t1 = run_preset("bias")
    control, t2 = run_preset("bias_control")
    slope = rep.payload["fit"]["fitted_slope"]
    zmax = max(control.payload["details"]["max_abs_z"])
    ok, within = record(5, "O(alpha) bias", rep.passed and control.passed,
                        f"alpha-slope {slope:.3f} (target 1 +/- 0.15), control max |z| "
                        f"{zmax:.2f} (limit 4)", t1 + t2, 300)
    assert rep.criteria["slope"], slope
    assert control.criteria["zero_bias"], zmax
    assert within


def test_criterion_06_fuk_nagaev_tail():
    rep, t = run_preset("tail")
    res = rep.payload["details"]
    ok, within = record(6, "Fuk-Nagaev tail shape", rep.passed,
                        f"domination {'ok' if rep.criteria['domination'] else 'violated'}, "
                        f"log-tail slope {res['log_tail_slope']:.2f} (limit -2.25)", t, 600)
    assert rep.criteria["domination"]
    assert rep.criteria["tail_slope"], res["log_tail_slope"]
    assert within


def test_criterion_07_gaussian_approximation():
    rep, t = run_preset("ga")
    res = rep.payload["details"]
    ok, within = record(7, "Gaussian approximation", rep.passed,
                        f"Frobenius rel. error {res['frobenius_relative_error']:.3f} (limit 0.15), "
                        f"KS below {res['ks_critical_value']:.4f} in {res['ks_below']}/4", t, 600)
    assert rep.criteria["covariance"], res["frobenius_relative_error"]
    assert rep.criteria["ks"], res["ks_statistics"]
    assert within


def test_criterion_08_taylor_remainder():
    rep, t = run_preset("taylor")
    res = rep.payload["taylor"]
    ok, within = record(8, "second-order remainder", rep.passed,
                        f"{res['violations']} violations in {res['instances']} tuples", t, 10)
    assert res["instances"] == 100_000 and res["violations"] == 0
    assert within


def test_criterion_09_exact_oracles():
    rio, t1 = run_preset("rio")
    maximal, t2 = run_preset("maximal")
    r, m = rio.payload["rio"], maximal.payload["maximal"]
    ok, within = record(9, "Rio-type and maximal inequalities", rio.passed and maximal.passed,
                        f"{r['violations']}/{r['instances']} and {m['violations']}/{m['instances']} "
                        f"violations ({r['details']['conditional_instances']} mean-zero instances)",
                        t1 + t2, 60)
    assert r["instances"] == 1000 and r["violations"] == 0
    assert r["details"]["conditional_instances"] > 0
    assert m["instances"] == 200 and m["violations"] == 0
    assert within


def test_criterion_10_norm_equivalence():
    rep, t = run_preset("norm_equivalence")
    res = rep.payload["norm_equivalence"]
    dims = sorted(int(d) for d in res["details"])
    ok, within = record(10, "norm equivalence", rep.passed,
                        f"{res['violations']} violations over d in {dims}", t, 30)
    assert dims == [2, 10, 100, 10_000]
    assert res["instances"] == 400_000 and res["violations"] == 0
    assert within


def test_criterion_11_closed_forms():
    start = time.perf_counter()
    rng = np.random.default_rng(11)
    worst = 0.0
    for _ in range(100):
        mu, L = 10.0 ** rng.uniform(-2, 2, 2)
        s = int(rng.choice([2, 4, 6, 8, 10]))
        closed = 2 * mu / ((abs(2 - s) + s - 1) * L * L)
        worst = max(worst, abs(alpha_root(mu, L, s, 2.0) - closed) / closed)
    vertex_err = 0.0
    for mu, L, s, q in [(1, 2, 2, 4), (0.5, 1, 4, 2), (2, 3, 8, 6.5), (1, 1, 2, 2)]:
        a_star, r_star = optimal_rate_step(mu, L, s, q)
        limit = 2 * mu / (max(q, s) * L * L)
        res = minimize_scalar(lambda a: contraction_rate(mu, L, s, q, a),
                              bounds=(limit * 1e-9, limit * (1 - 1e-9)), method="bounded",
                              options={"xatol": limit * 1e-12})
        vertex_err = max(vertex_err, abs(res.fun - r_star) / r_star,
                         abs(contraction_rate(mu, L, s, q, a_star) - r_star))
    t = time.perf_counter() - start
    passed = worst <= 1e-10 and vertex_err <= 1e-10
    ok, within = record(11, "closed-form consistency", passed,
                        f"root rel. error {worst:.1e}, vertex error {vertex_err:.1e}", t, 1)
    assert worst <= 1e-10
    assert vertex_err <= 1e-10
    assert within


def test_criterion_12_complexity_pipeline():
    rep, t = run_preset("complexity")
    res = rep.payload["details"]
    ok, within = record(12, "complexity pipeline", rep.criteria["pass_fraction"],
                        f"pass fraction {res['pass_fraction']:.2f} (need 0.95), "
                        f"alpha_rec {res['alpha_rec']:.3g}, k_rec {res['k_rec']}", t, 300)
    assert rep.criteria["pass_fraction"], res["achieved"]
    assert within
