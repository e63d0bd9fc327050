"""Eleven release gates, one verdict line each.

Every gate runs the shipped experiment at its production budget with
the fixed seed 2026 and asserts the experiment's own tolerances; two
gates are statements about fitted rates that the measured chain does
not satisfy (see the corresponding test bodies), and they fail here
rather than being weakened.  Run with -s to see every verdict line.
"""

import itertools
import time

from wasep.core import SimParams, invariance_violation
from wasep.experiments import run_experiment

SEED = 2026

_cache: dict = {}


def _run(name: str, overrides: dict | None = None):
    key = (name, tuple(sorted((overrides or {}).items())))
    if key not in _cache:
        _cache[key] = run_experiment(name, overrides, seed=SEED)
    return _cache[key]


def _verdict(k: int, ok: bool, detail: str) -> str:
    line = f"[acceptance {k:2d}] {'PASS' if ok else 'FAIL'}: {detail}"
    print("\n" + line)
    return line


def _details(result, *names: str) -> str:
    picked = [c for c in result.checks if any(s in c.name for s in names)]
    return "; ".join(f"{c.name}: {c.detail}" for c in picked)


def _gate(result, *names: str) -> bool:
    picked = [c for c in result.checks if any(s in c.name for s in names)]
    assert picked
    return all(c.ok for c in picked if c.ok is not None)


def test_acceptance_01_exact_invariance():
    t0 = time.perf_counter()
    worst = 0.0
    for n, E, gamma, rho in itertools.product(
        range(3, 9), (0.0, 1.0, -0.5), (0.5, 1.0), (0.3, 0.5, 0.7)
    ):
        p = SimParams(n=n, E=E, gamma=gamma, rho=rho)
        worst = max(worst, invariance_violation(p))
    elapsed = time.perf_counter() - t0
    ok = worst < 1e-12 and elapsed < 1.0
    line = _verdict(1, ok, f"max |nu L|_inf = {worst:.3e} over n=3..8 grid "
                           f"(tol 1e-12), {elapsed:.2f} s (budget 1 s)")
    assert ok, line


def test_acceptance_02_stationary_field_variance():
    r = _run("stationary_covariance")
    ok = r.status == "PASS"
    line = _verdict(2, ok, _details(r, "vs exact", "limit"))
    assert ok, line


def test_acceptance_03_martingale_quadratic_variation():
    r = _run("martingale", {"times": "0.1,0.5"})
    ok = r.status == "PASS"
    line = _verdict(3, ok, _details(r, "qv_tracks_pathwise", "qv_continuum_limit"))
    assert ok, line


def test_acceptance_04_ou_autocovariance():
    r = _run("ou_limit")
    ok = r.status == "PASS"
    line = _verdict(4, ok, _details(r, "stationary_variance", "autocov"))
    assert ok, line


def test_acceptance_05_variance_kernel_constant():
    # the L2 distance to the flat constant falls with eps but endpoint
    # boundary layers keep the eps=1e-3 value at 2.3e-3, above the 1e-3
    # gate; the interior distance meets it, the full-interval one fails
    r = _run("kernels")
    ok = _gate(r, "variance_constant")
    line = _verdict(5, ok, _details(r, "variance_constant_decreasing",
                                    "variance_constant_small"))
    assert ok, line


def test_acceptance_06_antiderivative_closed_forms():
    r = _run("kernels")
    ok = _gate(r, "antiderivative_norm_identity", "midpoint_value_converges")
    line = _verdict(6, ok, _details(r, "antiderivative_norm_identity",
                                    "midpoint_value_converges"))
    assert ok, line


def test_acceptance_07_heat_kernel_decay_rates():
    r = _run("kernels")
    ok = _gate(r, "sup_slope", "mass_defect_slope", "neu_dir_uavg_slope")
    line = _verdict(7, ok, _details(r, "sup_slope", "mass_defect_slope",
                                    "neu_dir_uavg_slope"))
    assert ok, line


def test_acceptance_08_tilt_constants():
    r = _run("cole_hopf")
    ok = r.status == "PASS"
    line = _verdict(8, ok, _details(r, "alpha_monotone_to_limit",
                                    "diffusivity_monotone_to_one",
                                    "alpha_final_value"))
    assert ok, line


def test_acceptance_09_boundary_height_decay_rate():
    # the scaled boundary sup decays near n^-2, not within the gated
    # band [-1.3, -0.7]; the band is asserted as stated and fails
    r = _run("height_boundary")
    ok = _gate(r, "end_decay_rate")
    line = _verdict(9, ok, _details(r, "end_decay_rate"))
    assert ok, line


def test_acceptance_10_window_replacement_bound():
    r = _run("bg_principle")
    ok = r.status == "PASS"
    line = _verdict(10, ok, _details(r, "ratio_bounded", "interior_minimum"))
    assert ok, line


def test_acceptance_11_sbe_report_runs():
    r = _run("sbe_match")
    names = [c.name for c in r.checks]
    ok = (
        r.status == "REPORT"
        and any("particle_skew_flip" in s for s in names)
        and any("galerkin_skew_flip" in s for s in names)
        and sum("gaussian_marginal" in s for s in names) >= 2
    )
    line = _verdict(11, ok, _details(r, "skew_flip", "gaussian_marginal"))
    assert ok, line
