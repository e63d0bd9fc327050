"""Catalog plumbing: config resolution, reproducibility, verdict rules."""

import math

import numpy as np
import pytest

from wasep.experiments import (
    EXPERIMENTS,
    Check,
    ExperimentResult,
    StatRow,
    run_experiment,
    transport_gate,
)

TINY_MART = {"n": 32, "times": "0.02", "replicas": 8, "mode2_replicas": 2}


def test_catalog_shape():
    want = {
        "invariance",
        "stationary_covariance",
        "martingale",
        "bg_principle",
        "height_boundary",
        "boundary_field",
        "cole_hopf",
        "ou_limit",
        "sbe_match",
        "kernels",
    }
    assert set(EXPERIMENTS) == want
    for name, exp in EXPERIMENTS.items():
        assert exp.name == name
        assert exp.doc
        assert isinstance(exp.defaults, dict) and exp.defaults
        assert callable(exp.fn)
    # exactly one catalog entry is a report rather than a gate
    assert [n for n, e in EXPERIMENTS.items() if not e.gating] == ["sbe_match"]


def test_unknown_names_rejected():
    with pytest.raises(KeyError, match="unknown experiment"):
        run_experiment("does_not_exist", seed=1)
    with pytest.raises(ValueError, match="unknown key 'bogus'"):
        run_experiment("invariance", {"bogus": 3}, seed=1)
    # the rejection happens before any simulation and names valid keys
    with pytest.raises(ValueError, match="known keys"):
        run_experiment("martingale", {"qvtol": "0.1"}, seed=1)


def test_replica_override_precedence():
    r = run_experiment("invariance", {"replicas": 999}, seed=3, replicas=7)
    assert r.extras["config"]["replicas"] == 7
    with pytest.raises(ValueError, match="no replica count"):
        run_experiment("kernels", seed=3, replicas=4)


def test_string_overrides_coerced():
    r = run_experiment("invariance", {"n": "6", "t": "0.02", "E": "0.5"}, seed=5)
    cfg = r.extras["config"]
    assert cfg["n"] == 6 and isinstance(cfg["n"], int)
    assert cfg["t"] == 0.02 and isinstance(cfg["t"], float)
    assert cfg["E"] == 0.5
    # catalog defaults must survive the run unchanged
    assert EXPERIMENTS["invariance"].defaults["n"] == 4


def test_transport_rule():
    transport_gate(0.5, 0.5, 1.0)
    transport_gate(0.3, 1.5, 1.0)
    transport_gate(0.3, 0.5, 0.0)
    with pytest.raises(ValueError, match="transport rule"):
        transport_gate(0.3, 0.5, 1.0)
    with pytest.raises(ValueError, match="transport rule"):
        run_experiment("martingale", {"rho": 0.3}, seed=1)


def _result(gating, oks):
    checks = [Check(f"c{i}", ok, "d") for i, ok in enumerate(oks)]
    return ExperimentResult("demo", gating, [], checks)


def test_status_and_verdict_lines():
    assert _result(True, [True, True]).status == "PASS"
    assert _result(True, [True, False]).status == "FAIL"
    # informational lines never gate
    assert _result(True, [True, None]).status == "PASS"
    assert _result(False, [False]).status == "REPORT"
    lines = _result(True, [True, None, False]).verdict_lines()
    assert lines[0] == "FAIL demo"
    assert lines[1].startswith("[pass] c0:")
    assert lines[2].startswith("[info] c1:")
    assert lines[3].startswith("[FAIL] c2:")


def test_table_csv_format():
    rows = [
        StatRow("plain", 1.0, 0.25, 8),
        StatRow('with,comma "q"', 1.0 / 3.0, float("nan"), 1),
    ]
    csv = ExperimentResult("demo", True, rows, []).table_csv()
    lines = csv.split("\n")
    assert lines[0] == "sweep,estimate,stderr,replicas"
    assert lines[1] == "plain,1,0.25,8"
    assert lines[2] == '"with,comma ""q""",0.3333333333,nan,1'
    assert csv.endswith("\n") and "\r" not in csv


def test_bit_reproducible_and_thread_invariant():
    a = run_experiment("martingale", TINY_MART, seed=2026)
    b = run_experiment("martingale", TINY_MART, seed=2026, threads=3)
    assert a.table_csv() == b.table_csv()
    assert a.verdict_lines() == b.verdict_lines()
    c = run_experiment("martingale", TINY_MART, seed=2027)
    ests_a = [r.estimate for r in a.rows]
    ests_c = [r.estimate for r in c.rows]
    assert ests_a != ests_c


def test_rows_carry_replica_level_errors():
    r = run_experiment("martingale", TINY_MART, seed=11)
    assert r.rows
    for row in r.rows:
        assert row.replicas >= 1
        assert math.isfinite(row.estimate)
        assert row.stderr >= 0.0 and math.isfinite(row.stderr)
    assert any(row.stderr > 0.0 for row in r.rows)


def test_exact_invariance_run_passes():
    r = run_experiment("invariance", seed=1)
    assert r.status == "PASS"
    assert r.verdict_lines()[0] == "PASS invariance"
    names = [c.name for c in r.checks]
    assert "stationary_product_measure" in names


def test_config_echo_includes_defaults():
    r = run_experiment("invariance", {"n": 5}, seed=2)
    cfg = r.extras["config"]
    assert cfg["n"] == 5
    for key, val in EXPERIMENTS["invariance"].defaults.items():
        if key != "n":
            assert cfg[key] == val
