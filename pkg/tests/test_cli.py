"""Command-line surface: exit codes, precedence, emitted files."""

import json

import pytest

from wasep.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_list_catalog(capsys):
    code, out, err = run(capsys, "--list")
    assert code == 0 and err == ""
    for name in ("invariance", "martingale", "kernels", "sbe_match"):
        assert name in out
    assert "report" in out and "gate" in out


def test_missing_seed_refused(capsys, tmp_path):
    code, _, err = run(capsys, "--exp", "invariance", "--out", str(tmp_path / "o"))
    assert code == 2
    assert "refusing implicit entropy" in err


def test_missing_out_refused(capsys):
    code, _, err = run(capsys, "--exp", "invariance", "--seed", "1")
    assert code == 2
    assert "config error" in err


def test_unknown_experiment(capsys, tmp_path):
    code, _, err = run(capsys, "--exp", "nope", "--seed", "1",
                       "--out", str(tmp_path / "o"))
    assert code == 2
    assert "unknown experiment" in err


def test_unknown_override_key(capsys, tmp_path):
    code, _, err = run(capsys, "--exp", "invariance", "--set", "bogus=1",
                       "--seed", "1", "--out", str(tmp_path / "o"))
    assert code == 2
    assert "unknown key" in err


def test_bad_set_syntax(capsys, tmp_path):
    code, _, err = run(capsys, "--exp", "invariance", "--set", "nvalue",
                       "--seed", "1", "--out", str(tmp_path / "o"))
    assert code == 2
    assert "expected key=value" in err


def test_transport_rule_exit(capsys, tmp_path):
    code, _, err = run(capsys, "--exp", "martingale", "--set", "rho=0.3",
                       "--seed", "1", "--out", str(tmp_path / "o"))
    assert code == 2
    assert "transport rule" in err


def test_reserved_keys_never_reach_experiment(capsys, tmp_path):
    # runner keys are valid through --set but dedicated flags win
    code, _, _ = run(capsys, "--exp", "invariance", "--set", "seed=4",
                     "--out", str(tmp_path / "a"))
    assert code == 0
    manifest = json.loads((tmp_path / "a" / "manifest.json").read_text())
    assert manifest["seed"] == 4
    code, _, _ = run(capsys, "--exp", "invariance", "--set", "seed=4",
                     "--seed", "1", "--out", str(tmp_path / "b"))
    assert code == 0
    manifest = json.loads((tmp_path / "b" / "manifest.json").read_text())
    assert manifest["seed"] == 1


def test_pass_run_emits_files(capsys, tmp_path):
    out_dir = tmp_path / "run"
    code, out, err = run(capsys, "--exp", "invariance", "--seed", "2026",
                         "--out", str(out_dir))
    assert code == 0, err
    assert out.splitlines()[0] == "PASS invariance"

    table = (out_dir / "table.csv").read_text()
    lines = table.splitlines()
    assert lines[0] == "sweep,estimate,stderr,replicas"
    assert len(lines) >= 2

    verdict = (out_dir / "verdict.txt").read_text()
    assert verdict.splitlines()[0] == "PASS invariance"
    assert verdict == out

    manifest = json.loads((out_dir / "manifest.json").read_text())
    assert manifest["experiment"] == "invariance"
    assert manifest["seed"] == 2026
    assert manifest["config"]["n"] == 4
    assert manifest["version"]


def test_config_file_and_flag_precedence(capsys, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(
        "# comment line\n"
        "exp = invariance\n"
        "n = 5\n"
        "t = 0.02\n"
        "seed = 7\n"
        f"out = {tmp_path / 'from_file'}\n"
    )
    out_dir = tmp_path / "from_flag"
    code, out, _ = run(capsys, "--config", str(cfg), "--set", "n=6",
                       "--out", str(out_dir), "--seed", "9")
    assert code == 0
    manifest = json.loads((out_dir / "manifest.json").read_text())
    # --set beats the file; dedicated flags beat both
    assert manifest["config"]["n"] == 6
    assert manifest["config"]["t"] == 0.02
    assert manifest["seed"] == 9
    assert not (tmp_path / "from_file").exists()


def test_missing_config_file_is_io_error(capsys, tmp_path):
    code, _, err = run(capsys, "--config", str(tmp_path / "absent.cfg"),
                       "--seed", "1", "--out", str(tmp_path / "o"))
    assert code == 3
    assert "i/o error" in err


def test_fail_run_exit_code(capsys, tmp_path):
    code, out, _ = run(capsys, "--exp", "martingale", "--set", "n=32",
                       "--set", "times=0.02", "--set", "replicas=8",
                       "--set", "mode2_replicas=2", "--set", "qv_tol=0.0",
                       "--seed", "2026", "--out", str(tmp_path / "o"))
    assert code == 1
    assert out.splitlines()[0] == "FAIL martingale"


def test_report_run_exit_zero(capsys, tmp_path):
    code, out, _ = run(capsys, "--exp", "sbe_match", "--seed", "3",
                       "--set", "n=32", "--set", "t_end=0.2",
                       "--set", "increment=0.1", "--set", "replicas=8",
                       "--set", "M=4", "--set", "dt=1e-3",
                       "--set", "gal_replicas=16", "--set", "gal_t=0.1",
                       "--set", "gal_burn=0.05", "--set", "cells=64",
                       "--out", str(tmp_path / "o"))
    assert code == 0
    assert out.splitlines()[0] == "REPORT sbe_match"


def test_out_path_collision_is_io_error(capsys, tmp_path):
    blocker = tmp_path / "occupied"
    blocker.write_text("not a directory")
    code, _, err = run(capsys, "--exp", "invariance", "--seed", "1",
                       "--out", str(blocker))
    assert code == 3
    assert "i/o error" in err


def test_reruns_byte_identical(capsys, tmp_path):
    args = ("--exp", "martingale", "--set", "n=32", "--set", "times=0.02",
            "--set", "replicas=8", "--set", "mode2_replicas=2", "--seed", "5")
    run(capsys, *args, "--out", str(tmp_path / "a"))
    run(capsys, *args, "--out", str(tmp_path / "b"), "--threads", "3")
    for name in ("table.csv", "verdict.txt"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_argparse_rejects_unknown_flag(tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["--exp", "invariance", "--frobnicate"])
    assert exc.value.code == 2
