"""Command-line front end: flat key=value configs, one experiment per run.

Every run needs an explicit seed (reproducibility is a contract, not a
default) and an output directory; it writes manifest.json with the
fully resolved configuration, table.csv with the measured rows, and
verdict.txt with one line per check.  Exit codes: 0 for PASS or
REPORT, 1 for FAIL, 2 for a configuration error, 3 for an I/O error.
"""

from __future__ import annotations

import argparse
import json
import subprocess
import sys
from dataclasses import dataclass
from importlib import metadata
from pathlib import Path

from .experiments import EXPERIMENTS, ExperimentResult, run_experiment

# keys claimed by the runner itself; everything else is an experiment knob
RESERVED = ("exp", "seed", "out", "replicas", "threads")


@dataclass(frozen=True)
class RunConfig:
    experiment: str
    overrides: dict[str, str]
    out_dir: str
    seed: int
    replicas: int | None
    threads: int


class ConfigError(ValueError):
    pass


def _split_pair(text: str, origin: str) -> tuple[str, str]:
    key, sep, value = text.partition("=")
    if not sep or not key.strip():
        raise ConfigError(f"{origin}: expected key=value, got {text!r}")
    return key.strip(), value.strip()


def _read_config_file(path: str) -> dict[str, str]:
    pairs: dict[str, str] = {}
    text = Path(path).read_text(encoding="utf-8")
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, value = _split_pair(line, f"{path}:{lineno}")
        pairs[key] = value
    return pairs


def _parse_int(value: str, name: str) -> int:
    try:
        return int(value)
    except ValueError:
        raise ConfigError(f"{name} must be an integer, got {value!r}") from None


def parse_config(args: argparse.Namespace) -> RunConfig:
    """Merge config file and flags into a validated RunConfig.

    Flags override file entries.  Unknown experiment knobs are rejected
    here with the known keys listed; the reservoir-density constraint is
    enforced before any simulation starts.
    """
    pairs = _read_config_file(args.config) if args.config else {}
    for item in args.set or []:
        key, value = _split_pair(item, "--set")
        pairs[key] = value
    # reserved keys never reach the experiment, whatever flags are set
    reserved = {key: pairs.pop(key) for key in RESERVED if key in pairs}

    experiment = args.exp or reserved.get("exp")
    if experiment is None:
        raise ConfigError("no experiment selected; pass --exp or exp= "
                          f"(known: {', '.join(sorted(EXPERIMENTS))})")
    if experiment not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {experiment!r} "
                          f"(known: {', '.join(sorted(EXPERIMENTS))})")

    seed_text = reserved.get("seed")
    seed = args.seed if args.seed is not None else (
        _parse_int(seed_text, "seed") if seed_text is not None else None)
    if seed is None:
        raise ConfigError("no seed given; refusing implicit entropy "
                          "(pass --seed or seed=)")
    if not 0 <= seed < 2**64:
        raise ConfigError(f"seed must be a u64, got {seed}")

    out_dir = args.out or reserved.get("out")
    if out_dir is None:
        raise ConfigError("no output directory; pass --out or out=")

    replicas_text = reserved.get("replicas")
    replicas = args.replicas if args.replicas is not None else (
        _parse_int(replicas_text, "replicas") if replicas_text is not None else None)
    if replicas is not None and replicas < 1:
        raise ConfigError(f"replicas must be positive, got {replicas}")

    threads_text = reserved.get("threads")
    threads = args.threads if args.threads is not None else (
        _parse_int(threads_text, "threads") if threads_text is not None else 1)
    if threads < 1:
        raise ConfigError(f"threads must be positive, got {threads}")

    return RunConfig(experiment, pairs, out_dir, seed, replicas, threads)


def _version_string() -> str:
    # editable checkouts report the working tree, wheels the package version
    root = Path(__file__).resolve().parents[2]
    try:
        proc = subprocess.run(
            ["git", "describe", "--tags", "--always", "--dirty"],
            cwd=root, capture_output=True, text=True, timeout=10, check=False)
        if proc.returncode == 0 and proc.stdout.strip():
            return proc.stdout.strip()
    except OSError:
        pass
    try:
        return "v" + metadata.version("wasep")
    except metadata.PackageNotFoundError:
        return "unversioned"


def _emit(out_dir: str, result: ExperimentResult, manifest: dict) -> None:
    # byte-for-byte stable outputs: explicit utf-8, \n endings, sorted keys
    path = Path(out_dir)
    path.mkdir(parents=True, exist_ok=True)
    (path / "table.csv").write_bytes(result.table_csv().encode("utf-8"))
    verdict = "\n".join(result.verdict_lines()) + "\n"
    (path / "verdict.txt").write_bytes(verdict.encode("utf-8"))
    body = json.dumps(manifest, indent=2, sort_keys=True) + "\n"
    (path / "manifest.json").write_bytes(body.encode("utf-8"))


def _catalog() -> str:
    width = max(len(name) for name in EXPERIMENTS)
    lines = []
    for name, exp_def in sorted(EXPERIMENTS.items()):
        kind = "gate  " if exp_def.gating else "report"
        lines.append(f"{name:<{width}}  {kind}  {exp_def.doc}")
    return "\n".join(lines)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wasep",
        description="Run a named exclusion-process experiment and emit "
                    "manifest.json, table.csv, verdict.txt.",
    )
    parser.add_argument("--exp", help="experiment id (see --list)")
    parser.add_argument("--set", action="append", metavar="KEY=VALUE",
                        help="override one experiment knob (repeatable)")
    parser.add_argument("--config", metavar="PATH",
                        help="key=value file; flags override its entries")
    parser.add_argument("--out", metavar="DIR", help="output directory")
    parser.add_argument("--seed", type=int, help="u64 RNG seed (required)")
    parser.add_argument("--replicas", type=int, help="independent chains")
    parser.add_argument("--threads", type=int,
                        help="worker threads; verdicts do not depend on it")
    parser.add_argument("--list", action="store_true",
                        help="print the experiment catalog and exit")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.list:
        print(_catalog())
        return 0

    try:
        config = parse_config(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 3

    try:
        result = run_experiment(
            config.experiment,
            config.overrides,
            seed=config.seed,
            replicas=config.replicas,
            threads=config.threads,
        )
    except (KeyError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    manifest = {
        "experiment": config.experiment,
        "version": _version_string(),
        "seed": config.seed,
        "threads": config.threads,
        "out": config.out_dir,
        "config": result.extras["config"],
    }
    try:
        _emit(config.out_dir, result, manifest)
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 3

    for line in result.verdict_lines():
        print(line)
    return 0 if result.status in ("PASS", "REPORT") else 1


if __name__ == "__main__":
    raise SystemExit(main())
