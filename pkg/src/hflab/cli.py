"""Command-line runner: scenario execution, preset listing, full verification.

Verbs:
    run             one scenario (--scenario, optional --config/--seed/--out)
    list-scenarios  static preset table
    verify          every preset with derived seeds; exit 0 iff all audits pass

Exit codes: 0 pass, 1 audit failure, 2 usage or configuration error.  CSV
bodies are deterministic given (config, seed); timestamps appear only in the
manifest.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
import time
from pathlib import Path

import numpy as np
import scipy

import hflab
from hflab.scenarios import SCENARIOS, RunConfig, build_config, run_scenario


def _load_config(path: str, scenario: str | None, seed: int | None) -> RunConfig:
    text = Path(path).read_text()
    data = json.loads(text)
    if scenario is not None:
        data["scenario"] = scenario
    if seed is not None:
        data["seed"] = seed
    cfg = RunConfig.from_json(json.dumps(data))
    if cfg.scenario not in SCENARIOS:
        raise ValueError(f"unknown scenario '{cfg.scenario}'")
    return cfg


def _write_manifest(out: Path, entries: list) -> None:
    manifest = {
        "package": "hflab",
        "version": hflab.__version__,
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "created": time.strftime("%Y-%m-%dT%H:%M:%S"),
        "runs": entries,
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True))


def _result_entry(cfg: RunConfig, result) -> dict:
    return {
        "scenario": result.name,
        "config": dataclasses.asdict(cfg),
        "passed": result.passed,
        "details": _jsonable(result.details),
        "files": [
            {"name": f.name, "module": f.module, "operation": f.operation}
            for f in result.files
        ],
    }


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    return obj


def cmd_run(args) -> int:
    try:
        if args.config:
            cfg = _load_config(args.config, args.scenario, args.seed)
        else:
            if not args.scenario:
                print("error: provide --scenario or --config", file=sys.stderr)
                return 2
            cfg = build_config(args.scenario, seed=args.seed)
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    out = Path(args.out) / cfg.scenario
    out.mkdir(parents=True, exist_ok=True)
    try:
        result = run_scenario(cfg, out)
    except (ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    _write_manifest(out, [_result_entry(cfg, result)])
    status = "PASS" if result.passed else "FAIL"
    print(f"{result.name}: {status}")
    for key, val in result.details.items():
        print(f"  {key}: {val}")
    return 0 if result.passed else 1


def cmd_list(_args) -> int:
    rows = []
    for name, (fn, desc) in SCENARIOS.items():
        rows.append((name, fn.__module__ + "." + fn.__name__, desc))
    width = max(len(r[0]) for r in rows)
    for name, entry_point, desc in rows:
        print(f"{name:<{width}}  {desc}")
        print(f"{'':<{width}}  entry: {entry_point}")
    return 0


def cmd_verify(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    names = args.scenarios.split(",") if args.scenarios else list(SCENARIOS)
    entries = []
    all_pass = True
    for idx, name in enumerate(names):
        if name not in SCENARIOS:
            print(f"error: unknown scenario '{name}'", file=sys.stderr)
            return 2
        cfg = build_config(name, seed=args.seed + idx)
        sub = out / name
        sub.mkdir(parents=True, exist_ok=True)
        try:
            result = run_scenario(cfg, sub)
        except (ValueError, RuntimeError) as exc:
            print(f"{name}: ERROR ({exc})")
            all_pass = False
            continue
        entries.append(_result_entry(cfg, result))
        all_pass = all_pass and result.passed
        print(f"{name}: {'PASS' if result.passed else 'FAIL'}")
    _write_manifest(out, entries)
    return 0 if all_pass else 1


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="hflab", description="mean-field fermion laboratory"
    )
    sub = parser.add_subparsers(dest="verb")

    p_run = sub.add_parser("run", help="run one scenario")
    p_run.add_argument("--scenario", help="preset name (see list-scenarios)")
    p_run.add_argument("--config", help="path to a JSON config")
    p_run.add_argument("--seed", type=int, default=None)
    p_run.add_argument("--out", default="runs")

    sub.add_parser("list-scenarios", help="print the preset table")

    p_ver = sub.add_parser("verify", help="run the full audit suite")
    p_ver.add_argument("--seed", type=int, default=2024)
    p_ver.add_argument("--out", default="runs/verify")
    p_ver.add_argument("--scenarios", help="comma-separated subset", default=None)

    args = parser.parse_args(argv)
    if args.verb == "run":
        return cmd_run(args)
    if args.verb == "list-scenarios":
        return cmd_list(args)
    if args.verb == "verify":
        return cmd_verify(args)
    parser.print_help()
    return 2


if __name__ == "__main__":
    sys.exit(main())
