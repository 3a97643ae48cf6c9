"""Command-line entry points: run, verify, sweep, inspect.

Exit codes: 0 success (and all checks passed), 1 at least one check
failed, 2 usage or configuration error, 3 runtime/solver error.
"""

from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, replace
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .config import parse_config
from .dynamics import run
from .errors import ConfigError, ThermoflowError
from .storage import (RunManifest, file_entry, read_snapshot, read_timeseries,
                      write_snapshot, write_timeseries)
from .verify import SUITE_NAMES, run_suite

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2
EXIT_RUNTIME = 3

_DEFAULT_SEED = 1234


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


def _load_config(path: str | None):
    if path is None:
        return parse_config("preset = reference1d")
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise ConfigError(f"cannot read config file {path}: {e}") from e
    return parse_config(text)


def _write_run_outputs(parsed, out_dir: Path, config_dict, checks=()) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    started = _now()
    records = []
    emitted = [0]

    def observer(state):
        k = emitted[0]
        emitted[0] += 1
        if parsed.snapshot_every and k % parsed.snapshot_every == 0:
            write_snapshot(state, out_dir / f"snapshot_{k:06d}.bin")

    final = run(parsed.initial, parsed.sim, sink=records.append, observer=observer)
    write_timeseries(records, out_dir / "timeseries.csv")
    write_snapshot(final, out_dir / "snapshot_final.bin")

    outputs = [file_entry(p, out_dir)
               for p in sorted(out_dir.iterdir())
               if p.is_file() and p.name != "manifest.json"]
    manifest = RunManifest(
        config=config_dict,
        code_version=__version__,
        started=started,
        finished=_now(),
        outputs=outputs,
        checks=list(checks),
    )
    manifest.write(out_dir / "manifest.json")


def _cmd_run(args) -> int:
    parsed = _load_config(args.config)
    config_dict = dict(parsed.raw)
    if args.seed is not None:
        config_dict["seed"] = str(args.seed)
    _write_run_outputs(parsed, Path(args.out), config_dict)
    return EXIT_OK


def _cmd_verify(args) -> int:
    parsed = _load_config(args.config)
    seed = args.seed if args.seed is not None else (parsed.seed or _DEFAULT_SEED)
    reports = run_suite(args.suite, parsed.initial, parsed.sim, seed=seed)
    width = max(len(r.name) for r in reports)
    for r in reports:
        verdict = "PASS" if r.passed else "FAIL"
        print(f"{verdict}  {r.name:<{width}}  measured {r.measured:.6g} "
              f"{r.direction} {r.threshold:.6g}")
        if r.details:
            print(f"      {r.details}")
    failed = [r for r in reports if not r.passed]
    print(f"{len(reports) - len(failed)}/{len(reports)} checks passed")
    return EXIT_OK if not failed else EXIT_CHECK_FAILED


_SWEEP_KEYS = ("mu", "dt", "t_end")


def _parse_vary(spec: str):
    try:
        key, rest = spec.split("=", 1)
        a, b, n = rest.split(":")
        key = key.strip()
        values = np.linspace(float(a), float(b), int(n))
    except ValueError:
        raise ConfigError(f"--vary expects key=a:b:n, got {spec!r}") from None
    if key not in _SWEEP_KEYS:
        raise ConfigError(f"--vary supports {_SWEEP_KEYS}, got {key!r}")
    if len(values) < 1:
        raise ConfigError("--vary needs at least one value")
    return key, [float(v) for v in values]


def _sweep_worker(payload) -> str:
    config_text, key, value, out_dir = payload
    parsed = parse_config(config_text)
    parsed.sim = replace(parsed.sim, **{key: value})
    config_dict = dict(parsed.raw)
    config_dict[key] = repr(value)
    _write_run_outputs(parsed, Path(out_dir), config_dict)
    return out_dir


def _cmd_sweep(args) -> int:
    if args.config is None:
        config_text = "preset = reference1d"
    else:
        try:
            config_text = Path(args.config).read_text()
        except OSError as e:
            raise ConfigError(f"cannot read config file {args.config}: {e}") from e
    parse_config(config_text)  # fail fast on bad config before forking
    key, values = _parse_vary(args.vary)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    jobs = [(config_text, key, v, str(out / f"{key}={v:g}")) for v in values]
    workers = min(len(jobs), int(os.environ.get("THERMOFLOW_THREADS", os.cpu_count() or 1)))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for done in pool.map(_sweep_worker, jobs):
                print(f"finished {done}")
    else:
        for job in jobs:
            print(f"finished {_sweep_worker(job)}")
    return EXIT_OK


def _print_field_stats(name: str, values: np.ndarray) -> None:
    l2 = float(np.sqrt(np.mean(values**2)))
    print(f"  {name:>6}: min {np.min(values):.6g}  max {np.max(values):.6g}  "
          f"mean {np.mean(values):.6g}  rms {l2:.6g}")


def _cmd_inspect(args) -> int:
    if args.snapshot:
        state = read_snapshot(args.snapshot)
        grid = state.grid
        print(f"snapshot {args.snapshot}")
        print(f"  grid {grid.n_points} on box {grid.lengths}, t = {state.t:g}")
        _print_field_stats("theta", state.theta.values)
        for i, c in enumerate(state.u.components):
            _print_field_stats(f"u{i}", c.values)
        for i, c in enumerate(state.v.components):
            _print_field_stats(f"v{i}", c.values)
    else:
        records = read_timeseries(args.timeseries)
        first, last = records[0], records[-1]
        print(f"timeseries {args.timeseries}")
        print(f"  {len(records)} records, t in [{first.t:g}, {last.t:g}]")
        print(f"  energy {first.energy:.8g} -> {last.energy:.8g}")
        print(f"  entropy {first.entropy:.8g} -> {last.entropy:.8g}")
        print(f"  theta range [{last.theta_min:.6g}, {last.theta_max:.6g}] at t = {last.t:g}")
        print(f"  u_h1 {last.u_h1:.6g}, v_h1 {last.v_h1:.6g}")
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="thermoflow",
        description="Coupled wave/heat simulator and verification lab.",
    )
    parser.add_argument("--version", action="version", version=f"thermoflow {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="integrate a trajectory and write outputs")
    p_run.add_argument("--config", help="config file (default: reference1d preset)")
    p_run.add_argument("--out", required=True, help="output directory")
    p_run.add_argument("--seed", type=int, help="recorded in the manifest")
    p_run.set_defaults(func=_cmd_run)

    p_verify = sub.add_parser("verify", help="run a verification suite")
    p_verify.add_argument("--suite", choices=SUITE_NAMES, default="all")
    p_verify.add_argument("--config", help="config file (default: reference1d preset)")
    p_verify.add_argument("--seed", type=int, help="seed for ensemble checks")
    p_verify.set_defaults(func=_cmd_verify)

    p_sweep = sub.add_parser("sweep", help="run one trajectory per parameter value")
    p_sweep.add_argument("--config", help="config file (default: reference1d preset)")
    p_sweep.add_argument("--vary", required=True, help="key=a:b:n, e.g. mu=0:2:5")
    p_sweep.add_argument("--out", required=True, help="parent output directory")
    p_sweep.set_defaults(func=_cmd_sweep)

    p_inspect = sub.add_parser("inspect", help="print statistics of stored outputs")
    group = p_inspect.add_mutually_exclusive_group(required=True)
    group.add_argument("--snapshot", help="snapshot file to describe")
    group.add_argument("--timeseries", help="timeseries CSV to describe")
    p_inspect.set_defaults(func=_cmd_inspect)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except ThermoflowError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
