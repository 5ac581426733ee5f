"""``hybridsim`` command line.

    hybridsim run <cfg> [--out DIR] [--override key=value ...]
    hybridsim sweep <cfg> --var KEY --grid SPEC [--out DIR] [--override ...]
    hybridsim validate [--filter ID[,ID...]] [--out DIR]

``<cfg>`` is a JSON file or the name of a shipped preset.  Exit codes: 0 all
declared targets met, 1 a target missed, 2 configuration error, 3 numerical
failure.  Artifacts are written only after a run completes.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys
import tempfile
import time
from pathlib import Path

import numpy as np

from ..cooling import CutoffError, UnstableCoolingError
from ..device import SeriesConvergenceError
from ..quantum import DegenerateSteadyState, IntegrationError, InvariantViolation
from . import config as cfgmod
from . import io as hio
from .scenarios import ScenarioOutput, run as run_scenario, run_sweep

EXIT_OK, EXIT_TARGET, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3
NUMERICAL_ERRORS = (IntegrationError, InvariantViolation, CutoffError, UnstableCoolingError,
                    SeriesConvergenceError, DegenerateSteadyState, np.linalg.LinAlgError,
                    FloatingPointError)

log = logging.getLogger("hybridsim")


def build_summary(cfg: cfgmod.ScenarioConfig, out: ScenarioOutput, wall: float) -> tuple[dict, bool]:
    columns = {}
    for table in out.tables.values():
        columns.update(table)
    targets = []
    for t in cfg.targets:
        ok, detail = t.check(out.scalars, columns)
        targets.append({"name": t.name, "kind": t.kind, "value": t.value, "passed": ok, "detail": detail})
    all_ok = all(t["passed"] for t in targets)
    summary = {
        "scenario": cfg.scenario,
        "config": cfg.echo(),
        "resolved": out.resolved,
        "overridden": sorted(out.overridden),
        "scalars": out.scalars,
        "targets": targets,
        "targets_passed": all_ok,
        "artifacts": sorted(f"{name}.csv" for name in out.tables) if "csv" in cfg.raw("output.formats") else [],
        "wall_clock_s": wall,
    }
    return summary, all_ok


def write_artifacts(out_dir: Path, cfg: cfgmod.ScenarioConfig, out: ScenarioOutput, summary: dict) -> list[Path]:
    """Write into a scratch directory first, then move into place."""
    formats = cfg.raw("output.formats")
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    with tempfile.TemporaryDirectory(dir=out_dir) as tmp:
        staged = []
        if "csv" in formats:
            for name, table in out.tables.items():
                p = Path(tmp) / f"{name}.csv"
                p.write_text(hio.csv_text(table), encoding="utf-8")
                staged.append(p)
        if "json" in formats:
            p = Path(tmp) / "summary.json"
            p.write_text(hio.json_text(summary), encoding="utf-8")
            staged.append(p)
        for p in staged:
            dest = out_dir / p.name
            os.replace(p, dest)
            written.append(dest)
    return written


def execute(cfg: cfgmod.ScenarioConfig, out_dir: str | None, sweep: tuple[str, list] | None = None,
            stream=None) -> int:
    stream = sys.stdout if stream is None else stream
    start = time.perf_counter()
    try:
        if sweep is not None:
            out = run_sweep(cfg, *sweep)
        else:
            out = run_scenario(cfg)
    except NUMERICAL_ERRORS as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    wall = time.perf_counter() - start
    summary, ok = build_summary(cfg, out, wall)
    target = Path(out_dir if out_dir is not None else cfg.raw("output.directory"))
    for p in write_artifacts(target, cfg, out, summary):
        print(f"wrote {p}", file=stream)
    for t in summary["targets"]:
        print(f"[{'PASS' if t['passed'] else 'FAIL'}] target {t['detail']}", file=stream)
    if cfg.scenario == "validate":
        for entry in out.resolved["report"]:
            print(f"[{'PASS' if entry['passed'] else 'FAIL'}] criterion {entry['id']} {entry['title']}",
                  file=stream)
        ok = ok and out.scalars["n_failed"] == 0
    return EXIT_OK if ok else EXIT_TARGET


def _config_from_args(args) -> cfgmod.ScenarioConfig:
    cfg = cfgmod.resolve(args.config)
    if args.override:
        cfg = cfgmod.apply_overrides(cfg, args.override)
    return cfg


def cmd_run(args) -> int:
    return execute(_config_from_args(args), args.out)


def cmd_sweep(args) -> int:
    cfg = _config_from_args(args)
    var = args.var or cfg.raw("sweep.var")
    spec = args.grid or cfg.raw("sweep.grid")
    if var is None or spec is None:
        raise cfgmod.ConfigError("sweep needs --var and --grid (or sweep.var / sweep.grid in the config)")
    if var not in cfgmod.SCHEMA:
        raise cfgmod.ConfigError(f"unknown sweep variable {var!r}")
    cfgmod.check_sweep_var(var)
    cfg = cfgmod.apply_overrides(cfg, [f'sweep.var="{var}"', f'sweep.grid="{spec}"'])
    return execute(cfg, args.out, (var, cfgmod.parse_grid(spec)))


def cmd_validate(args) -> int:
    data = {"scenario": "validate", "validate.filter": args.filter}
    if args.filter is not None:
        try:
            [int(x) for x in args.filter.split(",")]
        except ValueError:
            raise cfgmod.ConfigError(f"--filter expects criterion ids, got {args.filter!r}") from None
    cfg = cfgmod.from_mapping(data, "validate")
    return execute(cfg, args.out)


def make_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hybridsim", description=__doc__.split("\n\n")[0])
    ap.add_argument("-v", "--verbose", action="store_true", help="log overrides and solver details")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--out", default=None, help="output directory (default: output.directory)")

    p = sub.add_parser("run", help="run one scenario")
    p.add_argument("config", help="config JSON file or preset name")
    p.add_argument("--override", action="append", default=[], metavar="KEY=VALUE")
    common(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="run a scenario over a parameter grid")
    p.add_argument("config")
    p.add_argument("--var", default=None, help="config key to vary, e.g. beam.length_m")
    p.add_argument("--grid", default=None, help="start:stop:num, log:start:stop:num or v1,v2,...")
    p.add_argument("--override", action="append", default=[], metavar="KEY=VALUE")
    common(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("validate", help="run the acceptance suite")
    p.add_argument("--filter", default=None, help="comma-separated criterion ids")
    common(p)
    p.set_defaults(func=cmd_validate)
    return ap


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except cfgmod.ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
