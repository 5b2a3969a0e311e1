"""Command line entry point: ``revspec run|validate|list-experiments``."""
from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
import time
from pathlib import Path

from . import __version__
from .experiments import EXPERIMENTS, ConfigError, run_experiment, validate_config

OUTPUT_ROOT_ENV = "REVSPEC_OUTPUT_ROOT"
EXIT_OK, EXIT_FAILED, EXIT_CONFIG = 0, 1, 2

log = logging.getLogger("revspec")


def _load(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config: file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config: not valid JSON ({exc})")


def output_dir(norm: dict) -> Path:
    root = Path(os.environ.get(OUTPUT_ROOT_ENV, "runs"))
    return root / norm["output"]["directory"]


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False, default=str) + "\n"


def write_outputs(norm: dict, outcome, directory: Path) -> list:
    directory.mkdir(parents=True, exist_ok=True)
    fmts = norm["output"]["formats"]
    written = []
    if "json" in fmts:
        doc = {
            "experiment": norm["experiment"],
            "config": norm,
            "seed": norm["seed"],
            "version": __version__,
            "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
            "results": outcome.results,
            "assertions": outcome.assertions,
        }
        (directory / "results.json").write_text(_dump(_finite(doc)))
        written.append("results.json")
    if "csv" in fmts:
        for name, (header, rows) in outcome.tables.items():
            with open(directory / f"{name}.csv", "w", newline="") as fh:
                wr = csv.writer(fh)
                wr.writerow(header)
                for row in rows:
                    wr.writerow([repr(float(v)) if isinstance(v, float) else v for v in row])
            written.append(f"{name}.csv")
    if "plot" in fmts:
        for name, (xl, yl, xs, ys) in outcome.series.items():
            lines = [f"# x: {xl}", f"# y: {yl}"]
            lines += [f"{float(x)!r} {float(y)!r}" for x, y in zip(xs, ys)]
            (directory / f"{name}.dat").write_text("\n".join(lines) + "\n")
            written.append(f"{name}.dat")
    return written


def _finite(obj):
    """Replace non-finite floats by their repr so the JSON stays strict."""
    if isinstance(obj, float):
        return obj if obj == obj and abs(obj) != float("inf") else repr(obj)
    if isinstance(obj, dict):
        return {k: _finite(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_finite(v) for v in obj]
    return obj


def cmd_run(args) -> int:
    try:
        cfg = _load(args.config)
        norm = validate_config(cfg)
    except ConfigError as exc:
        print(f"invalid config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    directory = Path(args.output) if args.output else output_dir(norm)
    log.info("running %s -> %s", norm["experiment"], directory)
    outcome = run_experiment(cfg)
    written = write_outputs(norm, outcome, directory)
    failures = [a for a in outcome.assertions if not a["passed"]]
    for a in outcome.assertions:
        print(f"{'PASS' if a['passed'] else 'FAIL'}  {a['name']}  {a['detail']}")
    manifest = directory / "failures.json"
    if failures:
        manifest.write_text(_dump({"experiment": norm["experiment"], "failures": failures}))
        print(f"{len(failures)} assertion(s) failed; see {manifest}", file=sys.stderr)
        return EXIT_FAILED
    if manifest.exists():
        manifest.unlink()
    print(f"all {len(outcome.assertions)} assertions passed; wrote {', '.join(written)}")
    return EXIT_OK


def cmd_validate(args) -> int:
    try:
        norm = validate_config(_load(args.config))
    except ConfigError as exc:
        print(f"invalid config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(_dump(norm), end="")
    return EXIT_OK


def cmd_list(args) -> int:
    for name, (desc, schema, _) in EXPERIMENTS.items():
        print(f"{name:22s} {desc}")
        if args.verbose:
            for key, p in schema.items():
                print(f"    {key} = {p.default!r}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="revspec", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("run", help="run an experiment config")
    p.add_argument("config")
    p.add_argument("-o", "--output", help=f"output directory (default ${OUTPUT_ROOT_ENV}/<name>)")
    p.set_defaults(func=cmd_run)
    p = sub.add_parser("validate", help="check a config and print its normalized form")
    p.add_argument("config")
    p.set_defaults(func=cmd_validate)
    p = sub.add_parser("list-experiments", help="list available experiments")
    p.set_defaults(func=cmd_list)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
