"""Command line entry point.

    wavecurrent run <config.json | builtin-name> [--out DIR] [--models exact,action,...] [--quick]
    wavecurrent validate [--quick] [--fault asymmetric] [--json FILE]
    wavecurrent compare <runA> <runB> --window a,b[,c,d] [--out FILE]

Exit codes: 0 ok, 1 validation failures, 2 configuration error, 3 numerical abort.
The output root for ``run`` defaults to $WAVECURRENT_OUT (else ./runs).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from .io import write_csv
from .runner import compare_runs, run_scenario
from .scenarios import BUILTIN_NAMES, MODELS, ConfigError, builtin, load_scenario
from .solver import NumericalAbort
from .validate import FAULTS, validate_suite

EXIT_OK, EXIT_FAILED, EXIT_CONFIG, EXIT_ABORT = 0, 1, 2, 3
OUT_ENV = "WAVECURRENT_OUT"

log = logging.getLogger("wavecurrent")


def _models(text: str | None):
    if text is None:
        return None
    names = [m.strip() for m in text.split(",") if m.strip()]
    bad = [m for m in names if m not in MODELS]
    if bad or not names:
        raise ConfigError(f"--models takes a comma list of {', '.join(MODELS)}; got {text!r}")
    return names


def _window(text: str):
    try:
        vals = [float(v) for v in text.split(",")]
    except ValueError:
        raise ConfigError(f"--window must be numbers a,b or a,b,c,d; got {text!r}") from None
    if len(vals) not in (2, 4):
        raise ConfigError(f"--window must have 2 or 4 numbers; got {len(vals)}")
    return [vals[i:i + 2] for i in range(0, len(vals), 2)]


def _load(ref: str):
    if not Path(ref).exists() and ref in BUILTIN_NAMES:
        return builtin(ref)
    return load_scenario(ref)


def cmd_run(args) -> int:
    sc = _load(args.config)
    models = _models(args.models)
    if args.out:
        out = Path(args.out)
    else:
        out = Path(os.environ.get(OUT_ENV, "runs")) / f"{sc.name}-{sc.hash[:12]}{'-quick' if args.quick else ''}"
    log.info("running %s into %s", sc.name, out)
    res = run_scenario(sc, out, models=models, quick=args.quick)
    print(json.dumps({"out": str(out), **res.summary}, indent=2, sort_keys=True))
    return EXIT_OK


def cmd_validate(args) -> int:
    report = validate_suite(quick=args.quick, fault=args.fault)
    text = json.dumps(report, indent=2)
    if args.json:
        Path(args.json).write_text(text)
    print(text)
    return EXIT_OK if report["passed"] else EXIT_FAILED


def cmd_compare(args) -> int:
    window = _window(args.window)
    try:
        rows = compare_runs(args.run_a, args.run_b, window)
    except ValueError as err:
        raise ConfigError(str(err)) from None
    out = Path(args.out) if args.out else Path(args.run_a) / f"compare_{Path(args.run_b).name}.csv"
    write_csv(out, rows, ["model", "t", "max_abs_diff", "total_a", "total_b"])
    worst = max(r["max_abs_diff"] for r in rows)
    print(json.dumps({"out": str(out), "samples": len(rows), "max_abs_diff": worst}, indent=2))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="wavecurrent", description="Linear waves over currents and bathymetry.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run a scenario config (or a built-in name)")
    r.add_argument("config")
    r.add_argument("--out", help=f"output directory (default ${OUT_ENV}/<name>-<hash>)")
    r.add_argument("--models", help=f"comma list from {','.join(MODELS)}")
    r.add_argument("--quick", action="store_true", help="four output intervals on a coarser grid")
    r.set_defaults(func=cmd_run)

    v = sub.add_parser("validate", help="run the invariant suite")
    v.add_argument("--quick", action="store_true", help="N = 64")
    v.add_argument("--fault", choices=FAULTS, help="inject a known defect (test hook)")
    v.add_argument("--json", help="also write the report here")
    v.set_defaults(func=cmd_validate)

    c = sub.add_parser("compare", help="compare the saved fields of two runs")
    c.add_argument("run_a")
    c.add_argument("run_b")
    c.add_argument("--window", required=True, help="a,b (x1 interval) or a,b,c,d (x1 and x2)")
    c.add_argument("--out", help="comparison CSV (default <runA>/compare_<runB>.csv)")
    c.set_defaults(func=cmd_compare)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalAbort as err:
        print(f"numerical abort: {err}", file=sys.stderr)
        return EXIT_ABORT


if __name__ == "__main__":
    sys.exit(main())
