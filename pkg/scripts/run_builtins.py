"""Run every built-in scenario and print its headline numbers.

    python scripts/run_builtins.py [--quick] [--skip jet_2d] [--out runs]
"""

import argparse
import json
from pathlib import Path

from wavecurrent.runner import run_scenario
from wavecurrent.scenarios import BUILTIN_NAMES, builtin


def main():
    p = argparse.ArgumentParser()
    p.add_argument("--out", default="runs")
    p.add_argument("--quick", action="store_true")
    p.add_argument("--skip", action="append", default=[])
    args = p.parse_args()
    for name in BUILTIN_NAMES:
        if name in args.skip:
            continue
        res = run_scenario(builtin(name), Path(args.out) / name, quick=args.quick)
        print(json.dumps(res.summary, sort_keys=True))


if __name__ == "__main__":
    main()
