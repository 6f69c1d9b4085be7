#!/usr/bin/env python3
"""Threshold calibration sweep.

Replays a recorded dataset once per candidate threshold value through the
fluentnet CLI and tabulates the per-activity recognition rates, so a new
deployment's durations can be tuned against labeled data. Example:

    scripts/calibrate.py --dataset /data/casas --sweep 'A1:δ1=30s,60s,90s' \
        --sweep 'A4:δ4=20s,30s,45s' --csv sweep.csv
"""

import argparse
import csv
import subprocess
import sys
import tempfile
from pathlib import Path


def parse_sweep(arg):
    """'A1:δ1=30s,60s,90s' -> (model, threshold, [values])."""
    head, _, values = arg.partition("=")
    model, _, name = head.partition(":")
    if not model or not name or not values:
        raise argparse.ArgumentTypeError(
            f"expected <model>:<threshold>=<v1>,<v2>,..., got {arg!r}")
    return model, name, values.split(",")


def replay_rates(args, override):
    with tempfile.TemporaryDirectory(prefix="calibrate_") as out_dir:
        cmd = [
            args.binary, "replay",
            "--dataset", args.dataset,
            "--seed", str(args.seed),
            "--gap", args.gap,
            "--out", out_dir,
        ]
        if args.variant:
            cmd += ["--variant", args.variant]
        if override:
            cmd += ["--threshold", override]
        result = subprocess.run(cmd, capture_output=True, text=True)
        if result.returncode != 0:
            sys.stderr.write(result.stderr)
            raise SystemExit(f"replay failed for {override or 'defaults'}")
        with open(Path(out_dir) / "rates.csv", newline="") as f:
            return [row for row in csv.DictReader(f) if int(row["instances"]) > 0]


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--dataset", required=True,
                        help="dataset file or directory of run files")
    parser.add_argument("--variant", default="",
                        help="dataset subdirectory (sequential, interwoven)")
    parser.add_argument("--binary", default="build/fluentnet",
                        help="path to the fluentnet executable")
    parser.add_argument("--sweep", action="append", type=parse_sweep, required=True,
                        metavar="MODEL:NAME=V1,V2,...",
                        help="threshold values to try; repeatable, one axis per flag")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--gap", default="3min")
    parser.add_argument("--csv", help="also write every swept row to this file")
    args = parser.parse_args()

    rows = []
    print("value      activity  tp%     unknown%  miscls%  baseline%")
    for model, name, values in args.sweep:
        print(f"-- {model} {name}")
        for value in values:
            rates = replay_rates(args, f"{model}:{name}={value}")
            for rate in rates:
                rows.append({"model": model, "threshold": name, "value": value, **rate})
                print(f"{value:<10} A{rate['activity']:<7} "
                      f"{rate['true_positive_pct']:>6}  {rate['unknown_pct']:>7}  "
                      f"{rate['misclassified_pct']:>7}  {rate['baseline_pct']:>8}")

    if args.csv and rows:
        with open(args.csv, "w", newline="") as f:
            writer = csv.DictWriter(f, fieldnames=list(rows[0]))
            writer.writeheader()
            writer.writerows(rows)
        print(f"wrote {len(rows)} rows to {args.csv}")


if __name__ == "__main__":
    main()
