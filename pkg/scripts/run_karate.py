#!/usr/bin/env python3
"""Reproduce the Karate Club experiment: 10 active-learning runs per method
at the published sampling budget, then summary CSVs (and figures when the
netal-plots package is installed).

Takes on the order of 15 minutes; set NETAL_THREADS to use more cores.
"""

import argparse
import shutil
import subprocess
import sys
from pathlib import Path

from netal import cli

ROOT = Path(__file__).resolve().parent.parent
DATA = ROOT / "data"


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--out-dir", default=str(ROOT / "artifacts"))
    parser.add_argument("--methods", default="aa,mi,random")
    parser.add_argument("--runs", type=int, default=10)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    logs = []
    for method in args.methods.split(","):
        out = out_dir / f"karate_{method}_stage.csv"
        print(f"== {method}: {args.runs} runs -> {out}")
        code = cli.main([
            "run",
            "--graph", str(DATA / "karate_edges.txt"),
            "--labels", str(DATA / "karate_labels.tsv"),
            "--k", "2",
            "--method", method,
            "--chains", "100",
            "--steps", "20000",
            "--burnin", "0.5",
            "--runs", str(args.runs),
            "--seed", str(args.seed),
            "--out", str(out),
        ])
        if code:
            return code
        logs.append(out)

    code = cli.main(["analyze", *map(str, logs), "--out-dir", str(out_dir)])
    if code:
        return code

    if shutil.which("plot_curves"):
        for log in logs:
            subprocess.run(
                ["plot_curves", str(log), "--out", str(log.with_suffix(".svg"))],
                check=True,
            )
        orders = [out_dir / f"karate_{m}_stage_order.csv" for m in ("aa", "mi")]
        if all(o.exists() for o in orders):
            subprocess.run(
                ["plot_scatter", *map(str, orders), "--out", str(out_dir / "karate_order_scatter.svg")],
                check=True,
            )
    else:
        print("netal-plots not installed; skipping figures")
    return 0


if __name__ == "__main__":
    sys.exit(main())
