"""Render the experiment CSVs into figures.

Consumes only the documented CSV schemas:
  stage log:   run,stage,method,queried_vertex,frac_q_<q>...
  query order: vertex,mean_stage,std_stage,n_runs

Each plot function returns the plotted series alongside writing the image,
so callers (and tests) can check the numbers without parsing the figure.
SVG output carries no timestamp metadata, keeping regeneration idempotent.
"""

from __future__ import annotations

import argparse
import csv
import math
import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "netal-plots"  # reproducible element ids
import matplotlib.pyplot as plt
import numpy as np


class SchemaError(ValueError):
    """Input CSV does not match the documented schema."""


def _read_csv(path: str) -> tuple[list[str], list[dict]]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        rows = list(reader)
        header = reader.fieldnames or []
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    return header, rows


def read_stage_log(path: str) -> tuple[list[float], np.ndarray]:
    """Mean fraction across runs: returns (thresholds, curves[stage, iq])."""
    header, rows = _read_csv(path)
    frac_cols = [c for c in header if c.startswith("frac_q_")]
    if not frac_cols or "stage" not in header or "run" not in header:
        raise SchemaError(f"{path}: expected stage-log columns, got {header}")
    thresholds = [float(c[len("frac_q_"):]) for c in frac_cols]
    stages = sorted({int(r["stage"]) for r in rows})
    sums = np.zeros((len(stages), len(frac_cols)))
    counts = np.zeros(len(stages))
    index = {s: i for i, s in enumerate(stages)}
    for r in rows:
        i = index[int(r["stage"])]
        sums[i] += [float(r[c]) for c in frac_cols]
        counts[i] += 1
    return thresholds, sums / counts[:, None]


def read_order(path: str) -> dict[str, tuple[float, float]]:
    header, rows = _read_csv(path)
    needed = {"vertex", "mean_stage", "std_stage"}
    if not needed.issubset(header):
        raise SchemaError(f"{path}: expected query-order columns, got {header}")
    return {r["vertex"]: (float(r["mean_stage"]), float(r["std_stage"])) for r in rows}


def pearson_of(x, y) -> float:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    dx = x - x.mean()
    dy = y - y.mean()
    denom = math.sqrt(float(dx @ dx) * float(dy @ dy))
    if denom == 0.0:
        raise ValueError("pearson undefined for zero-variance input")
    return float(dx @ dy) / denom


def _save(fig, out: str) -> None:
    Path(out).parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out, metadata={"Date": None} if out.endswith(".svg") else None)
    plt.close(fig)


def plot_curves(stage_csv: str, out: str, thresholds=None):
    """One accuracy curve per threshold, stage on x, fraction on y."""
    all_q, curves = read_stage_log(stage_csv)
    if thresholds:
        keep = []
        for q in thresholds:
            if q not in all_q:
                raise SchemaError(f"threshold {q} not present in {stage_csv} (has {all_q})")
            keep.append(all_q.index(q))
    else:
        keep = list(range(len(all_q)))
    fig, ax = plt.subplots(figsize=(6, 4))
    stages = np.arange(curves.shape[0])
    series = {}
    for iq in keep:
        q = all_q[iq]
        ax.plot(stages, curves[:, iq], marker="o", markersize=2.5, label=f"q = {q:g}")
        series[q] = curves[:, iq]
    ax.set_xlabel("queries")
    ax.set_ylabel("fraction of unqueried vertices correct")
    ax.set_ylim(-0.02, 1.02)
    ax.legend(fontsize=8)
    _save(fig, out)
    return series


def plot_order(order_csv: str, out: str):
    """Bar chart of mean query stage, sorted ascending, std as error bars."""
    stats = read_order(order_csv)
    names = sorted(stats, key=lambda v: stats[v][0])
    means = [stats[v][0] for v in names]
    stds = [stats[v][1] for v in names]
    fig, ax = plt.subplots(figsize=(max(6, 0.22 * len(names)), 4))
    ax.bar(range(len(names)), means, yerr=stds, capsize=2, color="#6699cc")
    ax.set_xticks(range(len(names)))
    ax.set_xticklabels(names, rotation=90, fontsize=7)
    ax.set_ylabel("mean query stage")
    _save(fig, out)
    return dict(zip(names, means))


def plot_scatter(order_csv_a: str, order_csv_b: str, out: str):
    """Scatter of per-vertex mean query stages, annotated with the Pearson
    coefficient recomputed from the two CSVs."""
    a = read_order(order_csv_a)
    b = read_order(order_csv_b)
    if set(a) != set(b):
        raise SchemaError("order CSVs cover different vertex sets")
    names = sorted(a)
    xs = [a[v][0] for v in names]
    ys = [b[v][0] for v in names]
    r = pearson_of(xs, ys)
    fig, ax = plt.subplots(figsize=(4.5, 4.5))
    ax.scatter(xs, ys, s=12, alpha=0.7)
    ax.set_xlabel(f"mean query stage ({Path(order_csv_a).stem})")
    ax.set_ylabel(f"mean query stage ({Path(order_csv_b).stem})")
    ax.annotate(f"Pearson r = {r:.3f}", xy=(0.05, 0.93), xycoords="axes fraction")
    _save(fig, out)
    return r


def _run(parser_fn, argv):
    try:
        return parser_fn(argv)
    except (SchemaError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def curves_main(argv=None) -> int:
    def go(argv):
        p = argparse.ArgumentParser(prog="plot_curves")
        p.add_argument("stage_csv")
        p.add_argument("--out", required=True)
        p.add_argument("--thresholds", help="comma-separated subset, e.g. 0.5,0.9")
        args = p.parse_args(argv)
        qs = [float(q) for q in args.thresholds.split(",")] if args.thresholds else None
        plot_curves(args.stage_csv, args.out, qs)
        return 0

    return _run(go, argv)


def order_main(argv=None) -> int:
    def go(argv):
        p = argparse.ArgumentParser(prog="plot_order")
        p.add_argument("order_csv")
        p.add_argument("--out", required=True)
        args = p.parse_args(argv)
        plot_order(args.order_csv, args.out)
        return 0

    return _run(go, argv)


def scatter_main(argv=None) -> int:
    def go(argv):
        p = argparse.ArgumentParser(prog="plot_scatter")
        p.add_argument("order_csv_a")
        p.add_argument("order_csv_b")
        p.add_argument("--out", required=True)
        args = p.parse_args(argv)
        r = plot_scatter(args.order_csv_a, args.order_csv_b, args.out)
        print(f"pearson = {r:.6f}")
        return 0

    return _run(go, argv)
