"""Command-line entry point: run active-learning experiments, summarize
stage logs, and compute block-model fixed points.

Seeding is hierarchical and documented here once: per-run seeds are
splitmix64 hashes of (--seed, run index), per-chain seeds hash the run
seed with the chain index, so every CSV is a pure function of the inputs
and flags.  NETAL_THREADS caps the sampling worker count.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .active import (
    GroundTruthOracle,
    InteractiveOracle,
    fixed_point_relabel,
    run_active_learning,
)
from .graphs import (
    Graph,
    GraphParseError,
    GraphValidationError,
    LabelMap,
    dump_labels,
    load_edge_list,
    load_labels,
)
from .metrics import (
    RunCollection,
    RunData,
    accuracy_curves,
    adjusted_mutual_information,
    pearson,
    query_order_stats,
)
from .rng import derive_seed
from .sampler import GibbsConfig
from .strategies import METHODS

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_RUNTIME = 3

DEFAULT_THRESHOLDS = (0.1, 0.3, 0.5, 0.7, 0.9)


class InputError(ValueError):
    """Bad files or flags; maps to exit status 2."""


@dataclass(frozen=True)
class RunSpec:
    graph_path: str
    labels_path: str | None
    k: int
    directed: bool
    self_loops: bool
    method: str
    chains: int
    steps: int | None
    burnin_fraction: float
    runs: int
    thresholds: tuple[float, ...]
    master_seed: int
    out_path: str
    oracle_mode: str
    max_stages: int | None

    def __post_init__(self):
        if self.k < 1 or self.chains < 1 or self.runs < 1:
            raise InputError("k, chains, and runs must be positive")
        if self.steps is not None and self.steps < 1:
            raise InputError("steps must be positive")
        if self.max_stages is not None and self.max_stages < 1:
            raise InputError("max-stages must be positive")
        if not 0.0 <= self.burnin_fraction < 1.0:
            raise InputError("burnin must be in [0, 1)")
        if self.method not in METHODS:
            raise InputError(f"method must be one of {METHODS}")
        if self.oracle_mode not in ("file", "interactive"):
            raise InputError("oracle must be 'file' or 'interactive'")
        if not self.thresholds or any(not 0.0 < q <= 1.0 for q in self.thresholds):
            raise InputError("thresholds must lie in (0, 1]")
        if any(b <= a for a, b in zip(self.thresholds, self.thresholds[1:])):
            raise InputError("thresholds must be strictly increasing")


def _read_file(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc


def _load_graph(path: str, directed: bool, self_loops: bool) -> Graph:
    try:
        return load_edge_list(_read_file(path), directed, self_loops)
    except (GraphParseError, GraphValidationError) as exc:
        raise InputError(f"{path}: {exc}") from exc


def _load_labels(path: str, graph: Graph) -> LabelMap:
    try:
        return load_labels(_read_file(path), graph)
    except (GraphParseError, GraphValidationError) as exc:
        raise InputError(f"{path}: {exc}") from exc


def _frac_columns(thresholds) -> list[str]:
    return [f"frac_q_{q:g}" for q in thresholds]


def _order_path(out_path: str) -> Path:
    out = Path(out_path)
    return out.with_name(out.stem + "_order" + (out.suffix or ".csv"))


def cmd_run(spec: RunSpec) -> int:
    graph = _load_graph(spec.graph_path, spec.directed, spec.self_loops)
    labels = None
    if spec.labels_path is not None:
        labels = _load_labels(spec.labels_path, graph)
        if labels.k > spec.k:
            raise InputError(f"label file has {labels.k} types but --k={spec.k}")
    if spec.oracle_mode == "file" and labels is None:
        raise InputError("--oracle file requires --labels")

    steps = spec.steps
    if steps is None:
        steps = 20_000 if graph.n <= 100 else 50_000
    config = GibbsConfig(
        k=spec.k,
        chains=spec.chains,
        steps_per_chain=steps,
        burnin_fraction=spec.burnin_fraction,
        master_seed=spec.master_seed,
    )
    out = Path(spec.out_path)
    results = []
    with out.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["run", "stage", "method", "queried_vertex"] + _frac_columns(spec.thresholds))
        fh.flush()
        for run_idx in range(spec.runs):
            run_seed = derive_seed(spec.master_seed, run_idx)
            if spec.oracle_mode == "file":
                oracle = GroundTruthOracle(labels)
            else:
                oracle = InteractiveOracle(
                    sys.stdin,
                    sys.stdout,
                    spec.k,
                    graph.names,
                    vocab=labels.vocab if labels is not None else (),
                )

            def on_stage(rec, run_idx=run_idx, fh=fh, writer=writer):
                writer.writerow(
                    [run_idx, rec.stage, rec.method, rec.vertex_name]
                    + [f"{f:.6g}" for f in rec.fractions]
                )
                fh.flush()
                print(
                    f"run {run_idx} stage {rec.stage}: queried {rec.vertex_name} "
                    f"({rec.method}, {rec.wall_time:.1f}s) "
                    + " ".join(f"{c}={f:.3f}" for c, f in zip(_frac_columns(spec.thresholds), rec.fractions)),
                    file=sys.stderr,
                )

            result = run_active_learning(
                graph,
                spec.k,
                oracle,
                spec.method,
                dataclasses.replace(config, master_seed=run_seed),
                thresholds=spec.thresholds,
                max_stages=spec.max_stages,
                eval_labels=labels,
                on_stage=on_stage,
            )
            results.append(result)
            if result.aborted:
                print(f"run {run_idx} aborted by oracle; partial log kept", file=sys.stderr)
                break
    collection = RunCollection.from_results(results, graph.names)
    _write_order_csv(_order_path(spec.out_path), query_order_stats(collection))
    return EXIT_OK


def _write_order_csv(path: Path, stats: dict[str, tuple[float, float, int]]) -> None:
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["vertex", "mean_stage", "std_stage", "n_runs"])
        for name in sorted(stats, key=lambda s: stats[s][0]):
            mean, std, count = stats[name]
            writer.writerow([name, f"{mean:.6g}", f"{std:.6g}", count])


def _parse_stage_log(path: str) -> RunCollection:
    text = _read_file(path)
    reader = csv.DictReader(text.splitlines())
    fields = reader.fieldnames or []
    frac_cols = [c for c in fields if c.startswith("frac_q_")]
    required = ["run", "stage", "method", "queried_vertex"]
    if fields[: len(required)] != required or not frac_cols:
        raise InputError(f"{path}: unrecognized stage-log schema {fields}")
    thresholds = tuple(float(c[len("frac_q_") :]) for c in frac_cols)
    per_run: dict[int, list] = {}
    for row in reader:
        per_run.setdefault(int(row["run"]), []).append(row)
    runs = []
    for run_idx in sorted(per_run):
        rows = sorted(per_run[run_idx], key=lambda r: int(r["stage"]))
        fractions = np.array([[float(r[c]) for c in frac_cols] for r in rows])
        order = {r["queried_vertex"]: int(r["stage"]) for r in rows}
        runs.append(RunData(fractions=fractions, order=order, method=rows[0]["method"]))
    if not runs:
        raise InputError(f"{path}: no data rows")
    return RunCollection(thresholds=thresholds, runs=tuple(runs))


def cmd_analyze(args) -> int:
    if not args.logs:
        raise InputError("analyze needs at least one stage log")
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    collections = []
    for log_path in args.logs:
        collection = _parse_stage_log(log_path)
        collections.append((log_path, collection))
        stem = Path(log_path).stem
        curves = accuracy_curves(collection)
        with (out_dir / f"{stem}_curves.csv").open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["stage"] + _frac_columns(collection.thresholds))
            for stage, row in enumerate(curves):
                writer.writerow([stage] + [f"{f:.6g}" for f in row])
        _write_order_csv(out_dir / f"{stem}_order.csv", query_order_stats(collection))
    if len(collections) == 2:
        (path_a, coll_a), (path_b, coll_b) = collections
        stats_a = query_order_stats(coll_a)
        stats_b = query_order_stats(coll_b)
        common = sorted(set(stats_a) & set(stats_b))
        if len(common) < 2:
            raise InputError("too few common vertices for a correlation report")
        r = pearson(
            [stats_a[v][0] for v in common], [stats_b[v][0] for v in common]
        )
        rows = [("pearson_query_order", f"{r:.6g}")]
        if args.labels_a and args.labels_b:
            if not args.graph:
                raise InputError("--labels-a/--labels-b require --graph")
            graph = _load_graph(args.graph, args.directed, args.self_loops)
            ami = adjusted_mutual_information(
                _load_labels(args.labels_a, graph), _load_labels(args.labels_b, graph)
            )
            rows.append(("adjusted_mutual_information", f"{ami:.6g}"))
        with (out_dir / "correlation.csv").open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["metric", "value"])
            writer.writerows(rows)
        for metric, value in rows:
            print(f"{metric} = {value}")
    return EXIT_OK


def cmd_fixpoint(args) -> int:
    graph = _load_graph(args.graph, args.directed, args.self_loops)
    labels = _load_labels(args.labels, graph)
    if args.k is not None and args.k != labels.k:
        raise InputError(f"--k={args.k} but label file has {labels.k} types")
    result = fixed_point_relabel(graph, labels, max_sweeps=args.max_sweeps)
    Path(args.out).write_text(dump_labels(result.labels, graph))
    status = "converged" if result.converged else "NOT converged (cycle or cap reached)"
    print(f"iterations={result.iterations} changed={result.changed} {status}")
    print(f"relabeled file written to {args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="netal",
        description="Active learning of hidden vertex types under a block model.",
        epilog=(
            "Seeds: run r uses splitmix64(seed, r); chain c inside a run uses "
            "splitmix64(run_seed, c). NETAL_THREADS caps sampling workers. "
            "Exit codes: 0 ok, 2 input error, 3 runtime error."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run active-learning experiments, write stage/order CSVs")
    run_p.add_argument("--graph", required=True, help="edge-list file: 'src dst' per line")
    run_p.add_argument("--labels", help="label file: 'vertex_id<TAB>label' per line")
    run_p.add_argument("--k", type=int, required=True, help="number of types")
    run_p.add_argument("--directed", action="store_true")
    run_p.add_argument("--self-loops", action="store_true")
    run_p.add_argument("--method", required=True, choices=METHODS)
    run_p.add_argument("--chains", type=int, default=100)
    run_p.add_argument("--steps", type=int, default=None,
                       help="steps per chain (default 20000, or 50000 when n > 100)")
    run_p.add_argument("--burnin", type=float, default=0.5, help="burn-in fraction")
    run_p.add_argument("--runs", type=int, default=1)
    run_p.add_argument("--thresholds", default=",".join(str(q) for q in DEFAULT_THRESHOLDS),
                       help="comma-separated accuracy thresholds in (0,1]")
    run_p.add_argument("--seed", type=int, default=0)
    run_p.add_argument("--out", required=True, help="stage-log CSV path (order CSV lands beside it)")
    run_p.add_argument("--oracle", choices=("file", "interactive"), default="file")
    run_p.add_argument("--max-stages", type=int, default=None)

    an_p = sub.add_parser("analyze", help="summarize stage logs into curve/order/correlation CSVs")
    an_p.add_argument("logs", nargs="*", help="stage-log CSVs from 'netal run'")
    an_p.add_argument("--out-dir", default=".")
    an_p.add_argument("--graph", help="edge list (needed for --labels-a/--labels-b)")
    an_p.add_argument("--directed", action="store_true")
    an_p.add_argument("--self-loops", action="store_true")
    an_p.add_argument("--labels-a", help="first attribute label file for the AMI report")
    an_p.add_argument("--labels-b", help="second attribute label file for the AMI report")

    fx_p = sub.add_parser("fixpoint", help="iterate block-model relabeling to a fixed point")
    fx_p.add_argument("--graph", required=True)
    fx_p.add_argument("--labels", required=True)
    fx_p.add_argument("--k", type=int, default=None)
    fx_p.add_argument("--directed", action="store_true")
    fx_p.add_argument("--self-loops", action="store_true")
    fx_p.add_argument("--max-sweeps", type=int, default=100)
    fx_p.add_argument("--out", required=True, help="path for the relabeled label file")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            spec = RunSpec(
                graph_path=args.graph,
                labels_path=args.labels,
                k=args.k,
                directed=args.directed,
                self_loops=args.self_loops,
                method=args.method,
                chains=args.chains,
                steps=args.steps,
                burnin_fraction=args.burnin,
                runs=args.runs,
                thresholds=tuple(float(q) for q in args.thresholds.split(",")),
                master_seed=args.seed,
                out_path=args.out,
                oracle_mode=args.oracle,
                max_stages=args.max_stages,
            )
            return cmd_run(spec)
        if args.command == "analyze":
            return cmd_analyze(args)
        return cmd_fixpoint(args)
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
