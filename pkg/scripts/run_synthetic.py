#!/usr/bin/env python3
"""Planted-partition sanity experiment: sample a 3-block graph with known
types, write it out in the file formats the CLI ingests, run one AA
active-learning pass, and confirm the true labels are a block-model fixed
point.
"""

import argparse
import sys
from pathlib import Path

from netal import cli, dump_edge_list, dump_labels
from netal.synth import planted_partition_graph


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--out-dir", default="artifacts/synthetic")
    parser.add_argument("--block-size", type=int, default=20)
    parser.add_argument("--p-in", type=float, default=0.5)
    parser.add_argument("--p-out", type=float, default=0.05)
    parser.add_argument("--seed", type=int, default=7)
    args = parser.parse_args()

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    k = 3
    p = [[args.p_in if i == j else args.p_out for j in range(k)] for i in range(k)]
    graph, labels = planted_partition_graph([args.block_size] * k, p, seed=args.seed)
    edges_path = out_dir / "edges.txt"
    labels_path = out_dir / "labels.tsv"
    edges_path.write_text(dump_edge_list(graph))
    labels_path.write_text(dump_labels(labels, graph))
    print(f"sampled n={graph.n} m={graph.m} -> {edges_path}")

    code = cli.main([
        "fixpoint",
        "--graph", str(edges_path),
        "--labels", str(labels_path),
        "--out", str(out_dir / "labels_fixed.tsv"),
    ])
    if code:
        return code

    return cli.main([
        "run",
        "--graph", str(edges_path),
        "--labels", str(labels_path),
        "--k", str(k),
        "--method", "aa",
        "--chains", "100",
        "--steps", "20000",
        "--runs", "1",
        "--seed", str(args.seed),
        "--max-stages", "13",
        "--out", str(out_dir / "aa_stage.csv"),
    ])


if __name__ == "__main__":
    sys.exit(main())
