"""Planted-partition graph generation for verification experiments."""

from __future__ import annotations

import numpy as np

from .graphs import Graph, LabelMap


def planted_partition_graph(
    block_sizes,
    p_matrix,
    directed: bool = False,
    allow_self_loops: bool = False,
    seed: int = 0,
) -> tuple[Graph, LabelMap]:
    """Draw a graph from a block model with known types.

    Each vertex pair (u, v) gets an edge independently with probability
    p_matrix[type(u), type(v)]; undirected graphs read only the upper
    triangle of p_matrix.
    """
    block_sizes = list(block_sizes)
    k = len(block_sizes)
    p = np.asarray(p_matrix, dtype=float)
    if p.shape != (k, k):
        raise ValueError(f"p_matrix must be {k}x{k}")
    n = sum(block_sizes)
    t = np.repeat(np.arange(k), block_sizes)
    rng = np.random.default_rng(seed)
    edges = []
    for u in range(n):
        for v in range(n):
            if not directed and v < u:
                continue
            if u == v and not allow_self_loops:
                continue
            i, j = t[u], t[v]
            if not directed and i > j:
                i, j = j, i
            if rng.random() < p[i, j]:
                edges.append((u, v))
    graph = Graph.from_edges(n, edges, directed, allow_self_loops)
    labels = LabelMap(
        labels=t.astype(np.int64),
        k=k,
        vocab=tuple(f"block{i}" for i in range(k)),
    )
    return graph, labels
