"""Immutable simple graphs, edge-list/label file ingestion, and
topological vertex scores (degree, betweenness) on induced subgraphs.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np


class GraphParseError(ValueError):
    """Malformed edge-list or label-file input."""


class GraphValidationError(ValueError):
    """Structurally invalid graph or labeling."""


@dataclass(frozen=True, eq=False)
class Graph:
    """Simple directed or undirected graph with dense vertex indices.

    Undirected edges are stored canonically as (u, v) with u <= v and the
    adjacency lists are symmetric.  Instances are immutable after
    construction and safe to share across workers.
    """

    n: int
    directed: bool
    allow_self_loops: bool
    edges: frozenset[tuple[int, int]]
    out_adj: tuple[tuple[int, ...], ...]
    in_adj: tuple[tuple[int, ...], ...]
    names: tuple[str, ...]
    # CSR views of the adjacency, used by the sampling kernels
    _out_idx: np.ndarray = field(repr=False, compare=False, default=None)
    _out_ptr: np.ndarray = field(repr=False, compare=False, default=None)
    _in_idx: np.ndarray = field(repr=False, compare=False, default=None)
    _in_ptr: np.ndarray = field(repr=False, compare=False, default=None)

    @property
    def m(self) -> int:
        return len(self.edges)

    @staticmethod
    def from_edges(
        n: int,
        edges,
        directed: bool,
        allow_self_loops: bool = False,
        names=None,
    ) -> "Graph":
        if names is None:
            names = tuple(str(v) for v in range(n))
        else:
            names = tuple(names)
            if len(names) != n:
                raise GraphValidationError(f"expected {n} names, got {len(names)}")
        canon = set()
        for u, v in edges:
            if not (0 <= u < n and 0 <= v < n):
                raise GraphValidationError(f"edge ({u},{v}) out of range [0,{n})")
            if u == v and not allow_self_loops:
                raise GraphValidationError(f"self-loop at vertex {u} not allowed")
            if not directed and u > v:
                u, v = v, u
            canon.add((u, v))
        out_adj = [[] for _ in range(n)]
        in_adj = [[] for _ in range(n)]
        for u, v in sorted(canon):
            if directed:
                out_adj[u].append(v)
                in_adj[v].append(u)
            else:
                out_adj[u].append(v)
                if u != v:
                    out_adj[v].append(u)
        if directed:
            adj_pairs = (out_adj, in_adj)
        else:
            out_adj = [sorted(a) for a in out_adj]
            adj_pairs = (out_adj, out_adj)
        g = Graph(
            n=n,
            directed=directed,
            allow_self_loops=allow_self_loops,
            edges=frozenset(canon),
            out_adj=tuple(tuple(a) for a in adj_pairs[0]),
            in_adj=tuple(tuple(a) for a in adj_pairs[1]),
            names=names,
        )
        out_idx, out_ptr = _csr(g.out_adj)
        in_idx, in_ptr = _csr(g.in_adj) if directed else (out_idx, out_ptr)
        object.__setattr__(g, "_out_idx", out_idx)
        object.__setattr__(g, "_out_ptr", out_ptr)
        object.__setattr__(g, "_in_idx", in_idx)
        object.__setattr__(g, "_in_ptr", in_ptr)
        return g

    def name_to_index(self) -> dict[str, int]:
        return {name: i for i, name in enumerate(self.names)}


def _csr(adj) -> tuple[np.ndarray, np.ndarray]:
    ptr = np.zeros(len(adj) + 1, dtype=np.int64)
    for i, neigh in enumerate(adj):
        ptr[i + 1] = ptr[i] + len(neigh)
    idx = np.fromiter(
        (w for neigh in adj for w in neigh), dtype=np.int64, count=int(ptr[-1])
    )
    return idx, ptr


@dataclass(frozen=True, eq=False)
class LabelMap:
    """Dense vertex labeling: labels[v] is a type index in [0, k)."""

    labels: np.ndarray
    k: int
    vocab: tuple[str, ...]

    def __post_init__(self):
        if len(self.vocab) != self.k:
            raise GraphValidationError("vocab size must equal k")
        if self.labels.size and (self.labels.min() < 0 or self.labels.max() >= self.k):
            raise GraphValidationError("label index out of range")

    def name_of(self, type_index: int) -> str:
        return self.vocab[type_index]


def _data_lines(text: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        yield lineno, line


def load_edge_list(text: str, directed: bool, allow_self_loops: bool = False) -> Graph:
    """Parse "src dst" lines into a Graph.

    Vertex ids map to dense indices in first-appearance order; duplicate
    edges collapse; '#' lines and blank lines are skipped.
    """
    index: dict[str, int] = {}
    edges = []
    for lineno, line in _data_lines(text):
        tokens = line.split()
        if len(tokens) != 2:
            raise GraphParseError(
                f"line {lineno}: expected two vertex ids, got {len(tokens)} tokens"
            )
        uv = []
        for tok in tokens:
            if tok not in index:
                index[tok] = len(index)
            uv.append(index[tok])
        u, v = uv
        if u == v and not allow_self_loops:
            raise GraphValidationError(
                f"line {lineno}: self-loop on '{tokens[0]}' not allowed"
            )
        edges.append((u, v))
    names = sorted(index, key=index.get)
    return Graph.from_edges(len(index), edges, directed, allow_self_loops, names)


def dump_edge_list(graph: Graph) -> str:
    """Serialize back to the edge-list format (order-insensitive round trip)."""
    lines = [
        f"{graph.names[u]} {graph.names[v]}" for u, v in sorted(graph.edges)
    ]
    return "\n".join(lines) + ("\n" if lines else "")


def load_labels(text: str, graph: Graph) -> LabelMap:
    """Parse "vertex_id<TAB>label" lines covering every graph vertex exactly once."""
    index = graph.name_to_index()
    labels = np.full(graph.n, -1, dtype=np.int64)
    vocab: dict[str, int] = {}
    for lineno, line in _data_lines(text):
        parts = line.split("\t")
        if len(parts) != 2:
            raise GraphParseError(
                f"line {lineno}: expected 'vertex_id<TAB>label', got {line!r}"
            )
        name, label = parts[0].strip(), parts[1].strip()
        if name not in index:
            raise GraphValidationError(f"line {lineno}: unknown vertex id '{name}'")
        v = index[name]
        if labels[v] >= 0:
            raise GraphValidationError(f"line {lineno}: duplicate line for vertex '{name}'")
        if label not in vocab:
            vocab[label] = len(vocab)
        labels[v] = vocab[label]
    missing = np.flatnonzero(labels < 0)
    if missing.size:
        raise GraphValidationError(
            f"missing labels for vertices: {[graph.names[v] for v in missing[:5]]}"
        )
    return LabelMap(labels=labels, k=len(vocab), vocab=tuple(vocab))


def dump_labels(labels: LabelMap, graph: Graph) -> str:
    lines = [f"{graph.names[v]}\t{labels.vocab[labels.labels[v]]}" for v in range(graph.n)]
    return "\n".join(lines) + "\n"


def degree_scores(graph: Graph, active) -> np.ndarray:
    """Edges between each active vertex and other active vertices.

    Directed graphs count in- plus out-edges, each edge once per endpoint.
    Inactive vertices get a -inf sentinel.
    """
    active = set(active)
    scores = np.full(graph.n, -np.inf)
    for v in active:
        deg = sum(1 for w in graph.out_adj[v] if w != v and w in active)
        if graph.directed:
            deg += sum(1 for u in graph.in_adj[v] if u != v and u in active)
        scores[v] = float(deg)
    return scores


def betweenness_scores(graph: Graph, active) -> np.ndarray:
    """Unnormalized shortest-path betweenness on the subgraph induced by active.

    Brandes accumulation; undirected pairs contribute once, multiple shortest
    paths split credit fractionally.  Inactive vertices get -inf.
    """
    active_list = sorted(set(active))
    in_active = np.zeros(graph.n, dtype=bool)
    in_active[active_list] = True
    cb = {v: 0.0 for v in active_list}
    for s in active_list:
        # single-source shortest paths (BFS, unweighted)
        dist = {s: 0}
        sigma = {v: 0.0 for v in active_list}
        sigma[s] = 1.0
        pred: dict[int, list[int]] = {v: [] for v in active_list}
        order = []
        queue = deque([s])
        while queue:
            v = queue.popleft()
            order.append(v)
            for w in graph.out_adj[v]:
                if w == v or not in_active[w]:
                    continue
                if w not in dist:
                    dist[w] = dist[v] + 1
                    queue.append(w)
                if dist[w] == dist[v] + 1:
                    sigma[w] += sigma[v]
                    pred[w].append(v)
        # dependency accumulation in reverse order
        delta = {v: 0.0 for v in order}
        for w in reversed(order):
            for v in pred[w]:
                delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w])
            if w != s:
                cb[w] += delta[w]
    scores = np.full(graph.n, -np.inf)
    for v in active_list:
        scores[v] = cb[v] if graph.directed else cb[v] / 2.0
    return scores
