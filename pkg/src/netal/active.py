"""The stage-by-stage active learning protocol, label oracles, and the
fixed-point relabeling / model-misfit diagnostics.
"""

from __future__ import annotations

import dataclasses
import time
from dataclasses import dataclass, field

import numpy as np

from .blockmodel import (
    BlockCounts,
    PriorSpec,
    UNIFORM_PRIOR,
    block_counts,
    conditional_type_distribution,
    log_likelihood_given_p,
    mle_edge_probs,
    _shift_vertex,
    _vertex_group_profile,
)
from .graphs import Graph, LabelMap
from .rng import SplitMix64, derive_seed
from .sampler import Constraints, GibbsConfig, marginals, run_ensemble
from .strategies import METHODS, aa_scores, heuristic_scores, mi_scores, select_query

# Seed-derivation namespace for the random-baseline selection stream.
_SELECT_STREAM = 0x5E1EC7


class OracleAborted(RuntimeError):
    """The oracle could not produce a label; the run ends with partial results."""


class GroundTruthOracle:
    """Answers queries from a full labeling; also usable as evaluation truth."""

    def __init__(self, labels: LabelMap):
        self.labels = labels
        self.k = labels.k
        self.vocab = list(labels.vocab)

    def query(self, v: int) -> int:
        return int(self.labels.labels[v])


class InteractiveOracle:
    """Human-in-the-loop labeling over a prompt/response channel pair.

    Replies are cached per vertex; new label strings extend the vocabulary
    until k labels exist.  Empty replies reprompt; after 3 retries (or on
    EOF) the run aborts, keeping the stages recorded so far.
    """

    RETRIES = 3

    def __init__(self, in_stream, out_stream, k: int, names, vocab=()):
        self.in_stream = in_stream
        self.out_stream = out_stream
        self.k = k
        self.names = names
        self.vocab = list(vocab)
        if len(self.vocab) > k:
            raise ValueError("initial vocabulary larger than k")
        self._cache: dict[int, int] = {}

    def query(self, v: int) -> int:
        if v in self._cache:
            return self._cache[v]
        for _ in range(1 + self.RETRIES):
            known = ", ".join(self.vocab) if self.vocab else "none yet"
            self.out_stream.write(f"label vertex {self.names[v]} [known labels: {known}]: ")
            self.out_stream.flush()
            line = self.in_stream.readline()
            if line == "":
                raise OracleAborted(f"EOF while waiting for label of {self.names[v]}")
            reply = line.strip()
            if not reply:
                continue
            if reply in self.vocab:
                idx = self.vocab.index(reply)
            elif len(self.vocab) < self.k:
                self.vocab.append(reply)
                idx = len(self.vocab) - 1
            else:
                self.out_stream.write(
                    f"unknown label '{reply}' but all {self.k} labels are taken\n"
                )
                continue
            self._cache[v] = idx
            return idx
        raise OracleAborted(f"no valid reply for {self.names[v]} after {self.RETRIES} retries")


@dataclass(frozen=True)
class StageRecord:
    stage: int
    vertex: int
    vertex_name: str
    method: str
    fractions: tuple[float, ...]  # one per threshold, NaN without truth labels
    wall_time: float


@dataclass
class ExperimentResult:
    method: str
    thresholds: tuple[float, ...]
    config: GibbsConfig
    n: int
    records: list[StageRecord] = field(default_factory=list)
    query_order: dict[int, int] = field(default_factory=dict)
    aborted: bool = False


def accuracy_fractions(
    marg: np.ndarray, truth: np.ndarray, unqueried, thresholds
) -> tuple[float, ...]:
    """Fraction of unqueried vertices whose marginal on the true type is at
    least q, for each threshold q."""
    unqueried = sorted(unqueried)
    p_true = np.array([marg[v, truth[v]] for v in unqueried])
    return tuple(float((p_true >= q).mean()) for q in thresholds)


def run_active_learning(
    graph: Graph,
    k: int,
    oracle,
    method: str,
    gibbs: GibbsConfig,
    thresholds=(0.1, 0.3, 0.5, 0.7, 0.9),
    max_stages: int | None = None,
    eval_labels: LabelMap | None = None,
    prior: PriorSpec = UNIFORM_PRIOR,
    on_stage=None,
) -> ExperimentResult:
    """Sample, score, select, query, pin, repeat.

    Each stage runs a fresh ensemble conditioned on the pins so far (with a
    stage-derived seed), records threshold accuracies over the unqueried
    vertices, then queries the vertex picked by `method`.  Stops after
    max_stages (default n-1) or when one unqueried vertex remains.  If
    eval_labels is None (interactive oracles without known truth) the
    accuracy fractions are NaN.
    """
    if method not in METHODS:
        raise ValueError(f"method must be one of {METHODS}")
    if k < 1:
        raise ValueError("k must be >= 1")
    thresholds = tuple(thresholds)
    if any(not 0.0 < q <= 1.0 for q in thresholds):
        raise ValueError("thresholds must lie in (0, 1]")
    if eval_labels is None and isinstance(oracle, GroundTruthOracle):
        eval_labels = oracle.labels
    if eval_labels is not None and eval_labels.k > k:
        raise ValueError(f"evaluation labels use {eval_labels.k} types but k={k}")
    if max_stages is None:
        max_stages = graph.n - 1
    select_rng = SplitMix64(derive_seed(gibbs.master_seed, _SELECT_STREAM))
    pins: dict[int, int] = {}
    unqueried = set(range(graph.n))
    result = ExperimentResult(method=method, thresholds=thresholds, config=gibbs, n=graph.n)
    for stage in range(max_stages):
        if len(unqueried) <= 1:
            break
        started = time.perf_counter()
        stage_cfg = dataclasses.replace(
            gibbs, master_seed=derive_seed(gibbs.master_seed, stage)
        )
        acc = run_ensemble(graph, Constraints(dict(pins)), stage_cfg, prior)
        marg = marginals(acc)
        if eval_labels is not None:
            fractions = accuracy_fractions(marg, eval_labels.labels, unqueried, thresholds)
        else:
            fractions = tuple(float("nan") for _ in thresholds)
        if method == "mi":
            scores = mi_scores(acc, unqueried)
        elif method == "aa":
            scores = aa_scores(acc, unqueried)
        else:
            scores = heuristic_scores(method, graph, unqueried)
        v = select_query(scores, unqueried, select_rng)
        try:
            label = oracle.query(v)
        except OracleAborted:
            result.aborted = True
            break
        if not 0 <= label < k:
            raise ValueError(f"oracle label {label} for vertex {v} is outside [0,{k})")
        record = StageRecord(
            stage=stage,
            vertex=v,
            vertex_name=graph.names[v],
            method=method,
            fractions=fractions,
            wall_time=time.perf_counter() - started,
        )
        result.records.append(record)
        result.query_order[v] = stage
        pins[v] = label
        unqueried.discard(v)
        if on_stage is not None:
            on_stage(record)
    return result


@dataclass(frozen=True)
class FixedPointResult:
    labels: LabelMap
    iterations: int
    changed: int
    converged: bool


def _fixed_p_candidate_scores(
    graph: Graph, t: np.ndarray, counts: BlockCounts, v: int, p: np.ndarray
) -> np.ndarray:
    """Full-graph log-likelihood under fixed p for each candidate type of v."""
    kv_out, kv_in, self_loop = _vertex_group_profile(graph, t, v, counts.k)
    scratch = counts.copy()
    _shift_vertex(scratch, int(t[v]), kv_out, kv_in, self_loop, -1)
    scores = np.empty(counts.k)
    for c in range(counts.k):
        _shift_vertex(scratch, c, kv_out, kv_in, self_loop, +1)
        scores[c] = log_likelihood_given_p(scratch, p)
        _shift_vertex(scratch, c, kv_out, kv_in, self_loop, -1)
    return scores


def fixed_point_relabel(
    graph: Graph, labels: LabelMap, max_sweeps: int = 100
) -> FixedPointResult:
    """Iterate synchronous sweeps that reassign every vertex to its most
    likely type under the current labeling's MLE block probabilities, until
    a sweep changes nothing.

    Ties keep the current label.  Returns the number of changing sweeps and
    how many distinct vertices ever changed; synchronous updates can cycle,
    in which case the result is flagged non-converged.
    """
    t = labels.labels.copy()
    k = labels.k
    changed_ever = np.zeros(graph.n, dtype=bool)
    iterations = 0
    converged = False
    for _ in range(max_sweeps):
        counts = block_counts(graph, t, k)
        p = mle_edge_probs(counts)
        new_t = t.copy()
        for v in range(graph.n):
            scores = _fixed_p_candidate_scores(graph, t, counts, v, p)
            best = int(np.argmax(scores))
            if scores[best] > scores[t[v]]:
                new_t[v] = best
        moved = new_t != t
        if not moved.any():
            converged = True
            break
        changed_ever |= moved
        t = new_t
        iterations += 1
    out = LabelMap(labels=t, k=k, vocab=labels.vocab)
    return FixedPointResult(
        labels=out,
        iterations=iterations,
        changed=int(changed_ever.sum()),
        converged=converged,
    )


@dataclass(frozen=True)
class MisfitReport:
    """Leave-one-out predictions when all other true labels are known."""

    predicted: np.ndarray  # (n,) argmax type per vertex
    confidence: np.ndarray  # (n,) probability of the predicted type
    mislabeled: np.ndarray  # (n,) bool, predicted != true

    @property
    def n_mislabeled(self) -> int:
        return int(self.mislabeled.sum())


def misfit_report(
    graph: Graph, labels: LabelMap, prior: PriorSpec = UNIFORM_PRIOR
) -> MisfitReport:
    """For every vertex: the most likely type (and its probability) under the
    integrated likelihood conditioned on all other vertices' true labels."""
    t = labels.labels.copy()
    counts = block_counts(graph, t, labels.k)
    predicted = np.empty(graph.n, dtype=np.int64)
    confidence = np.empty(graph.n)
    for v in range(graph.n):
        cond = conditional_type_distribution(graph, t, counts, v, prior)
        predicted[v] = int(np.argmax(cond))
        confidence[v] = float(cond[predicted[v]])
    return MisfitReport(
        predicted=predicted,
        confidence=confidence,
        mislabeled=predicted != labels.labels,
    )
