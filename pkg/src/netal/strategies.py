"""Per-vertex query criteria: mutual information and average agreement
estimated from chain tallies, exact versions over enumerated
distributions, the topological baselines, and next-query selection.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import entr

from .graphs import Graph, betweenness_scores, degree_scores
from .rng import SplitMix64
from .sampler import ExplicitDistribution, SampleAccumulators

METHODS = ("mi", "aa", "degree", "betweenness", "random")


@dataclass(frozen=True)
class CriterionScores:
    scores: np.ndarray
    method: str


class InsufficientSamplesError(RuntimeError):
    """An unqueried vertex has no usable samples for the requested criterion."""


def _entropy(p: np.ndarray) -> float:
    return float(entr(p).sum())


def mi_scores(acc: SampleAccumulators, unqueried) -> CriterionScores:
    """Estimated mutual information between each unqueried vertex and the
    rest: entropy of its average conditional minus its average conditional
    entropy, clamped at zero (the true value is nonnegative)."""
    unqueried = np.asarray(sorted(unqueried), dtype=np.int64)
    scores = np.full(acc.visit_count.shape[0], -np.inf)
    cond_mean = acc.cond_mean()
    ent_mean = acc.cond_entropy_mean()
    for v in unqueried:
        if acc.visit_count[v] == 0:
            raise InsufficientSamplesError(
                f"vertex {v} was never resampled; increase steps or chains"
            )
        scores[v] = max(0.0, _entropy(cond_mean[v]) - ent_mean[v])
    return CriterionScores(scores=scores, method="mi")


def aa_scores(acc: SampleAccumulators, unqueried) -> CriterionScores:
    """Estimated average agreement: mean pairwise agreement size over the
    sampled pairs that agreed at each vertex."""
    unqueried = np.asarray(sorted(unqueried), dtype=np.int64)
    scores = np.full(acc.visit_count.shape[0], -np.inf)
    for v in unqueried:
        if acc.aa_denominator[v] == 0:
            raise InsufficientSamplesError(
                f"vertex {v} never agreed across sampled pairs; increase sampling"
            )
        scores[v] = acc.aa_numerator[v] / acc.aa_denominator[v]
    return CriterionScores(scores=scores, method="aa")


MAX_PAIR_STATES = 8192


def exact_mi(dist: ExplicitDistribution, v: int) -> float:
    """Mutual information between t(v) and the rest of the assignment,
    computed by grouping enumerated states on the rest."""
    marg_v = dist.marginals()[v]
    rest = np.delete(dist.assignments, v, axis=1)
    _, inverse = np.unique(rest, axis=0, return_inverse=True)
    groups = int(inverse.max()) + 1
    joint = np.zeros((groups, dist.k))
    np.add.at(joint, (inverse, dist.assignments[:, v]), dist.probs)
    group_p = joint.sum(axis=1)
    cond_entropy = 0.0
    for g in range(groups):
        if group_p[g] > 0:
            cond_entropy += group_p[g] * _entropy(joint[g] / group_p[g])
    return max(0.0, _entropy(marg_v) - cond_entropy)


def exact_aa(dist: ExplicitDistribution, v: int) -> float:
    """Expected agreement between two independent draws conditioned on
    agreeing at v, by double enumeration over state pairs."""
    s = dist.assignments.shape[0]
    if s > MAX_PAIR_STATES:
        raise ValueError(f"{s} states exceeds pair-enumeration bound {MAX_PAIR_STATES}")
    same = np.zeros((s, s), dtype=np.int64)
    for u in range(dist.n):
        col = dist.assignments[:, u]
        same += col[:, None] == col[None, :]
    pair_p = dist.probs[:, None] * dist.probs[None, :]
    at_v = dist.assignments[:, v]
    agree_v = at_v[:, None] == at_v[None, :]
    den = float(pair_p[agree_v].sum())
    num = float((pair_p * same)[agree_v].sum())
    return num / den


def heuristic_scores(method: str, graph: Graph, unqueried) -> CriterionScores:
    """Topological baselines recomputed on the subgraph induced by the
    unqueried vertices; `random` carries flat scores and defers to the
    selection stream."""
    if method == "degree":
        return CriterionScores(degree_scores(graph, unqueried), "degree")
    if method == "betweenness":
        return CriterionScores(betweenness_scores(graph, unqueried), "betweenness")
    if method == "random":
        scores = np.full(graph.n, -np.inf)
        scores[np.asarray(sorted(unqueried), dtype=np.int64)] = 0.0
        return CriterionScores(scores, "random")
    raise ValueError(f"unknown heuristic {method!r}")


def select_query(
    scores: CriterionScores, unqueried, rng: SplitMix64 | None = None
) -> int:
    """Pick the next vertex to query: argmax over the unqueried vertices
    with ties broken toward the smallest index; the random method instead
    draws uniformly from the provided stream."""
    candidates = sorted(unqueried)
    if not candidates:
        raise ValueError("no unqueried vertices to select from")
    if scores.method == "random":
        if rng is None:
            raise ValueError("random selection needs an rng stream")
        return candidates[rng.randint(len(candidates))]
    best = candidates[0]
    for v in candidates[1:]:
        if scores.scores[v] > scores.scores[best]:
            best = v
    return int(best)
