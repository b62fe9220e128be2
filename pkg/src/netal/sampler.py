"""Constrained heat-bath Gibbs chains over type assignments, multi-chain
ensembles with paired-agreement accumulation, and an exact enumeration
oracle for small instances.
"""

from __future__ import annotations

import itertools
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

from . import _kernels
from .blockmodel import (
    PriorSpec,
    UNIFORM_PRIOR,
    CountMode,
    block_counts,
    log_integrated_likelihood,
)
from .graphs import Graph
from .rng import derive_seed

FIXED_POINT_SCALE = _kernels.FIXED_POINT_SCALE


@dataclass(frozen=True)
class GibbsConfig:
    """Sampling budget for one ensemble.

    Chains are consumed in pairs for agreement estimation, so the chain
    count must be even.  Pair states are compared every `aa_thin` steps
    after burn-in.
    """

    k: int
    chains: int = 100
    steps_per_chain: int = 20_000
    burnin_fraction: float = 0.5
    master_seed: int = 0
    aa_thin: int = 10

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.chains < 2 or self.chains % 2:
            raise ValueError("chains must be even and >= 2 (chains are paired)")
        if self.steps_per_chain < 1:
            raise ValueError("steps_per_chain must be >= 1")
        if not 0.0 <= self.burnin_fraction < 1.0:
            raise ValueError("burnin_fraction must be in [0, 1)")
        if self.aa_thin < 1:
            raise ValueError("aa_thin must be >= 1")

    @property
    def burnin_steps(self) -> int:
        return int(self.steps_per_chain * self.burnin_fraction)


@dataclass(frozen=True)
class Constraints:
    """Queried vertices pinned to their known types."""

    queried: dict[int, int] = field(default_factory=dict)

    def pinned_vector(self, n: int, k: int) -> np.ndarray:
        pinned = np.full(n, -1, dtype=np.int64)
        for v, c in self.queried.items():
            if not 0 <= v < n:
                raise ValueError(f"pinned vertex {v} out of range")
            if not 0 <= c < k:
                raise ValueError(f"pinned type {c} out of range [0,{k})")
            pinned[v] = c
        return pinned

    def unqueried_vector(self, n: int) -> np.ndarray:
        mask = np.ones(n, dtype=bool)
        for v in self.queried:
            mask[v] = False
        return np.flatnonzero(mask).astype(np.int64)


@dataclass(eq=False)
class SampleAccumulators:
    """Mergeable tallies from any number of chains.

    Everything is integer-valued (conditional probabilities and entropies
    are stored in 2^-36 fixed point), so merging is exactly associative
    and commutative and results cannot depend on merge order.
    """

    marginal_counts: np.ndarray  # (n, k) int64 state occupancy
    cond_sum: np.ndarray  # (n, k) int64, fixed-point sums of conditionals
    cond_entropy_sum: np.ndarray  # (n,) int64 fixed-point
    visit_count: np.ndarray  # (n,) int64
    aa_numerator: np.ndarray  # (n,) int64
    aa_denominator: np.ndarray  # (n,) int64

    @staticmethod
    def zeros(n: int, k: int) -> "SampleAccumulators":
        return SampleAccumulators(
            marginal_counts=np.zeros((n, k), dtype=np.int64),
            cond_sum=np.zeros((n, k), dtype=np.int64),
            cond_entropy_sum=np.zeros(n, dtype=np.int64),
            visit_count=np.zeros(n, dtype=np.int64),
            aa_numerator=np.zeros(n, dtype=np.int64),
            aa_denominator=np.zeros(n, dtype=np.int64),
        )

    def merge(self, other: "SampleAccumulators") -> "SampleAccumulators":
        return SampleAccumulators(
            marginal_counts=self.marginal_counts + other.marginal_counts,
            cond_sum=self.cond_sum + other.cond_sum,
            cond_entropy_sum=self.cond_entropy_sum + other.cond_entropy_sum,
            visit_count=self.visit_count + other.visit_count,
            aa_numerator=self.aa_numerator + other.aa_numerator,
            aa_denominator=self.aa_denominator + other.aa_denominator,
        )

    def record_aa_pair(self, t1: np.ndarray, t2: np.ndarray) -> None:
        """Tally one independently drawn assignment pair (the same update the
        pair kernel applies to its chain states)."""
        same = np.asarray(t1) == np.asarray(t2)
        agree = int(same.sum())
        self.aa_numerator[same] += agree
        self.aa_denominator[same] += 1

    def cond_mean(self) -> np.ndarray:
        """Average recorded conditional distribution per vertex (rows with
        zero visits are left as zeros)."""
        visits = np.maximum(self.visit_count, 1)[:, None]
        return (self.cond_sum / FIXED_POINT_SCALE) / visits

    def cond_entropy_mean(self) -> np.ndarray:
        visits = np.maximum(self.visit_count, 1)
        return (self.cond_entropy_sum / FIXED_POINT_SCALE) / visits


def log_gamma_tables(n: int, prior: PriorSpec) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Lookup tables covering every lgamma argument the kernels can hit:
    counts run up to the largest pair capacity, n^2."""
    grid = np.arange(n * n + 1, dtype=np.float64)
    return (
        gammaln(grid + prior.alpha),
        gammaln(grid + prior.beta),
        gammaln(grid + prior.alpha + prior.beta),
    )


def _kernel_args(graph: Graph, prior: PriorSpec):
    la, lb, lc = log_gamma_tables(graph.n, prior)
    return (
        graph._out_idx,
        graph._out_ptr,
        graph._in_idx,
        graph._in_ptr,
        graph.directed,
        int(CountMode.of(graph)),
        la,
        lb,
        lc,
    )


def run_chain(
    graph: Graph,
    constraints: Constraints,
    config: GibbsConfig,
    seed: int,
    acc: SampleAccumulators | None = None,
    prior: PriorSpec = UNIFORM_PRIOR,
) -> SampleAccumulators:
    """One heat-bath chain; tallies land in (and are returned as) `acc`."""
    unqueried = constraints.unqueried_vector(graph.n)
    if unqueried.size == 0:
        raise ValueError("all vertices are queried; nothing to sample")
    if acc is None:
        acc = SampleAccumulators.zeros(graph.n, config.k)
    out_idx, out_ptr, in_idx, in_ptr, directed, mode, la, lb, lc = _kernel_args(graph, prior)
    _kernels.run_chain_kernel(
        config.k,
        graph.n,
        out_idx,
        out_ptr,
        in_idx,
        in_ptr,
        directed,
        mode,
        la,
        lb,
        lc,
        constraints.pinned_vector(graph.n, config.k),
        unqueried,
        config.steps_per_chain,
        config.burnin_steps,
        np.uint64(seed),
        acc.marginal_counts,
        acc.cond_sum,
        acc.cond_entropy_sum,
        acc.visit_count,
    )
    return acc


def _worker_count(tasks: int) -> int:
    env = os.environ.get("NETAL_THREADS")
    if env:
        return max(1, min(int(env), tasks))
    return max(1, min(os.cpu_count() or 1, tasks))


def run_pairs(
    graph: Graph,
    constraints: Constraints,
    config: GibbsConfig,
    pair_indices,
    prior: PriorSpec = UNIFORM_PRIOR,
) -> SampleAccumulators:
    """Run the chain pairs with the given indices (pair i uses chains 2i and
    2i+1) and merge their tallies.  run_ensemble delegates here; tests can
    split the pair range to check merge associativity."""
    unqueried = constraints.unqueried_vector(graph.n)
    if unqueried.size == 0:
        raise ValueError("all vertices are queried; nothing to sample")
    pinned = constraints.pinned_vector(graph.n, config.k)
    kargs = _kernel_args(graph, prior)
    pair_indices = list(pair_indices)

    def one_pair(i: int) -> SampleAccumulators:
        acc = SampleAccumulators.zeros(graph.n, config.k)
        _kernels.run_pair_kernel(
            config.k,
            graph.n,
            *kargs,
            pinned,
            unqueried,
            config.steps_per_chain,
            config.burnin_steps,
            np.uint64(derive_seed(config.master_seed, 2 * i)),
            np.uint64(derive_seed(config.master_seed, 2 * i + 1)),
            config.aa_thin,
            acc.marginal_counts,
            acc.cond_sum,
            acc.cond_entropy_sum,
            acc.visit_count,
            acc.aa_numerator,
            acc.aa_denominator,
        )
        return acc

    workers = _worker_count(len(pair_indices))
    if workers == 1:
        parts = [one_pair(i) for i in pair_indices]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(one_pair, pair_indices))
    total = SampleAccumulators.zeros(graph.n, config.k)
    for part in parts:
        total = total.merge(part)
    return total


def run_ensemble(
    graph: Graph,
    constraints: Constraints,
    config: GibbsConfig,
    prior: PriorSpec = UNIFORM_PRIOR,
) -> SampleAccumulators:
    """config.chains independent chains from deterministic per-chain seeds,
    consumed in fixed pairs (2i, 2i+1) for agreement tallies."""
    return run_pairs(graph, constraints, config, range(config.chains // 2), prior)


def marginals(acc: SampleAccumulators) -> np.ndarray:
    """Per-vertex type frequencies over recorded states; pinned vertices
    come out as point masses since they never leave their pinned type."""
    totals = acc.marginal_counts.sum(axis=1, keepdims=True)
    if (totals == 0).any():
        raise ValueError("no post-burn-in samples recorded")
    return acc.marginal_counts / totals


@dataclass(eq=False)
class ExplicitDistribution:
    """A fully enumerated distribution over assignments (small instances)."""

    assignments: np.ndarray  # (S, n) int64
    probs: np.ndarray  # (S,)
    k: int

    def __post_init__(self):
        self.assignments = np.asarray(self.assignments, dtype=np.int64)
        self.probs = np.asarray(self.probs, dtype=np.float64)
        if self.assignments.shape[0] != self.probs.shape[0]:
            raise ValueError("assignments and probs length mismatch")

    @property
    def n(self) -> int:
        return self.assignments.shape[1]

    def marginals(self) -> np.ndarray:
        n, k = self.n, self.k
        out = np.zeros((n, k))
        for v in range(n):
            for c in range(k):
                out[v, c] = self.probs[self.assignments[:, v] == c].sum()
        return out


MAX_ENUMERATION = 10**7


def exact_posterior(
    graph: Graph,
    constraints: Constraints,
    k: int,
    prior: PriorSpec = UNIFORM_PRIOR,
) -> ExplicitDistribution:
    """Enumerate every assignment consistent with the pins, weight each by
    its integrated likelihood, and normalize."""
    unqueried = constraints.unqueried_vector(graph.n)
    size = k ** len(unqueried)
    if size > MAX_ENUMERATION:
        raise ValueError(
            f"enumeration size k^{len(unqueried)} = {size} exceeds bound {MAX_ENUMERATION}"
        )
    base = np.zeros(graph.n, dtype=np.int64)
    for v, c in constraints.queried.items():
        base[v] = c
    assignments = np.empty((size, graph.n), dtype=np.int64)
    logw = np.empty(size)
    for i, combo in enumerate(itertools.product(range(k), repeat=len(unqueried))):
        t = base.copy()
        t[unqueried] = combo
        assignments[i] = t
        logw[i] = log_integrated_likelihood(block_counts(graph, t, k), prior)
    logw -= logw.max()
    w = np.exp(logw)
    return ExplicitDistribution(assignments=assignments, probs=w / w.sum(), k=k)
