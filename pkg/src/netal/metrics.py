"""Post-hoc analysis over collections of active-learning runs: mean
accuracy curves, query-order statistics, Pearson correlation, and
adjusted mutual information between labelings.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import entr, gammaln

from .active import ExperimentResult
from .graphs import LabelMap


@dataclass(frozen=True)
class RunData:
    """One run reduced to what the summaries need."""

    fractions: np.ndarray  # (stages, n_thresholds)
    order: dict[str, int]  # vertex name -> stage queried
    method: str


@dataclass(frozen=True)
class RunCollection:
    thresholds: tuple[float, ...]
    runs: tuple[RunData, ...]

    def __post_init__(self):
        if not self.runs:
            raise ValueError("empty run collection")
        nq = len(self.thresholds)
        for run in self.runs:
            if run.fractions.shape[1] != nq:
                raise ValueError("threshold mismatch across runs")

    @staticmethod
    def from_results(results: list[ExperimentResult], names) -> "RunCollection":
        thresholds = results[0].thresholds
        runs = []
        for res in results:
            if res.thresholds != thresholds:
                raise ValueError("threshold mismatch across runs")
            fr = np.array(
                [rec.fractions for rec in res.records], dtype=float
            ).reshape(-1, len(thresholds))
            order = {names[v]: stage for v, stage in res.query_order.items()}
            runs.append(RunData(fractions=fr, order=order, method=res.method))
        return RunCollection(thresholds=tuple(thresholds), runs=tuple(runs))


def accuracy_curves(collection: RunCollection) -> np.ndarray:
    """Pointwise mean fraction across runs, shape (stages, n_thresholds)."""
    shapes = {run.fractions.shape for run in collection.runs}
    if len(shapes) != 1:
        raise ValueError(f"runs have mismatched stage counts: {shapes}")
    return np.mean([run.fractions for run in collection.runs], axis=0)


def query_order_stats(collection: RunCollection) -> dict[str, tuple[float, float, int]]:
    """Per vertex: (mean stage queried, sample standard deviation, number of
    contributing runs).  Vertices a truncated run never queried still appear,
    with their contributing-run count."""
    stages: dict[str, list[int]] = {}
    for run in collection.runs:
        for name, stage in run.order.items():
            stages.setdefault(name, []).append(stage)
    out = {}
    for name, values in stages.items():
        arr = np.asarray(values, dtype=float)
        std = float(arr.std(ddof=1)) if arr.size > 1 else 0.0
        out[name] = (float(arr.mean()), std, arr.size)
    return out


def pearson(x, y) -> float:
    """Standard sample correlation coefficient, clamped to [-1, 1].

    Perfectly (anti)correlated inputs hit exact +/-1 instead of drifting a
    few ulps through the square roots."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1 or x.size < 2:
        raise ValueError("pearson needs two equal-length vectors of size >= 2")
    dx = x - x.mean()
    dy = y - y.mean()
    sx2 = float(dx @ dx)
    sy2 = float(dy @ dy)
    if sx2 == 0.0 or sy2 == 0.0:
        raise ValueError("pearson undefined for zero-variance input")
    if np.array_equal(dx, dy):
        return 1.0
    if np.array_equal(dx, -dy):
        return -1.0
    r = float(dx @ dy) / math.sqrt(sx2 * sy2)
    return max(-1.0, min(1.0, r))


def _canonical_partition(labels: np.ndarray) -> np.ndarray:
    seen: dict[int, int] = {}
    out = np.empty_like(labels)
    for i, lab in enumerate(labels):
        out[i] = seen.setdefault(int(lab), len(seen))
    return out


def _expected_mutual_information(a_counts: np.ndarray, b_counts: np.ndarray, n: int) -> float:
    """Expected MI of two labelings with these class-size profiles under the
    hypergeometric (random permutation) model."""
    emi = 0.0
    log_n = math.log(n)
    gln = gammaln
    for ai in a_counts:
        for bj in b_counts:
            lo = max(1, ai + bj - n)
            hi = min(ai, bj)
            for nij in range(lo, hi + 1):
                log_term = math.log(nij) + log_n - math.log(ai) - math.log(bj)
                log_pmf = (
                    gln(ai + 1)
                    + gln(bj + 1)
                    + gln(n - ai + 1)
                    + gln(n - bj + 1)
                    - gln(n + 1)
                    - gln(nij + 1)
                    - gln(ai - nij + 1)
                    - gln(bj - nij + 1)
                    - gln(n - ai - bj + nij + 1)
                )
                emi += (nij / n) * log_term * math.exp(log_pmf)
    return emi


def adjusted_mutual_information(a: LabelMap, b: LabelMap) -> float:
    """Chance-corrected mutual information between two labelings of the same
    vertices, normalized by max(H(a), H(b)): 1 for identical partitions, 0
    in expectation for independent ones."""
    la, lb = a.labels, b.labels
    if la.shape != lb.shape:
        raise ValueError("labelings must cover the same vertex set")
    n = la.size
    if np.array_equal(_canonical_partition(la), _canonical_partition(lb)):
        return 1.0
    cont = np.zeros((a.k, b.k), dtype=np.int64)
    np.add.at(cont, (la, lb), 1)
    ai = cont.sum(axis=1)
    bj = cont.sum(axis=0)
    nz = cont > 0
    pij = cont[nz] / n
    outer = np.outer(ai, bj)[nz] / (n * n)
    mi = float((pij * np.log(pij / outer)).sum())
    h_a = float(entr(ai / n).sum())
    h_b = float(entr(bj / n).sum())
    emi = _expected_mutual_information(ai, bj, n)
    denom = max(h_a, h_b) - emi
    if abs(denom) < 1e-15:
        raise ValueError("adjusted mutual information undefined for degenerate labelings")
    return (mi - emi) / denom
