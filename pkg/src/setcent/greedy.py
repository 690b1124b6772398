"""Greedy maximum coverage over a sample of hyper-edges."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .sampler import Sample


@dataclass(frozen=True)
class GreedyResult:
    nodes: tuple[int, ...]
    covered: int
    m: int
    marginal_gains: tuple[int, ...]

    @property
    def coverage(self) -> float:
        return self.covered / self.m if self.m else 0.0


def greedy_cover(k: int, sample: Sample) -> GreedyResult:
    """Pick up to ``k`` nodes, each covering the most still-uncovered hyper-edges.

    Ties go to the smallest node id. Stops early once no node adds coverage.
    Uncovered counts are kept in a dense array and decremented as hyper-edges
    become covered; each pick is an exact argmax.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    m = sample.m
    counts = sample.node_counts.astype(np.int64).copy()
    if m == 0 or not counts.any():
        return GreedyResult(nodes=(), covered=0, m=m, marginal_gains=())

    edge_of = sample.edge_ids()
    order = np.argsort(sample.indices, kind="stable")
    node_ptr = np.concatenate([[0], np.cumsum(np.bincount(sample.indices, minlength=sample.n))])
    node_edges = edge_of[order]
    covered = np.zeros(m, dtype=bool)
    indptr, indices = sample.indptr, sample.indices

    chosen: list[int] = []
    gains: list[int] = []
    for _ in range(k):
        u = int(np.argmax(counts))
        gain = int(counts[u])
        if gain == 0:
            break
        es = node_edges[node_ptr[u]:node_ptr[u + 1]]
        es = es[~covered[es]]
        covered[es] = True
        starts, ends = indptr[es], indptr[es + 1]
        lengths = ends - starts
        pos = np.repeat(starts - np.concatenate([[0], np.cumsum(lengths)[:-1]]), lengths) + np.arange(lengths.sum())
        np.subtract.at(counts, indices[pos], 1)
        chosen.append(u)
        gains.append(gain)
    return GreedyResult(nodes=tuple(chosen), covered=int(sum(gains)), m=m, marginal_gains=tuple(gains))
