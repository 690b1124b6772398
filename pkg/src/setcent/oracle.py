"""Brute-force ground truth on desk-scale graphs.

Both searches work on the exact hyper-edge distribution: every subset's
centrality is the total probability of the hyper-edges it intersects, which is
evaluated for whole blocks of subsets at once.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Iterator

import numpy as np

from .graph import Graph
from .sampler import OracleLimitError, Sample, enumerate_distribution, exact_set_centrality

DEFAULT_CEILING = 10**6
_BLOCK = 4096


@dataclass(frozen=True)
class ExactOptimum:
    S_star: tuple[int, ...]
    value: Fraction
    evaluated_subsets: int


@dataclass(frozen=True)
class Distribution:
    """Hyper-edges with nonzero mass, as a 0/1 incidence over ``candidates``."""

    candidates: np.ndarray       # node ids that occur in some hyper-edge
    incidence: np.ndarray        # (hyper-edges, candidates) bool
    probs: np.ndarray            # float mass per hyper-edge row
    edges: tuple[tuple[int, ...], ...]


def hyperedge_distribution(g: Graph, max_paths: int = 100_000) -> Distribution:
    items = [(h, p) for h, p in enumerate_distribution(g, max_paths=max_paths) if h]
    cand = np.array(sorted({u for h, _ in items for u in h}), dtype=np.int64)
    col = {int(u): i for i, u in enumerate(cand)}
    inc = np.zeros((len(items), cand.size), dtype=bool)
    for r, (h, _) in enumerate(items):
        inc[r, [col[u] for u in h]] = True
    probs = np.array([float(p) for _, p in items], dtype=np.float64)
    return Distribution(candidates=cand, incidence=inc, probs=probs,
                        edges=tuple(h for h, _ in items))


def _count_subsets(c: int, k: int) -> int:
    return sum(comb(c, j) for j in range(0, min(k, c) + 1))


def _subset_blocks(c: int, k: int) -> Iterator[np.ndarray]:
    """Column-index combinations of sizes 1..k in lexicographic blocks."""
    for size in range(1, min(k, c) + 1):
        it = itertools.combinations(range(c), size)
        while True:
            block = list(itertools.islice(it, _BLOCK))
            if not block:
                break
            yield np.array(block, dtype=np.int64)


def _covered(incidence: np.ndarray, combos: np.ndarray) -> np.ndarray:
    """(rows, len(combos)) bool: does each row intersect each column subset."""
    return incidence[:, combos].any(axis=2)


def _check_ceiling(c: int, k: int, ceiling: int) -> int:
    total = _count_subsets(c, k)
    if total > ceiling:
        raise OracleLimitError(f"{total} subsets exceed the ceiling of {ceiling}")
    return total


def brute_force_optimum(g: Graph, k: int, ceiling: int = DEFAULT_CEILING,
                        max_paths: int = 100_000) -> ExactOptimum:
    """Most central set of at most ``k`` nodes by exhaustive search.

    Only nodes that lie inside some shortest path are considered; the rest
    never change any set's centrality. Ties go to the lexicographically
    smallest node tuple; the winner's value is recomputed exactly.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    dist = hyperedge_distribution(g, max_paths)
    c = dist.candidates.size
    total = _check_ceiling(c, k, ceiling)
    if c == 0:
        return ExactOptimum(S_star=(), value=Fraction(0), evaluated_subsets=total)

    best_val = -1.0
    tied: list[tuple[int, ...]] = []
    for combos in _subset_blocks(c, k):
        vals = dist.probs @ _covered(dist.incidence, combos)
        top = vals.max()
        if top > best_val + 1e-12:
            best_val, tied = top, []
        if top >= best_val - 1e-12:
            for idx in np.flatnonzero(vals >= best_val - 1e-12):
                tied.append(tuple(int(dist.candidates[j]) for j in combos[idx]))
    # float ties are settled exactly
    exact = {s: exact_set_centrality(g, s, exact=True) for s in tied}
    top = max(exact.values())
    winner = min(s for s, v in exact.items() if v == top)
    return ExactOptimum(S_star=winner, value=top, evaluated_subsets=total)


def exact_supremum_deviation(g: Graph, sample: Sample, k: int,
                             ceiling: int = DEFAULT_CEILING, max_paths: int = 100_000) -> float:
    """``max`` over ``|S| <= k`` of ``|C(S) - C_H(S)|``.

    Sampled hyper-edges always lie among the candidate nodes, so restricting
    the search to them loses nothing; the empty set contributes 0.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if sample.m == 0:
        raise ValueError("empty sample")
    dist = hyperedge_distribution(g, max_paths)
    c = dist.candidates.size
    _check_ceiling(c, k, ceiling)
    if c == 0:
        return 0.0
    col = np.full(g.n, -1, dtype=np.int64)
    col[dist.candidates] = np.arange(c)
    rows = _rows(sample, col, c)
    if rows.shape[0]:
        uniq, counts = np.unique(rows, axis=0, return_counts=True)
    else:
        uniq, counts = rows, np.zeros(0, dtype=np.int64)
    weights = counts / sample.m
    best = 0.0
    for combos in _subset_blocks(c, k):
        true_vals = dist.probs @ _covered(dist.incidence, combos)
        emp_vals = weights @ _covered(uniq, combos)
        best = max(best, float(np.abs(true_vals - emp_vals).max()))
    return best


def _rows(sample: Sample, col: np.ndarray, c: int) -> np.ndarray:
    """Nonempty sampled hyper-edges as (rows, candidates) bool."""
    lengths = np.diff(sample.indptr)
    keep = np.flatnonzero(lengths > 0)
    out = np.zeros((keep.size, c), dtype=bool)
    row_of = np.repeat(np.arange(sample.m), lengths)
    rank = np.full(sample.m, -1, dtype=np.int64)
    rank[keep] = np.arange(keep.size)
    cols = col[sample.indices]
    if (cols < 0).any():
        raise ValueError("sample contains a node that lies on no shortest path")
    out[rank[row_of], cols] = True
    return out
