"""Approximate Monte Carlo Rademacher averages over single-node indicators.

The state keeps, for every trial ``j`` and every node ``u`` seen in some
hyper-edge, the integer signed sum ``s[j, u] = sum_s sigma[j, s] * f_u(h_s)``.
The AMCERA is the trial-average of the best sum of at most ``k`` positive
entries, divided by ``m``. Division happens only at query time, so the state
is exact integer arithmetic and independent of how samples were batched.
"""

from __future__ import annotations

import csv
import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy.sparse import csr_matrix

from .sampler import OracleLimitError, Sample
from .streams import rademacher_signs


class StateConsistencyError(RuntimeError):
    pass


def topk_positive_sums(sums: np.ndarray, k: int) -> np.ndarray:
    """Per row, the sum of the ``k`` largest positive entries (0 if none)."""
    sums = np.atleast_2d(sums)
    if sums.shape[1] == 0:
        return np.zeros(sums.shape[0], dtype=sums.dtype)
    pos = np.maximum(sums, 0)
    if k >= pos.shape[1]:
        return pos.sum(axis=1)
    part = np.partition(pos, pos.shape[1] - k, axis=1)[:, pos.shape[1] - k:]
    return part.sum(axis=1)


def topk_sum(values: np.ndarray, k: int) -> int | float:
    values = np.asarray(values)
    if values.size <= k:
        return values.sum()
    return np.partition(values, values.size - k)[values.size - k:].sum()


@dataclass(frozen=True)
class EraBound:
    amcera: float
    wimpy: float
    slack: float

    @property
    def total(self) -> float:
        return self.amcera + self.slack


class RademacherState:
    """Incremental signed-sum table for ``t`` Monte Carlo trials.

    Signs are derived from ``(seed, sample index, trial)``, so extending with
    the same hyper-edges in any batch split produces an identical table.
    """

    def __init__(self, t: int, seed: int = 0, offset: int = 0):
        if t < 1:
            raise ValueError(f"t must be >= 1, got {t}")
        self.t = t
        self.seed = seed
        # first global sample index covered; nonzero only for partial tables
        self.offset = offset
        self.m = 0
        self.b_H = 0
        self._col: dict[int, int] = {}
        self._nodes: list[int] = []
        self._sums = np.zeros((t, 0), dtype=np.int64)
        self._counts = np.zeros(0, dtype=np.int64)

    @property
    def nodes(self) -> np.ndarray:
        return np.asarray(self._nodes, dtype=np.int64)

    @property
    def signed_sums(self) -> np.ndarray:
        """``(t, seen_nodes)`` integer table, columns ordered as ``nodes``."""
        return self._sums[:, : len(self._nodes)]

    @property
    def node_counts(self) -> np.ndarray:
        return self._counts[: len(self._nodes)]

    def table(self) -> dict[int, tuple[int, tuple[int, ...]]]:
        """``{node: (c_u, per-trial sums)}``; handy for equality checks."""
        sums = self.signed_sums
        return {u: (int(self._counts[i]), tuple(int(x) for x in sums[:, i]))
                for i, u in enumerate(self._nodes)}

    def _columns_for(self, flat: np.ndarray) -> np.ndarray:
        col = self._col
        for u in dict.fromkeys(flat.tolist()):
            if u not in col:
                col[u] = len(self._nodes)
                self._nodes.append(u)
        need = len(self._nodes)
        if need > self._sums.shape[1]:
            cap = max(need, 2 * self._sums.shape[1], 16)
            grown = np.zeros((self.t, cap), dtype=np.int64)
            grown[:, : self._sums.shape[1]] = self._sums
            self._sums = grown
            counts = np.zeros(cap, dtype=np.int64)
            counts[: self._counts.size] = self._counts
            self._counts = counts
        return np.fromiter((col[u] for u in flat.tolist()), dtype=np.int64, count=flat.size)

    def extend(self, batch: Sequence[Sequence[int]], start_index: int,
               signs: np.ndarray | None = None) -> "RademacherState":
        """Absorb hyper-edges occupying sample indices ``start_index, ...``.

        ``signs`` (shape ``(t, len(batch))``, entries +-1) replaces the derived
        signs; it exists for replaying a fixed sign matrix.
        """
        if start_index != self.offset + self.m:
            raise StateConsistencyError(
                f"start_index {start_index} != next expected index {self.offset + self.m}")
        b = len(batch)
        if b == 0:
            return self
        lengths = np.fromiter((len(h) for h in batch), dtype=np.int64, count=b)
        flat = np.fromiter(itertools.chain.from_iterable(batch), dtype=np.int64, count=int(lengths.sum()))
        if signs is None:
            signs = rademacher_signs(self.seed, np.arange(start_index, start_index + b), self.t)
        else:
            signs = np.asarray(signs, dtype=np.int64)
            if signs.shape != (self.t, b) or not np.all(np.abs(signs) == 1):
                raise ValueError(f"signs must be a +-1 array of shape ({self.t}, {b})")
        if flat.size:
            cols = self._columns_for(flat)
            touched, local = np.unique(cols, return_inverse=True)
            rows = np.repeat(np.arange(b), lengths)
            inc = csr_matrix((np.ones(flat.size, dtype=np.int64), (local, rows)),
                             shape=(touched.size, b))
            # (touched x b) @ (b x t) -> per-node, per-trial increments
            delta = inc @ signs.T.astype(np.int64)
            self._sums[:, touched] += np.asarray(delta).T
            self._counts[touched] += np.bincount(local, minlength=touched.size)
            self.b_H = max(self.b_H, int(lengths.max()))
        self.m += b
        return self

    def merge(self, other: "RademacherState") -> "RademacherState":
        """Combine with the table covering the index range right after this one."""
        if (other.t, other.seed) != (self.t, self.seed):
            raise StateConsistencyError("cannot merge states with different t or seed")
        if other.offset != self.offset + self.m:
            raise StateConsistencyError("merged tables must cover adjacent index ranges")
        out = RademacherState(self.t, self.seed, self.offset)
        out.m = self.m + other.m
        out.b_H = max(self.b_H, other.b_H)
        for st in (self, other):
            if st._nodes:
                cols = out._columns_for(np.asarray(st._nodes, dtype=np.int64))
                out._sums[:, cols] += st.signed_sums
                out._counts[cols] += st.node_counts
        return out

    def amcera_numerator(self, k: int) -> int:
        """``sum_j`` of the top-``k`` positive signed sums (exact integer)."""
        return int(topk_positive_sums(self.signed_sums, k).sum())

    def amcera(self, k: int) -> float:
        if self.m == 0:
            raise StateConsistencyError("no samples absorbed")
        return self.amcera_numerator(k) / (self.t * self.m)

    def wimpy_variance(self, k: int) -> float:
        """``(b_H / m) *`` the sum of the ``k`` largest node counts."""
        if self.m == 0:
            raise StateConsistencyError("no samples absorbed")
        return self.b_H * int(topk_sum(self.node_counts, k)) / self.m

    def era_upper_bound(self, k: int, delta: float) -> EraBound:
        """AMCERA plus its concentration slack, valid with prob. ``>= 1 - delta``."""
        if not 0 < delta < 1:
            raise ValueError(f"delta must lie in (0, 1), got {delta}")
        a = self.amcera(k)
        w = self.wimpy_variance(k)
        return EraBound(amcera=a, wimpy=w, slack=era_slack(w, self.t, self.m, delta))

    def write_csv(self, fh) -> None:
        """Debug dump: one ``node,trial,sum`` row per entry."""
        writer = csv.writer(fh)
        writer.writerow(["node", "trial", "sum"])
        sums = self.signed_sums
        for i, u in enumerate(self._nodes):
            for j in range(self.t):
                writer.writerow([u, j, int(sums[j, i])])


def era_slack(wimpy: float, t: int, m: int, delta: float) -> float:
    return math.sqrt(4.0 * wimpy * math.log(1.0 / delta) / (t * m))


# ---------------------------------------------------------------------------
# exhaustive oracles

MAX_ORACLE_M = 14
MAX_ORACLE_NODES = 10


def _incidence(sample: Sample) -> tuple[np.ndarray, np.ndarray]:
    nodes = np.unique(sample.indices)
    mat = np.zeros((sample.m, nodes.size), dtype=np.int64)
    col = {int(u): i for i, u in enumerate(nodes)}
    for s in range(sample.m):
        for u in sample.edge(s):
            mat[s, col[u]] = 1
    return nodes, mat


def _guard(sample: Sample, n_nodes: int) -> None:
    if sample.m > MAX_ORACLE_M or n_nodes > MAX_ORACLE_NODES:
        raise OracleLimitError(f"exhaustive oracle limited to m <= {MAX_ORACLE_M} and "
                               f"{MAX_ORACLE_NODES} covered nodes (got m={sample.m}, nodes={n_nodes})")


def all_sign_vectors(m: int) -> np.ndarray:
    """Every vector in {-1, +1}^m as rows of a ``(2^m, m)`` int array."""
    if m == 0:
        return np.zeros((1, 0), dtype=np.int64)
    grid = (np.arange(2 ** m)[:, None] >> np.arange(m)[None, :]) & 1
    return (2 * grid - 1).astype(np.int64)


def subset_coverage_matrix(mat: np.ndarray, k: int) -> np.ndarray:
    """``(subsets, m)`` 0/1 matrix of f_S(h_s) for every nonempty |S| <= k."""
    ncols = mat.shape[1]
    rows = []
    for size in range(1, min(k, ncols) + 1):
        for combo in itertools.combinations(range(ncols), size):
            rows.append(mat[:, combo].max(axis=1))
    if not rows:
        return np.zeros((0, mat.shape[0]), dtype=np.int64)
    return np.array(rows, dtype=np.int64)


def exact_era(sample: Sample, k: int) -> Fraction:
    """ERA over {f_S : |S| <= k} by enumerating all ``2^m`` sign vectors."""
    nodes, mat = _incidence(sample)
    _guard(sample, nodes.size)
    if sample.m == 0:
        return Fraction(0)
    cover = subset_coverage_matrix(mat, k)
    signs = all_sign_vectors(sample.m)
    if cover.shape[0] == 0:
        return Fraction(0)
    best = np.maximum((signs @ cover.T).max(axis=1), 0)
    return Fraction(int(best.sum()), signs.shape[0] * sample.m)


def exact_expected_amcera(sample: Sample, k: int) -> Fraction:
    """Expectation over signs of the single-trial AMCERA, by enumeration."""
    nodes, mat = _incidence(sample)
    _guard(sample, nodes.size)
    if sample.m == 0:
        return Fraction(0)
    signs = all_sign_vectors(sample.m)
    sums = signs @ mat
    total = int(topk_positive_sums(sums, k).sum())
    return Fraction(total, signs.shape[0] * sample.m)
