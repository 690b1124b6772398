"""Hyper-edge sampling for set betweenness.

A hyper-edge is the set of internal nodes of a shortest path chosen uniformly
among all shortest paths between a uniformly chosen ordered pair ``u != v``.
Unreachable and adjacent pairs give the empty hyper-edge.
"""

from __future__ import annotations

import itertools
import struct
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import BinaryIO, Iterable, Sequence

import numpy as np

from .graph import Graph
from .streams import stream

HyperEdge = tuple[int, ...]
EMPTY: HyperEdge = ()


class OracleLimitError(RuntimeError):
    """Exhaustive computation refused because it exceeds its size guard."""


def _pick_weighted(rng, items: Sequence[int], weights: Sequence[int]) -> int:
    total = sum(weights)
    r = rng.randrange(total)
    for item, w in zip(items, weights):
        if r < w:
            return item
        r -= w
    raise AssertionError("unreachable")


def random_shortest_path(g: Graph, u: int, v: int, rng) -> list[int] | None:
    """A uniformly random shortest ``u -> v`` path, or None if unreachable.

    Balanced bidirectional BFS: the side whose frontier holds fewer nodes is
    expanded by one full level until the two searches touch. Every shortest
    path crosses the meeting level exactly once, so sampling the meeting node
    proportionally to ``sigma_fwd * sigma_bwd`` and backtracking each side by
    predecessor path counts gives a uniform path.
    """
    if u == v:
        return [u]
    fdist = {u: 0}
    bdist = {v: 0}
    fsig = {u: 1}
    bsig = {v: 1}
    ffront = [u]
    bfront = [v]
    out_adj, in_adj = g.out_adj, g.in_adj
    meet: list[int] = []
    while ffront and bfront:
        forward = len(ffront) <= len(bfront)
        if forward:
            dist, sig, front, adj, other = fdist, fsig, ffront, out_adj, bdist
        else:
            dist, sig, front, adj, other = bdist, bsig, bfront, in_adj, fdist
        level = dist[front[0]] + 1
        nxt = []
        for x in front:
            sx = sig[x]
            for y in adj[x]:
                dy = dist.get(y)
                if dy is None:
                    dist[y] = level
                    sig[y] = sx
                    nxt.append(y)
                elif dy == level:
                    sig[y] += sx
        meet = [y for y in nxt if y in other]
        if forward:
            ffront = nxt
        else:
            bfront = nxt
        if meet:
            break
    if not meet:
        return None

    weights = [fsig[x] * bsig[x] for x in meet]
    mid = _pick_weighted(rng, meet, weights)

    head = [mid]
    x = mid
    while x != u:
        d = fdist[x] - 1
        preds = [p for p in in_adj[x] if fdist.get(p, -1) == d]
        x = _pick_weighted(rng, preds, [fsig[p] for p in preds])
        head.append(x)
    head.reverse()
    x = mid
    while x != v:
        d = bdist[x] - 1
        succs = [p for p in out_adj[x] if bdist.get(p, -1) == d]
        x = _pick_weighted(rng, succs, [bsig[p] for p in succs])
        head.append(x)
    return head


def random_pair(n: int, rng) -> tuple[int, int]:
    u = rng.randrange(n)
    v = rng.randrange(n - 1)
    if v >= u:
        v += 1
    return u, v


def sample_hyperedge(g: Graph, rng) -> HyperEdge:
    """Draw one hyper-edge using the random stream ``rng``."""
    if g.n < 2:
        return EMPTY
    u, v = random_pair(g.n, rng)
    path = random_shortest_path(g, u, v, rng)
    if path is None or len(path) <= 2:
        return EMPTY
    return tuple(sorted(path[1:-1]))


def draw_hyperedges(g: Graph, seed: int, start: int, count: int) -> list[HyperEdge]:
    """Hyper-edges for global sample indices ``start .. start+count-1``."""
    return [sample_hyperedge(g, stream(seed, s)) for s in range(start, start + count)]


_WORKER_GRAPH: Graph | None = None


def _init_worker(g: Graph) -> None:
    global _WORKER_GRAPH
    _WORKER_GRAPH = g


def _draw_chunk(args: tuple[int, int, int]) -> list[HyperEdge]:
    seed, start, count = args
    return draw_hyperedges(_WORKER_GRAPH, seed, start, count)


class ParallelSampler:
    """Draws hyper-edge batches, optionally across worker processes.

    Output depends only on ``(seed, index)``, never on ``workers``.
    """

    def __init__(self, g: Graph, seed: int, workers: int = 1, chunk: int = 2048):
        self.g = g
        self.seed = seed
        self.workers = max(1, workers)
        self.chunk = chunk
        self._pool: ProcessPoolExecutor | None = None

    def draw(self, start: int, count: int) -> list[HyperEdge]:
        if self.workers == 1 or count < 2 * self.chunk:
            return draw_hyperedges(self.g, self.seed, start, count)
        if self._pool is None:
            self._pool = ProcessPoolExecutor(self.workers, initializer=_init_worker, initargs=(self.g,))
        jobs = [(self.seed, s, min(self.chunk, start + count - s))
                for s in range(start, start + count, self.chunk)]
        out: list[HyperEdge] = []
        for part in self._pool.map(_draw_chunk, jobs):
            out.extend(part)
        return out

    def close(self) -> None:
        if self._pool is not None:
            self._pool.shutdown()
            self._pool = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


@dataclass
class Sample:
    """Ordered multiset of hyper-edges stored as CSR arrays.

    ``indptr``/``indices`` follow the scipy CSR convention: the nodes of
    hyper-edge ``s`` are ``indices[indptr[s]:indptr[s+1]]`` (sorted).
    """

    n: int
    indptr: np.ndarray = field(default_factory=lambda: np.zeros(1, dtype=np.int64))
    indices: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    node_counts: np.ndarray = None
    b_H: int = 0

    def __post_init__(self):
        if self.node_counts is None:
            self.node_counts = np.bincount(self.indices, minlength=self.n).astype(np.int64)
        if len(self.indices):
            self.b_H = max(self.b_H, int(np.diff(self.indptr).max()))

    @classmethod
    def from_edges(cls, edges: Iterable[Sequence[int]], n: int) -> "Sample":
        s = cls(n=n)
        s.extend(edges)
        return s

    @property
    def m(self) -> int:
        return len(self.indptr) - 1

    def __len__(self) -> int:
        return self.m

    def edge(self, s: int) -> HyperEdge:
        return tuple(int(x) for x in self.indices[self.indptr[s]:self.indptr[s + 1]])

    @property
    def edges(self) -> list[HyperEdge]:
        return [self.edge(s) for s in range(self.m)]

    def extend(self, batch: Iterable[Sequence[int]]) -> None:
        batch = [tuple(sorted(set(h))) for h in batch]
        if not batch:
            return
        lengths = np.fromiter((len(h) for h in batch), dtype=np.int64, count=len(batch))
        flat = np.fromiter(itertools.chain.from_iterable(batch), dtype=np.int64, count=int(lengths.sum()))
        if flat.size and (flat.min() < 0 or flat.max() >= self.n):
            raise ValueError("hyper-edge node id out of range")
        self.indptr = np.concatenate([self.indptr, self.indptr[-1] + np.cumsum(lengths)])
        self.indices = np.concatenate([self.indices, flat])
        self.node_counts += np.bincount(flat, minlength=self.n)
        if lengths.size:
            self.b_H = max(self.b_H, int(lengths.max()))

    def coverage_count(self, nodes: Iterable[int]) -> int:
        """Number of hyper-edges intersecting ``nodes``."""
        mark = np.zeros(self.n, dtype=bool)
        mark[list(nodes)] = True
        if not mark.any() or self.m == 0:
            return 0
        return int(np.unique(self.edge_ids()[mark[self.indices]]).size)

    def edge_ids(self) -> np.ndarray:
        """Hyper-edge index of every entry of ``indices``."""
        return np.repeat(np.arange(self.m), np.diff(self.indptr))

    def coverage(self, nodes: Iterable[int]) -> float:
        """Empirical set centrality C_H(S)."""
        return self.coverage_count(nodes) / self.m if self.m else 0.0

    # -- binary cache: '<QQQ' header (m, n, seed), then per hyper-edge a
    # '<I' length followed by that many '<I' node ids.
    def write_binary(self, fh: BinaryIO, seed: int = 0) -> None:
        fh.write(struct.pack("<QQQ", self.m, self.n, seed))
        lengths = np.diff(self.indptr).astype("<u4")
        out = np.empty(self.m + self.indices.size, dtype="<u4")
        pos = np.arange(self.m) + self.indptr[:-1]
        out[pos] = lengths
        body = np.ones(out.size, dtype=bool)
        body[pos] = False
        out[body] = self.indices
        fh.write(out.tobytes())

    @classmethod
    def read_binary(cls, fh: BinaryIO) -> tuple["Sample", int]:
        m, n, seed = struct.unpack("<QQQ", fh.read(24))
        data = np.frombuffer(fh.read(), dtype="<u4").astype(np.int64)
        indptr = np.zeros(m + 1, dtype=np.int64)
        pos = 0
        lengths = np.empty(m, dtype=np.int64)
        for s in range(m):
            lengths[s] = data[pos]
            pos += 1 + data[pos]
        if pos != data.size:
            raise ValueError("corrupt sample cache")
        indptr[1:] = np.cumsum(lengths)
        heads = np.arange(m) + indptr[:-1]
        body = np.ones(data.size, dtype=bool)
        body[heads] = False
        return cls(n=int(n), indptr=indptr, indices=data[body]), int(seed)


# ---------------------------------------------------------------------------
# exhaustive oracles (desk-scale graphs only)

def _bfs_counts(g: Graph, src: int, avoid: frozenset[int] = frozenset()):
    """Distances, shortest-path counts, and counts of paths avoiding ``avoid``.

    ``tau[x]`` counts shortest ``src -> x`` paths whose nodes after ``src``
    (``x`` included) are outside ``avoid``.
    """
    dist = {src: 0}
    sigma = {src: 1}
    order = [src]
    i = 0
    while i < len(order):
        x = order[i]
        i += 1
        for y in g.out_adj[x]:
            if y not in dist:
                dist[y] = dist[x] + 1
                sigma[y] = 0
                order.append(y)
            if dist[y] == dist[x] + 1:
                sigma[y] += sigma[x]
    tau = {src: 1}
    for x in order[1:]:
        if x in avoid:
            tau[x] = 0
        else:
            tau[x] = sum(tau[p] for p in g.in_adj[x] if dist.get(p, -1) == dist[x] - 1)
    return dist, sigma, tau, order


def exact_set_centrality(g: Graph, nodes: Iterable[int], exact: bool = False) -> float | Fraction:
    """C(S) under the pair-uniform shortest-path distribution.

    For each ordered pair, the fraction of shortest paths whose internal nodes
    hit ``S`` is ``1 - avoiding/sigma``; the avoiding count comes from a DP
    over the BFS DAG that skips nodes of ``S`` (endpoints exempt).
    """
    S = frozenset(nodes)
    if g.n < 2 or not S:
        return Fraction(0) if exact else 0.0
    total = Fraction(0)
    for u in range(g.n):
        dist, sigma, tau, order = _bfs_counts(g, u, S)
        for v in order[1:]:
            avoiding = sum(tau[p] for p in g.in_adj[v] if dist.get(p, -1) == dist[v] - 1)
            if avoiding != sigma[v]:
                total += 1 - Fraction(avoiding, sigma[v])
    value = total / (g.n * (g.n - 1))
    return value if exact else float(value)


def _all_shortest_paths(g: Graph, u: int, v: int, dist: dict[int, int], limit: int):
    """Enumerate shortest u->v paths by walking the BFS DAG backwards from v."""
    out = []

    def walk(x, tail):
        if len(out) > limit:
            raise OracleLimitError(f"more than {limit} shortest paths")
        if x == u:
            out.append([u] + tail)
            return
        for p in g.in_adj[x]:
            if dist.get(p, -1) == dist[x] - 1:
                walk(p, [x] + tail)

    walk(v, [])
    return out


def enumerate_distribution(g: Graph, max_paths: int = 100_000,
                           exact: bool = True) -> list[tuple[HyperEdge, Fraction | float]]:
    """Every hyper-edge with its sampling probability, sorted by hyper-edge.

    Each ordered pair carries mass ``1/(n(n-1))``, split evenly over its
    shortest paths; unreachable pairs put their mass on the empty hyper-edge.
    """
    if g.n < 2:
        return [(EMPTY, Fraction(1) if exact else 1.0)]
    pair_mass = Fraction(1, g.n * (g.n - 1))
    probs: dict[HyperEdge, Fraction] = {}
    seen = 0
    for u in range(g.n):
        dist, _, _, _ = _bfs_counts(g, u)
        for v in range(g.n):
            if v == u:
                continue
            if v not in dist:
                probs[EMPTY] = probs.get(EMPTY, 0) + pair_mass
                continue
            paths = _all_shortest_paths(g, u, v, dist, max_paths - seen)
            seen += len(paths)
            w = pair_mass / len(paths)
            for p in paths:
                h = tuple(sorted(p[1:-1]))
                probs[h] = probs.get(h, 0) + w
    items = sorted(probs.items())
    if not exact:
        return [(h, float(p)) for h, p in items]
    return items
