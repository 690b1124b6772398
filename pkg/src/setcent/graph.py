"""Unweighted graphs: edge-list parsing, storage and structural statistics."""

from __future__ import annotations

import io
import logging
from dataclasses import dataclass, field
from typing import Iterable, TextIO

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path

log = logging.getLogger(__name__)

COMMENT_PREFIXES = ("#", "%")


class GraphParseError(ValueError):
    """Malformed edge-list input."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass(frozen=True)
class Graph:
    """Immutable unweighted graph on dense node ids ``0..n-1``.

    ``out_adj[u]`` holds the out-neighbors of ``u`` in increasing order. For
    undirected graphs ``in_adj is out_adj``.
    """

    n: int
    directed: bool
    out_adj: tuple[tuple[int, ...], ...]
    in_adj: tuple[tuple[int, ...], ...]
    labels: tuple[int, ...]
    dropped_lines: int = field(default=0, compare=False)

    @property
    def edge_count(self) -> int:
        arcs = sum(len(a) for a in self.out_adj)
        return arcs if self.directed else arcs // 2

    def edges(self) -> Iterable[tuple[int, int]]:
        """Each edge once, as dense ids (``u < v`` for undirected graphs)."""
        for u, nbrs in enumerate(self.out_adj):
            for v in nbrs:
                if self.directed or u < v:
                    yield u, v

    def label_of(self, u: int) -> int:
        return self.labels[u]

    def to_csr(self) -> csr_matrix:
        rows = np.repeat(np.arange(self.n), [len(a) for a in self.out_adj])
        cols = np.fromiter((v for a in self.out_adj for v in a), dtype=np.int64, count=len(rows))
        return csr_matrix((np.ones(len(rows), dtype=np.int8), (rows, cols)), shape=(self.n, self.n))

    @classmethod
    def from_edges(cls, edges: Iterable[tuple[int, int]], directed: bool = False,
                   n: int | None = None) -> "Graph":
        """Build from dense-id edges; self-loops and duplicates are dropped.

        With ``n`` given, ids must lie in ``[0, n)`` and isolated nodes are kept;
        labels are then the ids themselves.
        """
        edges = list(edges)
        if n is None:
            n = 1 + max((max(u, v) for u, v in edges), default=-1)
        out: list[set[int]] = [set() for _ in range(n)]
        inn: list[set[int]] = [set() for _ in range(n)] if directed else out
        for u, v in edges:
            if u == v:
                continue
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge ({u}, {v}) outside [0, {n})")
            out[u].add(v)
            inn[v].add(u)
        out_t = tuple(tuple(sorted(s)) for s in out)
        in_t = tuple(tuple(sorted(s)) for s in inn) if directed else out_t
        return cls(n=n, directed=directed, out_adj=out_t, in_adj=in_t, labels=tuple(range(n)))


def parse_edge_list(text: str | TextIO, directed: bool = False) -> Graph:
    """Parse a whitespace-separated edge list.

    Lines starting with ``#`` or ``%`` and blank lines are skipped. The first two
    tokens of every other line must be integers; any further columns (weights,
    timestamps in KONECT dumps) are ignored. External ids are mapped to dense ids
    in order of first appearance.
    """
    stream = io.StringIO(text) if isinstance(text, str) else text
    ids: dict[int, int] = {}
    labels: list[int] = []
    arcs: list[tuple[int, int]] = []
    dropped = 0
    for lineno, line in enumerate(stream, start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith(COMMENT_PREFIXES):
            continue
        tokens = stripped.split()
        if len(tokens) < 2:
            raise GraphParseError(f"expected two node ids, got {stripped!r}", lineno)
        try:
            a, b = int(tokens[0]), int(tokens[1])
        except ValueError:
            raise GraphParseError(f"non-integer node id in {stripped!r}", lineno) from None
        pair = []
        for x in (a, b):
            if x not in ids:
                ids[x] = len(labels)
                labels.append(x)
            pair.append(ids[x])
        arcs.append((pair[0], pair[1]))
    if not labels:
        raise GraphParseError("empty graph")

    n = len(labels)
    out: list[set[int]] = [set() for _ in range(n)]
    inn: list[set[int]] = [set() for _ in range(n)] if directed else out
    for u, v in arcs:
        if u == v or v in out[u]:
            dropped += 1
            continue
        out[u].add(v)
        inn[v].add(u)
    if dropped:
        log.info("dropped %d self-loop or duplicate edge lines", dropped)
    out_t = tuple(tuple(sorted(s)) for s in out)
    in_t = tuple(tuple(sorted(s)) for s in inn) if directed else out_t
    return Graph(n=n, directed=directed, out_adj=out_t, in_adj=in_t,
                 labels=tuple(labels), dropped_lines=dropped)


def read_edge_list(path, directed: bool = False) -> Graph:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_edge_list(fh, directed=directed)


def write_edge_list(g: Graph, fh: TextIO) -> None:
    """Write ``g`` using its external labels; ``parse_edge_list`` reads back the same graph.

    Lines are ordered so that first appearances follow the dense ids, which
    makes parse-write-parse reproduce the dense representation exactly. A
    node with no edge to an earlier node is introduced by a self-loop line
    (dropped on parse but still registering the node).
    """
    lab = g.labels
    fh.write(f"# {'directed' if g.directed else 'undirected'} n={g.n} m={g.edge_count}\n")
    written: set[tuple[int, int]] = set()

    def emit(a: int, b: int) -> None:
        fh.write(f"{lab[a]} {lab[b]}\n")
        if a != b:
            written.add((a, b) if g.directed or a < b else (b, a))

    j = 0
    while j < g.n:
        earlier_in = [x for x in g.in_adj[j][:1] if x < j]
        earlier_out = [x for x in g.out_adj[j][:1] if x < j]
        if earlier_in:
            emit(earlier_in[0], j)
        elif earlier_out:
            emit(j, earlier_out[0])
        elif j + 1 < g.n and j + 1 in g.out_adj[j]:
            emit(j, j + 1)
            j += 1
        else:
            emit(j, j)
        j += 1
    for u, v in g.edges():
        if (u, v) not in written:
            fh.write(f"{lab[u]} {lab[v]}\n")


def vertex_diameter_exact(g: Graph, chunk: int | None = None) -> int:
    """Largest number of internal nodes on a shortest path (hop distance - 1).

    Runs one BFS per source, in chunks, through scipy's unweighted
    shortest-path routine. Returns 0 when every reachable pair is adjacent.
    """
    if g.n < 2:
        return 0
    adj = g.to_csr()
    if chunk is None:
        chunk = max(1, min(256, 20_000_000 // g.n))
    best = 0
    for start in range(0, g.n, chunk):
        idx = np.arange(start, min(start + chunk, g.n))
        dist = shortest_path(adj, method="D", directed=g.directed, unweighted=True, indices=idx)
        finite = dist[np.isfinite(dist)]
        if finite.size:
            best = max(best, int(finite.max()) - 1)
    return max(best, 0)


@dataclass(frozen=True)
class GraphStats:
    n: int
    edge_count: int
    vertex_diameter: int | None


def graph_stats(g: Graph, vertex_diameter: int | None = None, exact: bool = True) -> GraphStats:
    """n, |E| and B. ``vertex_diameter`` overrides the computation."""
    if vertex_diameter is None and exact:
        vertex_diameter = vertex_diameter_exact(g)
    return GraphStats(n=g.n, edge_count=g.edge_count, vertex_diameter=vertex_diameter)
