"""Interaction graphs and update schedules.

Graphs are stored in CSR form (``indptr``/``indices`` int32 arrays) since the
kernels walk neighbour lists on every step.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np


class EdgeListError(ValueError):
    """Base class for rejected edge-list input."""


class EdgeListParseError(EdgeListError):
    pass


class SelfLoopError(EdgeListError):
    pass


class DuplicateEdgeError(EdgeListError):
    pass


class DisconnectedError(EdgeListError):
    pass


@dataclass(frozen=True, eq=False)
class Network:
    """Undirected, simple, connected graph with ``n >= 2`` vertices."""

    n: int
    indptr: np.ndarray
    indices: np.ndarray
    name: str = "graph"
    # every vertex has the same eccentricity, so one BFS gives the diameter
    vertex_transitive: bool = field(default=False, repr=False)

    @classmethod
    def from_edges(cls, n: int, edges, name: str = "graph", vertex_transitive=False):
        """Build from an iterable of ``(u, v)`` pairs, validating every invariant."""
        if n < 2:
            raise EdgeListError(f"need at least 2 vertices, got n={n}")
        adj: list[list[int]] = [[] for _ in range(n)]
        seen = set()
        for u, v in edges:
            if not (0 <= u < n and 0 <= v < n):
                raise EdgeListParseError(f"edge ({u}, {v}) out of range for n={n}")
            if u == v:
                raise SelfLoopError(f"self-loop at vertex {u}")
            key = (min(u, v), max(u, v))
            if key in seen:
                raise DuplicateEdgeError(f"duplicate edge {key[0]} {key[1]}")
            seen.add(key)
            adj[u].append(v)
            adj[v].append(u)
        indptr = np.zeros(n + 1, dtype=np.int32)
        indptr[1:] = np.cumsum([len(a) for a in adj])
        indices = np.fromiter((v for a in adj for v in a), dtype=np.int32, count=int(indptr[-1]))
        net = cls(n, indptr, indices, name, vertex_transitive)
        reached = int((net.bfs_distances(0) >= 0).sum())
        if reached != n:
            raise DisconnectedError(f"graph is disconnected ({reached} of {n} vertices reachable from 0)")
        return net

    def neighbors(self, u: int) -> np.ndarray:
        return self.indices[self.indptr[u]:self.indptr[u + 1]]

    def degree(self, u: int) -> int:
        return int(self.indptr[u + 1] - self.indptr[u])

    @property
    def degree_sum(self) -> int:
        return int(self.indptr[-1])

    @property
    def edge_count(self) -> int:
        return self.degree_sum // 2

    def edges(self) -> list[tuple[int, int]]:
        return [(u, int(v)) for u in range(self.n) for v in self.neighbors(u) if u < v]

    def bfs_distances(self, source: int) -> np.ndarray:
        dist = np.full(self.n, -1, dtype=np.int64)
        dist[source] = 0
        queue = deque([source])
        indptr, indices = self.indptr, self.indices
        while queue:
            u = queue.popleft()
            for v in indices[indptr[u]:indptr[u + 1]]:
                if dist[v] < 0:
                    dist[v] = dist[u] + 1
                    queue.append(v)
        return dist

    @cached_property
    def diameter(self) -> int:
        sources = [0] if self.vertex_transitive else range(self.n)
        return max(int(self.bfs_distances(s).max()) for s in sources)


def make_torus(width: int, height: int) -> Network:
    """Periodic ``width x height`` lattice with the 4-neighbour (von Neumann) stencil.

    Vertex ``r * width + c`` sits at row ``r``, column ``c``; neighbours are
    listed up, down, left, right.
    """
    if width < 3 or height < 3:
        raise ValueError(f"torus sides must be >= 3 to stay a simple graph, got {width}x{height}")
    n = width * height
    r, c = np.divmod(np.arange(n), width)
    nbrs = np.stack([
        ((r - 1) % height) * width + c,
        ((r + 1) % height) * width + c,
        r * width + (c - 1) % width,
        r * width + (c + 1) % width,
    ], axis=1)
    indptr = np.arange(0, 4 * n + 1, 4, dtype=np.int32)
    return Network(n, indptr, nbrs.reshape(-1).astype(np.int32), f"torus{width}x{height}", True)


def load_edge_list(text: str, name: str = "edgelist") -> Network:
    """Parse the plain-text edge-list format.

    ``#`` lines and blank lines are ignored; the first remaining line is
    ``n <count>``, every later one ``u v`` with 0-based vertex ids.
    """
    n = None
    edges = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if n is None:
            if len(parts) != 2 or parts[0] != "n" or not parts[1].isdigit():
                raise EdgeListParseError(f"line {lineno}: expected header 'n <count>', got {raw!r}")
            n = int(parts[1])
            continue
        if len(parts) != 2 or not all(p.isdigit() for p in parts):
            raise EdgeListParseError(f"line {lineno}: expected 'u v', got {raw!r}")
        edges.append((int(parts[0]), int(parts[1])))
    if n is None:
        raise EdgeListParseError("missing header 'n <count>'")
    return Network.from_edges(n, edges, name)


def read_edge_list(path) -> Network:
    path = Path(path)
    return load_edge_list(path.read_text(encoding="utf-8"), path.stem)


def random_connected_graph(n: int, extra_edge_prob: float, rng: np.random.Generator) -> Network:
    """Random spanning tree plus independent extra edges with the given probability."""
    order = rng.permutation(n)
    edges = set()
    for i in range(1, n):
        u, v = int(order[i]), int(order[rng.integers(i)])
        edges.add((min(u, v), max(u, v)))
    for u in range(n):
        for v in range(u + 1, n):
            if (u, v) not in edges and rng.random() < extra_edge_prob:
                edges.add((u, v))
    return Network.from_edges(n, sorted(edges), f"random{n}")


ASYNC = "async"
SEQUENTIAL = "sequential"


@dataclass(frozen=True, eq=False)
class Schedule:
    """Which vertex is updated at each step.

    ``async`` draws a uniform vertex per step; ``sequential`` cycles through
    a fixed permutation, updating ``permutation[t % n]`` at step ``t``.
    """

    kind: str
    n: int
    permutation: np.ndarray | None = None
    order: str = "identity"

    def __post_init__(self):
        if self.kind not in (ASYNC, SEQUENTIAL):
            raise ValueError(f"unknown schedule {self.kind!r}")
        if self.kind == SEQUENTIAL:
            perm = self.permutation
            if perm is None or len(perm) != self.n or not np.array_equal(np.sort(perm), np.arange(self.n)):
                raise ValueError("sequential schedule needs a permutation of range(n)")

    @classmethod
    def asynchronous(cls, n: int) -> "Schedule":
        return cls(ASYNC, n)

    @classmethod
    def sequential(cls, n: int, order="identity", stream=None) -> "Schedule":
        """``order`` is ``"identity"``, ``"random"`` (needs ``stream``) or an explicit sequence."""
        if isinstance(order, str):
            if order == "identity":
                perm = np.arange(n, dtype=np.int32)
            elif order == "random":
                perm = stream.permutation(n)
            else:
                raise ValueError(f"unknown permutation order {order!r}")
            label = order
        else:
            perm = np.asarray(order, dtype=np.int32)
            label = "explicit"
        return cls(SEQUENTIAL, n, perm, label)


def next_vertex(schedule: Schedule, t: int, stream) -> int:
    if schedule.kind == SEQUENTIAL:
        return int(schedule.permutation[t % schedule.n])
    return stream.below(schedule.n)
