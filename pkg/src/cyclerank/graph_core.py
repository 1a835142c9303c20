"""Exact finite-graph machinery for the normalized cycle-matroid rank.

Edges are identified by their position in the graph's edge list, and an
:class:`EdgeSet` is a bitmask over those positions.  All rank values are
returned as :class:`fractions.Fraction` so that inequality checks never
depend on rounding.
"""
from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import numpy as np

from cyclerank.partition_lab import Partition, WeightedSpace
from cyclerank.reports import ViolationReport

#: Pair checks above this many edges switch from exhaustive to sampled.
DEFAULT_EXHAUSTIVE_LIMIT = 12


class GraphMismatchError(ValueError):
    """An edge set was used with a graph it does not belong to."""


class UnionFind:
    """Disjoint-set forest with path compression and union by rank."""

    def __init__(self, n: int):
        self.parent = list(range(n))
        self.rank = [0] * n
        self.count = n

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a: int, b: int) -> bool:
        """Merge the sets of ``a`` and ``b``; return False if already merged."""
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.rank[ra] < self.rank[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        if self.rank[ra] == self.rank[rb]:
            self.rank[ra] += 1
        self.count -= 1
        return True

    def labels(self) -> list[int]:
        return [self.find(x) for x in range(len(self.parent))]


@dataclass(frozen=True, eq=False)
class FiniteGraph:
    """Bounded-degree simple graph on nodes ``0 .. node_count-1``.

    ``degree_bound`` defaults to the actual maximum degree.
    """

    node_count: int
    edges: tuple[tuple[int, int], ...]
    degree_bound: int | None = None

    def __post_init__(self):
        if self.node_count < 1:
            raise ValueError("node_count must be positive")
        norm = []
        seen = set()
        for pair in self.edges:
            u, v = (int(t) for t in pair)
            if u == v:
                raise ValueError(f"self-loop at node {u}")
            if not (0 <= u < self.node_count and 0 <= v < self.node_count):
                raise ValueError(f"edge ({u}, {v}) out of range")
            key = (min(u, v), max(u, v))
            if key in seen:
                raise ValueError(f"duplicate edge {key}")
            seen.add(key)
            norm.append(key)
        object.__setattr__(self, "edges", tuple(norm))
        degs = self.degrees
        top = max(degs) if degs else 0
        if self.degree_bound is None:
            object.__setattr__(self, "degree_bound", top)
        elif top > self.degree_bound:
            raise ValueError(f"degree {top} exceeds bound {self.degree_bound}")

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, FiniteGraph):
            return NotImplemented
        return (self.node_count, self.edges, self.degree_bound) == (
            other.node_count, other.edges, other.degree_bound)

    def __hash__(self):
        return hash((self.node_count, self.edges, self.degree_bound))

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    @cached_property
    def degrees(self) -> tuple[int, ...]:
        deg = [0] * self.node_count
        for u, v in self.edges:
            deg[u] += 1
            deg[v] += 1
        return tuple(deg)

    @cached_property
    def adjacency(self) -> tuple[tuple[tuple[int, int], ...], ...]:
        """Per node, sorted ``(neighbor, edge_index)`` pairs."""
        adj: list[list[tuple[int, int]]] = [[] for _ in range(self.node_count)]
        for i, (u, v) in enumerate(self.edges):
            adj[u].append((v, i))
            adj[v].append((u, i))
        return tuple(tuple(sorted(a)) for a in adj)

    def edge_set(self, indices: Iterable[int] = ()) -> EdgeSet:
        mask = 0
        for i in indices:
            if not 0 <= i < self.edge_count:
                raise IndexError(f"edge index {i} out of range")
            mask |= 1 << i
        return EdgeSet(self, mask)

    def all_edges(self) -> EdgeSet:
        return EdgeSet(self, (1 << self.edge_count) - 1)

    def empty(self) -> EdgeSet:
        return EdgeSet(self, 0)


@dataclass(frozen=True)
class EdgeSet:
    """Subset of a graph's edges, stored as a bitmask over edge positions."""

    graph: FiniteGraph = field(repr=False)
    mask: int

    def __post_init__(self):
        if self.mask < 0 or self.mask >> self.graph.edge_count:
            raise ValueError("mask refers to edges outside the graph")

    def _check(self, other: EdgeSet) -> None:
        if not isinstance(other, EdgeSet) or other.graph != self.graph:
            raise GraphMismatchError("edge sets belong to different graphs")

    def __or__(self, other: EdgeSet) -> EdgeSet:
        self._check(other)
        return EdgeSet(self.graph, self.mask | other.mask)

    def __and__(self, other: EdgeSet) -> EdgeSet:
        self._check(other)
        return EdgeSet(self.graph, self.mask & other.mask)

    def __sub__(self, other: EdgeSet) -> EdgeSet:
        self._check(other)
        return EdgeSet(self.graph, self.mask & ~other.mask)

    def __invert__(self) -> EdgeSet:
        return EdgeSet(self.graph, ((1 << self.graph.edge_count) - 1) & ~self.mask)

    def __len__(self) -> int:
        return bin(self.mask).count("1")

    def __iter__(self) -> Iterator[int]:
        m = self.mask
        while m:
            low = m & -m
            yield low.bit_length() - 1
            m ^= low

    def __contains__(self, index: int) -> bool:
        return bool(self.mask >> index & 1)

    def issubset(self, other: EdgeSet) -> bool:
        self._check(other)
        return self.mask & ~other.mask == 0

    def pairs(self) -> list[tuple[int, int]]:
        return [self.graph.edges[i] for i in self]


def _require(g: FiniteGraph, x: EdgeSet) -> None:
    if not isinstance(x, EdgeSet) or x.graph != g:
        raise GraphMismatchError("edge set does not belong to this graph")


def _uf_labels(g: FiniteGraph, mask: int) -> UnionFind:
    uf = UnionFind(g.node_count)
    edges = g.edges
    while mask:
        low = mask & -mask
        u, v = edges[low.bit_length() - 1]
        uf.union(u, v)
        mask ^= low
    return uf


def components(g: FiniteGraph, x: EdgeSet) -> Partition:
    """Partition of all nodes into the connected components of ``(V, X)``."""
    _require(g, x)
    return Partition(WeightedSpace.uniform(g.node_count), _uf_labels(g, x.mask).labels())


def components_dfs(g: FiniteGraph, x: EdgeSet) -> Partition:
    """Same as :func:`components`, by iterative depth-first search."""
    _require(g, x)
    label = [-1] * g.node_count
    for start in range(g.node_count):
        if label[start] >= 0:
            continue
        label[start] = start
        stack = [start]
        while stack:
            u = stack.pop()
            for w, i in g.adjacency[u]:
                if x.mask >> i & 1 and label[w] < 0:
                    label[w] = start
                    stack.append(w)
    return Partition(WeightedSpace.uniform(g.node_count), label)


def rank(g: FiniteGraph, x: EdgeSet) -> int:
    """Cycle-matroid rank: ``node_count`` minus the number of components."""
    _require(g, x)
    return g.node_count - _uf_labels(g, x.mask).count


def normalized_rank(g: FiniteGraph, x: EdgeSet) -> Fraction:
    return Fraction(rank(g, x), g.node_count)


def normalized_rank_expectation(g: FiniteGraph, x: EdgeSet) -> Fraction:
    """``1 - E[1/|X_u|]`` for a uniform random node ``u``."""
    part = components_dfs(g, x)
    sizes = part.class_sizes
    n = g.node_count
    return 1 - sum(Fraction(1, n * sizes[c]) for c in part.labels)


def total_rank_exact(g: FiniteGraph) -> Fraction:
    return normalized_rank(g, g.all_edges())


def is_acyclic(g: FiniteGraph, x: EdgeSet) -> bool:
    return rank(g, x) == len(x)


def spanning_forest(g: FiniteGraph) -> EdgeSet:
    """BFS forest, started from the lowest unvisited node, neighbors ascending."""
    seen = [False] * g.node_count
    mask = 0
    for start in range(g.node_count):
        if seen[start]:
            continue
        seen[start] = True
        queue = deque([start])
        while queue:
            u = queue.popleft()
            for w, i in g.adjacency[u]:
                if not seen[w]:
                    seen[w] = True
                    mask |= 1 << i
                    queue.append(w)
    return EdgeSet(g, mask)


def rank_table(g: FiniteGraph) -> np.ndarray:
    """Integer rank of every edge subset, indexed by bitmask."""
    m = g.edge_count
    if m > 24:
        raise ValueError(f"rank table for {m} edges is too large")
    out = np.empty(1 << m, dtype=np.int64)
    n = g.node_count
    for mask in range(1 << m):
        out[mask] = n - _uf_labels(g, mask).count
    return out


def _pair_violation(g: FiniteGraph, x: int, y: int, ranks) -> tuple | None:
    n = g.node_count
    lhs = ranks(x | y) + ranks(x & y)
    rhs = ranks(x) + ranks(y)
    if lhs > rhs:
        return ("submodular", x, y, Fraction(lhs, n), Fraction(rhs, n))
    if x & ~y == 0 and ranks(x) > ranks(y):
        return ("monotone", x, y, Fraction(ranks(x), n), Fraction(ranks(y), n))
    return None


def check_submodular_exhaustive(g: FiniteGraph, *, exhaustive_limit: int = DEFAULT_EXHAUSTIVE_LIMIT,
                                samples: int = 1000, rng: np.random.Generator | None = None,
                                chunk: int = 256) -> ViolationReport:
    """Check submodularity and monotonicity of the normalized rank.

    Every pair of edge subsets is examined when the graph has at most
    ``exhaustive_limit`` edges; otherwise ``samples`` random pairs are drawn.
    Violations are reported as ``(kind, mask_x, mask_y, lhs, rhs)``.
    """
    m = g.edge_count
    report = ViolationReport(name="submodular")
    if m <= exhaustive_limit:
        r = rank_table(g)
        masks = np.arange(1 << m, dtype=np.int64)
        for lo in range(0, 1 << m, chunk):
            xs = masks[lo:lo + chunk, None]
            bad_sub = r[xs | masks] + r[xs & masks] > r[xs] + r[masks]
            bad_mono = ((xs & ~masks) == 0) & (r[xs] > r[masks])
            report.checked += bad_sub.size
            for i, j in zip(*np.nonzero(bad_sub | bad_mono)):
                v = _pair_violation(g, int(xs[i, 0]), int(j), lambda s: int(r[s]))
                report.violations.append(v)
        report.mode = "exhaustive"
        return report
    rng = rng if rng is not None else np.random.default_rng(0)
    full = (1 << m) - 1

    def rk(s: int) -> int:
        return g.node_count - _uf_labels(g, s).count

    for _ in range(samples):
        x = int.from_bytes(rng.bytes((m + 7) // 8), "little") & full
        y = int.from_bytes(rng.bytes((m + 7) // 8), "little") & full
        if rng.random() < 0.25:
            y |= x
        v = _pair_violation(g, x, y, rk)
        report.checked += 1
        if v is not None:
            report.violations.append(v)
    report.mode = "sampled"
    return report


def all_graphs(n: int) -> Iterator[FiniteGraph]:
    """Every labeled simple graph on ``n`` nodes."""
    pairs = list(itertools.combinations(range(n), 2))
    for bits in range(1 << len(pairs)):
        yield FiniteGraph(n, tuple(p for i, p in enumerate(pairs) if bits >> i & 1))


def complete_graph(n: int) -> FiniteGraph:
    return FiniteGraph(n, tuple(itertools.combinations(range(n), 2)))


def cycle_graph(n: int) -> FiniteGraph:
    if n < 3:
        raise ValueError("a cycle needs at least 3 nodes")
    return FiniteGraph(n, tuple((i, (i + 1) % n) for i in range(n)))


def path_graph(n: int) -> FiniteGraph:
    return FiniteGraph(n, tuple((i, i + 1) for i in range(n - 1)))


def disjoint_triangles(n: int) -> FiniteGraph:
    if n % 3:
        raise ValueError("node count must be divisible by 3")
    edges = []
    for b in range(0, n, 3):
        edges += [(b, b + 1), (b + 1, b + 2), (b, b + 2)]
    return FiniteGraph(n, tuple(edges))


def torus_graph(n: int) -> FiniteGraph:
    """``n x n`` grid with wrap-around; node ``(i, j)`` has id ``i*n + j``."""
    if n < 3:
        raise ValueError("torus side must be at least 3")
    edges = []
    for i in range(n):
        for j in range(n):
            edges.append((i * n + j, i * n + (j + 1) % n))
            edges.append((i * n + j, ((i + 1) % n) * n + j))
    return FiniteGraph(n * n, tuple(edges))


def random_graph(n: int, p: float, rng: np.random.Generator,
                 degree_bound: int | None = None) -> FiniteGraph:
    """Erdos-Renyi style graph; edges that would exceed ``degree_bound`` are skipped."""
    deg = [0] * n
    edges = []
    for u, v in itertools.combinations(range(n), 2):
        if rng.random() < p and (degree_bound is None
                                 or max(deg[u], deg[v]) < degree_bound):
            edges.append((u, v))
            deg[u] += 1
            deg[v] += 1
    return FiniteGraph(n, tuple(edges), degree_bound)


def random_forest(n: int, rng: np.random.Generator, keep: float = 0.8) -> FiniteGraph:
    """Random recursive tree on ``n`` nodes with each edge kept with prob. ``keep``."""
    perm = rng.permutation(n)
    edges = []
    for i in range(1, n):
        if rng.random() < keep:
            edges.append((int(perm[i]), int(perm[rng.integers(i)])))
    return FiniteGraph(n, tuple(edges))


def random_edge_set(g: FiniteGraph, rng: np.random.Generator, p: float = 0.5) -> EdgeSet:
    mask = 0
    for i in range(g.edge_count):
        if rng.random() < p:
            mask |= 1 << i
    return EdgeSet(g, mask)


def parse_edge_list(text: str) -> FiniteGraph:
    """Parse ``u v`` lines; ``#`` starts a comment; ``n <count>`` fixes the node count."""
    n = None
    edges = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] == "n":
            if len(parts) != 2:
                raise ValueError(f"line {lineno}: malformed header")
            n = int(parts[1])
            continue
        if len(parts) != 2:
            raise ValueError(f"line {lineno}: expected 'u v'")
        edges.append((int(parts[0]), int(parts[1])))
    if n is None:
        n = 1 + max((max(e) for e in edges), default=0)
    return FiniteGraph(n, tuple(edges))


def format_edge_list(g: FiniteGraph) -> str:
    lines = [f"n {g.node_count}"] + [f"{u} {v}" for u, v in g.edges]
    return "\n".join(lines) + "\n"


def read_edge_list(path: str | Path) -> FiniteGraph:
    return parse_edge_list(Path(path).read_text())


def parse_edge_indices(g: FiniteGraph, text: str) -> EdgeSet:
    idx = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            idx.append(int(line))
    return g.edge_set(idx)


def read_edge_set(g: FiniteGraph, path: str | Path) -> EdgeSet:
    return parse_edge_indices(g, Path(path).read_text())


def mask_to_indices(mask: int) -> list[int]:
    return [i for i in range(mask.bit_length()) if mask >> i & 1]


def edge_set_from_pairs(g: FiniteGraph, pairs: Sequence[tuple[int, int]]) -> EdgeSet:
    index = {e: i for i, e in enumerate(g.edges)}
    return g.edge_set(index[(min(u, v), max(u, v))] for u, v in pairs)
