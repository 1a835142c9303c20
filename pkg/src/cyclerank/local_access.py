"""Neighborhood oracles for large or infinite bounded-degree graphs.

An oracle presents a graph the way a local algorithm sees it: a random root
can be sampled, and the neighbor list of any node handle can be queried.
Root sampling is uniform over nodes for finite graphs and over template
nodes for component mixtures, which makes the rooted graph
involution-invariant; the infinite families are vertex-transitive.
"""
from __future__ import annotations

import itertools
from abc import ABC, abstractmethod
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Hashable, Iterator, Sequence

import numpy as np

from cyclerank.graph_core import (
    FiniteGraph, complete_graph, cycle_graph, disjoint_triangles, path_graph,
    read_edge_list, torus_graph, total_rank_exact,
)
from cyclerank.reports import parse_rational, rational_str

Handle = Hashable


class OracleError(RuntimeError):
    """The oracle violated its contract (e.g. an asymmetric neighbor list)."""


class LocalOracle(ABC):
    """Sample-a-root / list-neighbors access to a bounded-degree graph."""

    degree_bound: int
    name: str = "oracle"

    @abstractmethod
    def sample_root(self, rng: np.random.Generator) -> Handle:
        ...

    @abstractmethod
    def neighbors(self, node: Handle) -> Sequence[Handle]:
        ...

    @property
    def known_rank(self) -> Fraction | None:
        """Exact total rank when the family has a closed form."""
        return None

    def root_distribution(self) -> list[tuple[Handle, Fraction]] | None:
        """Finite root law as ``(handle, probability)`` pairs, if it is finite."""
        return None


class InfinitePath(LocalOracle):
    name = "path"
    degree_bound = 2

    def sample_root(self, rng):
        return 0

    def neighbors(self, node):
        return (node - 1, node + 1)

    @property
    def known_rank(self):
        return Fraction(1)


class Grid(LocalOracle):
    """The integer lattice ``Z^d``."""

    def __init__(self, dim: int):
        if dim < 1:
            raise ValueError("dimension must be positive")
        self.dim = dim
        self.degree_bound = 2 * dim
        self.name = f"grid:{dim}"

    def sample_root(self, rng):
        return (0,) * self.dim

    def neighbors(self, node):
        out = []
        for i in range(self.dim):
            for step in (-1, 1):
                out.append(node[:i] + (node[i] + step,) + node[i + 1:])
        return tuple(out)

    @property
    def known_rank(self):
        return Fraction(1)


class ColoredTree(LocalOracle):
    """Subgraph of the ``D``-regular tree spanned by edges with colors in ``colors``.

    The edge coloring is built lazily: the root gives colors ``1..D`` to its
    edges, and a node entered along color ``c`` gives the other colors, in
    ascending order, to its child edges.  A handle is the color sequence of
    the path from the root, so every node has exactly one edge of each color.
    """

    def __init__(self, degree: int, colors: Sequence[int] | None = None):
        if degree < 1:
            raise ValueError("degree must be positive")
        colors = range(1, degree + 1) if colors is None else colors
        self.colors = tuple(sorted(set(int(c) for c in colors)))
        if any(not 1 <= c <= degree for c in self.colors):
            raise ValueError(f"colors must lie in 1..{degree}")
        self.degree = degree
        self.degree_bound = len(self.colors)
        if len(self.colors) == degree:
            self.name = f"tree:{degree}"
        else:
            self.name = f"ctree:{degree}:{','.join(map(str, self.colors))}"

    def sample_root(self, rng):
        return ()

    def neighbors(self, node):
        last = node[-1] if node else None
        out = []
        if last is not None and last in self.colors:
            out.append(node[:-1])
        for c in self.colors:
            if c != last:
                out.append(node + (c,))
        return tuple(out)

    def color_of(self, a: tuple, b: tuple) -> int:
        """Color of the tree edge between adjacent handles ``a`` and ``b``."""
        return a[-1] if len(a) > len(b) else b[-1]

    @property
    def known_rank(self):
        r = len(self.colors)
        return Fraction(1) if r >= 2 else Fraction(r, 2)


def regular_tree(degree: int) -> ColoredTree:
    return ColoredTree(degree)


def colored_tree_subgraph(degree: int, colors: Sequence[int]) -> ColoredTree:
    return ColoredTree(degree, colors)


class FiniteGraphOracle(LocalOracle):
    def __init__(self, graph: FiniteGraph, name: str | None = None):
        self.graph = graph
        self.degree_bound = graph.degree_bound
        self.name = name or f"finite:{graph.node_count}"

    def sample_root(self, rng):
        return int(rng.integers(self.graph.node_count))

    def neighbors(self, node):
        return tuple(w for w, _ in self.graph.adjacency[node])

    @cached_property
    def known_rank(self):
        return total_rank_exact(self.graph)

    def root_distribution(self):
        p = Fraction(1, self.graph.node_count)
        return [(v, p) for v in range(self.graph.node_count)]


def finite_graph_oracle(graph: FiniteGraph, name: str | None = None) -> FiniteGraphOracle:
    return FiniteGraphOracle(graph, name)


TEMPLATE_HELP = "vertex, edge, triangle, k<N> (complete), c<N> (cycle), p<N> (path)"


def template_graph(name: str) -> FiniteGraph:
    """Connected template by name; see ``TEMPLATE_HELP``."""
    fixed = {"vertex": FiniteGraph(1, ()), "edge": path_graph(2),
             "triangle": complete_graph(3)}
    if name in fixed:
        return fixed[name]
    kind, size = name[:1], name[1:]
    if kind in "kcp" and size.isdigit() and int(size) >= 1:
        n = int(size)
        if kind == "k":
            return complete_graph(n)
        if kind == "c":
            return cycle_graph(n)
        return path_graph(n)
    raise ValueError(f"unknown template {name!r}; expected one of {TEMPLATE_HELP}")


class ComponentMixture(LocalOracle):
    """Disjoint union of finite connected templates.

    ``parts`` holds ``(name, probability)`` pairs: the probability that a
    random root lies in a copy of that template.  The root is uniform among
    the template's nodes.
    """

    def __init__(self, parts: Sequence[tuple[str, object]]):
        if not parts:
            raise ValueError("mixture needs at least one template")
        self.names = tuple(name for name, _ in parts)
        self.templates = tuple(template_graph(name) for name in self.names)
        self.probs = tuple(parse_rational(p) for _, p in parts)
        if any(p < 0 for p in self.probs) or sum(self.probs) != 1:
            raise ValueError(f"template probabilities must sum to 1, got {sum(self.probs)}")
        for name, t in zip(self.names, self.templates):
            if total_rank_exact(t) != Fraction(t.node_count - 1, t.node_count):
                raise ValueError(f"template {name} is not connected")
        self.degree_bound = max(t.degree_bound for t in self.templates)
        self._cum = np.cumsum([float(p) for p in self.probs])
        self.name = "mixture:" + ",".join(
            f"{n}@{rational_str(p)}" for n, p in zip(self.names, self.probs))

    def sample_root(self, rng):
        t = min(int(np.searchsorted(self._cum, rng.random(), side="right")),
                len(self.templates) - 1)
        while self.probs[t] == 0:
            t -= 1
        return (t, int(rng.integers(self.templates[t].node_count)))

    def neighbors(self, node):
        t, v = node
        return tuple((t, w) for w, _ in self.templates[t].adjacency[v])

    @property
    def known_rank(self):
        return 1 - sum(p / t.node_count for p, t in zip(self.probs, self.templates))

    def root_distribution(self):
        out = []
        for i, (p, t) in enumerate(zip(self.probs, self.templates)):
            for v in range(t.node_count):
                out.append(((i, v), p / t.node_count))
        return out


def component_mixture(parts: Sequence[tuple[str, object]]) -> ComponentMixture:
    return ComponentMixture(parts)


def infinite_path() -> InfinitePath:
    return InfinitePath()


def grid(dim: int) -> Grid:
    return Grid(dim)


# -- exploration -------------------------------------------------------------

@dataclass(frozen=True)
class BallReport:
    size: int
    exhausted: bool
    radius_reached: int
    queries: int


@dataclass(frozen=True)
class CapResult:
    """Component size, or ``None`` when the exploration hit the cap."""

    size: int | None
    queries: int

    @property
    def over_cap(self) -> bool:
        return self.size is None


def _expand(o: LocalOracle, node: Handle, parent: Handle | None) -> Sequence[Handle]:
    nbrs = o.neighbors(node)
    if len(nbrs) > o.degree_bound:
        raise OracleError(f"{node!r} has {len(nbrs)} neighbors, bound is {o.degree_bound}")
    if parent is not None and parent not in nbrs:
        raise OracleError(f"neighbor lists of {parent!r} and {node!r} are not symmetric")
    return nbrs


def ball(o: LocalOracle, root: Handle, radius: int) -> BallReport:
    """Breadth-first search out to ``radius``.

    ``exhausted`` is set when a layer at depth ``<= radius`` comes out
    empty, which certifies that the whole component was found.
    """
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    parent = {root: None}
    layer = [root]
    depth = 0
    queries = 0
    while depth < radius:
        nxt = []
        for v in layer:
            nbrs = _expand(o, v, parent[v])
            queries += len(nbrs)
            for w in nbrs:
                if w not in parent:
                    parent[w] = v
                    nxt.append(w)
        if not nxt:
            return BallReport(len(parent), True, depth, queries)
        layer = nxt
        depth += 1
    return BallReport(len(parent), False, depth, queries)


def component_capped(o: LocalOracle, root: Handle, cap: int) -> CapResult:
    """Size of the root's component if it is below ``cap``, else over-cap."""
    if cap < 1:
        raise ValueError("cap must be at least 1")
    parent = {root: None}
    if cap == 1:
        return CapResult(None, 0)
    queue = deque([root])
    queries = 0
    while queue:
        v = queue.popleft()
        nbrs = _expand(o, v, parent[v])
        queries += len(nbrs)
        for w in nbrs:
            if w not in parent:
                parent[w] = v
                if len(parent) >= cap:
                    return CapResult(None, queries)
                queue.append(w)
    return CapResult(len(parent), queries)


def iter_explored_edges(o: LocalOracle, root: Handle, limit: int) -> Iterator[tuple[Handle, Handle]]:
    """BFS edges ``(u, w)`` from ``root`` until ``limit`` nodes have been seen."""
    seen = {root}
    queue = deque([root])
    while queue and len(seen) < limit:
        v = queue.popleft()
        for w in o.neighbors(v):
            yield v, w
            if w not in seen:
                seen.add(w)
                queue.append(w)


# -- family spec strings -----------------------------------------------------

FAMILY_HELP = (
    "path | cycle (infinite path) | cycle:N | grid:d | torus:N | tree:D | "
    "ctree:D:a-b | triangles:N | complete:N | mixture:name@p,... | file:PATH"
)


def _parse_colors(text: str) -> list[int]:
    colors: list[int] = []
    for chunk in text.split(","):
        if "-" in chunk:
            a, b = chunk.split("-", 1)
            colors.extend(range(int(a), int(b) + 1))
        elif chunk:
            colors.append(int(chunk))
    return colors


def parse_family(spec: str) -> LocalOracle:
    """Build an oracle from a spec string such as ``"tree:5"`` or ``"mixture:triangle@0.5,edge@0.5"``."""
    kind, _, rest = spec.partition(":")
    try:
        if kind in ("path", "cycle") and not rest:
            return InfinitePath()
        if kind == "cycle":
            return FiniteGraphOracle(cycle_graph(int(rest)), spec)
        if kind == "grid":
            return Grid(int(rest))
        if kind == "torus":
            return FiniteGraphOracle(torus_graph(int(rest)), spec)
        if kind == "tree":
            return ColoredTree(int(rest))
        if kind == "ctree":
            degree, _, colors = rest.partition(":")
            return ColoredTree(int(degree), _parse_colors(colors) if colors else None)
        if kind == "triangles":
            return FiniteGraphOracle(disjoint_triangles(int(rest)), spec)
        if kind == "complete":
            return FiniteGraphOracle(complete_graph(int(rest)), spec)
        if kind == "mixture":
            parts = []
            for item in rest.split(","):
                name, _, prob = item.partition("@")
                parts.append((name.strip(), parse_rational(prob.strip() or "1")))
            return ComponentMixture(parts)
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"bad family spec {spec!r}: {exc}") from None
    if kind == "file":
        return FiniteGraphOracle(read_edge_list(rest), spec)
    raise ValueError(f"unknown family {spec!r}; expected {FAMILY_HELP}")


SIZED_FAMILIES = ("cycle", "path", "triangles", "torus", "complete")


def sized_family(name: str, size: int) -> FiniteGraphOracle:
    """Finite member of a parametrized family, for convergence tables.

    For ``torus`` the size is the side length.
    """
    builders = {"cycle": cycle_graph, "path": path_graph, "triangles": disjoint_triangles,
                "torus": torus_graph, "complete": complete_graph}
    if name not in builders:
        raise ValueError(f"unknown sized family {name!r}; expected one of {SIZED_FAMILIES}")
    return FiniteGraphOracle(builders[name](size), f"{name}:{size}")


def check_oracle_symmetry(o: LocalOracle, root: Handle, limit: int = 10_000) -> list[tuple]:
    """Explore up to ``limit`` nodes and list every asymmetric adjacency."""
    bad = []
    for u, w in iter_explored_edges(o, root, limit):
        if u not in o.neighbors(w):
            bad.append((u, w))
    return bad


def enumerate_handles(o: LocalOracle, root: Handle, limit: int) -> list[Handle]:
    return list(itertools.islice(_bfs_order(o, root), limit))


def _bfs_order(o: LocalOracle, root: Handle) -> Iterator[Handle]:
    seen = {root}
    queue = deque([root])
    while queue:
        v = queue.popleft()
        yield v
        for w in o.neighbors(v):
            if w not in seen:
                seen.add(w)
                queue.append(w)
