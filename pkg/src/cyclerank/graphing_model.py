"""Finite weighted models of graphings.

A :class:`WeightedGraphing` is a finite graph with a probability weight on
each node.  Measure preservation forces the weights of adjacent nodes to be
equal, i.e. constant on connected components.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from cyclerank.graph_core import (
    EdgeSet, FiniteGraph, GraphMismatchError, components, random_graph,
)
from cyclerank.partition_lab import Partition, WeightedSpace, psi
from cyclerank.reports import ViolationReport, parse_rational, rational_str


def check_measure_preservation(graph: FiniteGraph, weights: WeightedSpace) -> ViolationReport:
    """Compare ``w(a) deg_b(a)`` with ``w(b) deg_a(b)`` across every edge.

    For simple graphs both degrees are 1, so this is ``w(a) == w(b)``.
    """
    report = ViolationReport(name="measure_preservation")
    if weights.point_count != graph.node_count:
        report.preconditions.append("weight vector length differs from node count")
        return report
    w = weights.weights
    for a, b in graph.edges:
        report.checked += 1
        if w[a] != w[b]:
            report.violations.append((a, b, w[a], w[b]))
    return report


def flow_between(graph: FiniteGraph, weights: WeightedSpace,
                 a_set: set[int], b_set: set[int]) -> Fraction:
    """``sum_{x in A} w(x) deg_B(x)``; symmetric in ``A, B`` on a graphing."""
    w = weights.weights
    total = Fraction(0)
    for x in a_set:
        total += w[x] * sum(1 for y, _ in graph.adjacency[x] if y in b_set)
    return total


@dataclass(frozen=True)
class WeightedGraphing:
    graph: FiniteGraph
    weights: WeightedSpace = field(repr=False)

    def __post_init__(self):
        report = check_measure_preservation(self.graph, self.weights)
        if not report.ok:
            raise ValueError(f"measure preservation fails: {report.to_dict(limit=3)}")

    @classmethod
    def unchecked(cls, graph: FiniteGraph, weights: WeightedSpace) -> WeightedGraphing:
        obj = object.__new__(cls)
        object.__setattr__(obj, "graph", graph)
        object.__setattr__(obj, "weights", weights)
        return obj

    @classmethod
    def uniform(cls, graph: FiniteGraph) -> WeightedGraphing:
        return cls(graph, WeightedSpace.uniform(graph.node_count))

    @classmethod
    def from_component_masses(cls, graph: FiniteGraph, masses: Sequence) -> WeightedGraphing:
        """Spread ``masses[i]`` (normalized) evenly over the ``i``-th component."""
        part = components(graph, graph.all_edges())
        masses = [parse_rational(m) for m in masses]
        if len(masses) != part.class_count:
            raise ValueError(f"expected {part.class_count} component masses")
        total = sum(masses)
        w = tuple(masses[c] / total / part.class_sizes[c] for c in part.labels)
        return cls(graph, WeightedSpace(w))

    def to_dict(self) -> dict:
        return {
            "n": self.graph.node_count,
            "edges": [list(e) for e in self.graph.edges],
            "weights": [rational_str(x) for x in self.weights.weights],
        }

    @classmethod
    def from_dict(cls, data: dict) -> WeightedGraphing:
        g = FiniteGraph(int(data["n"]), tuple(tuple(e) for e in data["edges"]))
        if "weights" in data:
            return cls(g, WeightedSpace(tuple(parse_rational(x) for x in data["weights"])))
        return cls.uniform(g)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> WeightedGraphing:
        return cls.from_dict(json.loads(text))


def _require(wg: WeightedGraphing, x: EdgeSet) -> None:
    if x.graph != wg.graph:
        raise GraphMismatchError("edge set does not belong to this graphing")


def weighted_degree(wg: WeightedGraphing, x: EdgeSet) -> Fraction:
    """``sum_u w(u) deg_X(u)``, i.e. the average degree times ``eta(X)``."""
    _require(wg, x)
    w = wg.weights.weights
    total = Fraction(0)
    for i in x:
        u, v = wg.graph.edges[i]
        total += w[u] + w[v]
    return total


def average_degree(wg: WeightedGraphing) -> Fraction:
    return weighted_degree(wg, wg.graph.all_edges())


def edge_measure(wg: WeightedGraphing, x: EdgeSet) -> Fraction:
    d = average_degree(wg)
    if d == 0:
        raise ValueError("edge measure is undefined on an edgeless graphing")
    return weighted_degree(wg, x) / d


def component_partition(wg: WeightedGraphing, x: EdgeSet) -> Partition:
    part = components(wg.graph, x)
    return Partition(wg.weights, part.labels)


def rho(wg: WeightedGraphing, x: EdgeSet) -> Fraction:
    """One minus the expected reciprocal size of the ``X``-component of a random node."""
    _require(wg, x)
    return 1 - psi(component_partition(wg, x))


def check_rho_eta_sandwich(wg: WeightedGraphing, x: EdgeSet) -> ViolationReport:
    """Check ``d/(1+D) eta(X) <= rho(X) <= d eta(X)``.

    ``d eta(X)`` is evaluated as the weighted degree sum so that the
    edgeless case needs no division.
    """
    report = ViolationReport(name="rho_eta_sandwich", checked=1)
    deg_mass = weighted_degree(wg, x)
    lower = deg_mass / (1 + wg.graph.degree_bound)
    value = rho(wg, x)
    if not lower <= value <= deg_mass:
        report.violations.append((x.mask, lower, value, deg_mass))
    return report


def subgraphing(wg: WeightedGraphing, f: EdgeSet) -> tuple[WeightedGraphing, list[int]]:
    """Restrict to the edges of ``f``; also return the old index of each kept edge.

    The degree bound of the parent is kept.
    """
    _require(wg, f)
    kept = list(f)
    g = FiniteGraph(wg.graph.node_count, tuple(wg.graph.edges[i] for i in kept),
                    wg.graph.degree_bound)
    return WeightedGraphing(g, wg.weights), kept


def lift_edge_set(sub: WeightedGraphing, kept: list[int], x: EdgeSet) -> EdgeSet:
    """Translate an edge set of the parent (contained in the kept edges) to ``sub``."""
    pos = {old: new for new, old in enumerate(kept)}
    try:
        return sub.graph.edge_set(pos[i] for i in x)
    except KeyError:
        raise ValueError("edge set is not contained in the subgraphing") from None


def random_weighted_graphing(n: int, rng: np.random.Generator, p: float = 0.4,
                             degree_bound: int | None = None) -> WeightedGraphing:
    """Random graph with random per-component masses."""
    g = random_graph(n, p, rng, degree_bound)
    k = components(g, g.all_edges()).class_count
    return WeightedGraphing.from_component_masses(g, [int(m) for m in rng.integers(1, 10, size=k)])
