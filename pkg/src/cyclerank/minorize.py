"""Measures on edges dominated by the normalized rank.

A minorizing measure assigns a nonnegative weight to each edge so that the
total weight of any edge set never exceeds its normalized rank.  Those with
full total weight play the role of matroid bases.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from cyclerank.graph_core import (
    DEFAULT_EXHAUSTIVE_LIMIT, EdgeSet, FiniteGraph, GraphMismatchError, _uf_labels,
    is_acyclic, normalized_rank, rank, rank_table,
)
from cyclerank.graphing_model import WeightedGraphing, average_degree, edge_measure, rho
from cyclerank.reports import PreconditionError, ViolationReport, parse_rational, rational_str


@dataclass(frozen=True)
class MinorizingMeasure:
    graph: FiniteGraph = field(repr=False)
    weights: tuple[Fraction, ...]

    def __post_init__(self):
        w = tuple(parse_rational(x) for x in self.weights)
        if len(w) != self.graph.edge_count:
            raise ValueError("one weight per edge required")
        if any(x < 0 for x in w):
            raise ValueError("weights must be nonnegative")
        object.__setattr__(self, "weights", w)

    def __call__(self, x: EdgeSet) -> Fraction:
        if x.graph != self.graph:
            raise GraphMismatchError("edge set does not belong to this graph")
        return sum((self.weights[i] for i in x), Fraction(0))

    @property
    def total(self) -> Fraction:
        return sum(self.weights, Fraction(0))

    def to_json(self) -> str:
        return json.dumps([rational_str(w) for w in self.weights])

    @classmethod
    def from_json(cls, graph: FiniteGraph, text: str) -> MinorizingMeasure:
        return cls(graph, tuple(parse_rational(w) for w in json.loads(text)))


def _check_order(g: FiniteGraph, order: Sequence[int]) -> list[int]:
    order = [int(i) for i in order]
    if sorted(order) != list(range(g.edge_count)):
        raise PreconditionError("chain order must be a permutation of the edge indices")
    return order


def greedy_minorizer(g: FiniteGraph, order: Sequence[int]) -> MinorizingMeasure:
    """Rank increments along the chain of prefixes of ``order``."""
    order = _check_order(g, order)
    w = [Fraction(0)] * g.edge_count
    mask = 0
    prev = 0
    for i in order:
        mask |= 1 << i
        cur = g.node_count - _uf_labels(g, mask).count
        w[i] = Fraction(cur - prev, g.node_count)
        prev = cur
    return MinorizingMeasure(g, tuple(w))


def forest_minorizer(g: FiniteGraph, f: EdgeSet) -> MinorizingMeasure:
    """Weight ``1/n`` on each edge of a spanning forest ``f``."""
    if f.graph != g:
        raise GraphMismatchError("edge set does not belong to this graph")
    if not is_acyclic(g, f):
        raise PreconditionError("forest contains a cycle")
    if rank(g, f) != rank(g, g.all_edges()):
        raise PreconditionError("forest does not span every component")
    unit = Fraction(1, g.node_count)
    return MinorizingMeasure(g, tuple(unit if i in f else Fraction(0) for i in range(g.edge_count)))


@dataclass
class MinorizingReport(ViolationReport):
    base: bool = False

    def to_dict(self, limit: int = 20) -> dict:
        out = super().to_dict(limit)
        out["base"] = self.base
        return out


def _subset_sums(weights: Sequence[int]) -> np.ndarray:
    m = len(weights)
    out = np.zeros(1 << m, dtype=object if max(weights, default=0) > 2 ** 40 else np.int64)
    for i, w in enumerate(weights):
        out[1 << i: 1 << (i + 1)] = out[: 1 << i] + w
    return out


def verify_minorizing(g: FiniteGraph, a: MinorizingMeasure, *,
                      exhaustive_limit: int = DEFAULT_EXHAUSTIVE_LIMIT, samples: int = 2000,
                      rng: np.random.Generator | None = None) -> MinorizingReport:
    """Check ``a(X) <= rho(X)`` over edge sets and whether ``a(E) = rho(E)``.

    Violations are ``(mask, a(X), rho(X))``.
    """
    if a.graph != g:
        raise GraphMismatchError("measure belongs to a different graph")
    report = MinorizingReport(name="minorizing")
    report.base = a.total == normalized_rank(g, g.all_edges())
    m, n = g.edge_count, g.node_count
    if m <= exhaustive_limit:
        scale = math.lcm(n, *(w.denominator for w in a.weights))
        ints = [int(w * scale) for w in a.weights]
        sums = _subset_sums(ints)
        ranks = rank_table(g) * (scale // n)
        bad = np.nonzero(sums > ranks)[0]
        report.checked = 1 << m
        for mask in bad:
            mask = int(mask)
            report.violations.append((mask, Fraction(int(sums[mask]), scale),
                                      Fraction(int(ranks[mask]), scale)))
        return report
    report.mode = "sampled"
    rng = rng if rng is not None else np.random.default_rng(0)
    for _ in range(samples):
        x = EdgeSet(g, int.from_bytes(rng.bytes((m + 7) // 8), "little") & ((1 << m) - 1))
        report.checked += 1
        lhs, rhs = a(x), normalized_rank(g, x)
        if lhs > rhs:
            report.violations.append((x.mask, lhs, rhs))
    return report


def is_extreme(g: FiniteGraph, a: MinorizingMeasure, max_edges: int = 12) -> bool:
    """Whether ``a`` is a vertex of ``{a >= 0, a(X) <= rho(X) for all X}``.

    Vertex test: the constraints tight at ``a`` must have full rank.
    """
    m = g.edge_count
    if m > max_edges:
        raise PreconditionError(f"extremality test limited to {max_edges} edges")
    if m == 0:
        return True
    n = g.node_count
    scale = math.lcm(n, *(w.denominator for w in a.weights))
    sums = _subset_sums([int(w * scale) for w in a.weights])
    ranks = rank_table(g) * (scale // n)
    if np.any(sums > ranks):
        return False
    rows = [[(mask >> i) & 1 for i in range(m)] for mask in np.nonzero(sums == ranks)[0][1:]]
    rows += [[int(j == i) for j in range(m)] for i in range(m) if a.weights[i] == 0]
    return bool(rows) and np.linalg.matrix_rank(np.array(rows, dtype=float)) == m


def forest_additivity_check(g: FiniteGraph, subsets: Sequence[EdgeSet]) -> ViolationReport:
    """On a forest, ``rho(U)`` must equal half the average degree times ``eta(U)``.

    With uniform node weights that product is ``|U|/n``; it is evaluated here
    through the edge measure so both sides are computed independently.
    """
    if g.edge_count == 0:
        raise PreconditionError("need at least one edge")
    if not is_acyclic(g, g.all_edges()):
        raise PreconditionError("graph is not a forest")
    wg = WeightedGraphing.uniform(g)
    half_d = average_degree(wg) / 2
    report = ViolationReport(name="forest_additivity")
    for u in subsets:
        report.checked += 1
        lhs, rhs = rho(wg, u), half_d * edge_measure(wg, u)
        if lhs != rhs:
            report.violations.append((u.mask, lhs, rhs))
    return report
