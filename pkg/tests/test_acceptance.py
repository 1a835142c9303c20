"""Acceptance gate: one test per criterion, summarized at the end of the run."""
import math
import time
from fractions import Fraction

import networkx as nx
import numpy as np
import pytest

from cyclerank import graph_core as gc
from cyclerank import graphing_model as gm
from cyclerank import local_access as la
from cyclerank import minorize as mz
from cyclerank import partition_lab as pl
from cyclerank import rank_estimator as re_
from cyclerank.graphing_model import WeightedGraphing
from cyclerank.partition_lab import Partition, WeightedSpace

criterion = pytest.mark.criterion


@criterion(1, "rank submodular and monotone, exhaustive on K4 and all graphs on <= 5 nodes")
def test_c01_submodularity(record_property):
    start = time.perf_counter()
    k5 = gc.complete_graph(5)
    table = gc.rank_table(k5)
    for mask in range(1 << k5.edge_count):
        h = nx.Graph()
        h.add_nodes_from(range(5))
        h.add_edges_from(k5.edges[i] for i in range(k5.edge_count) if mask >> i & 1)
        assert table[mask] == 5 - nx.number_connected_components(h)
    k4 = gc.check_submodular_exhaustive(gc.complete_graph(4))
    assert k4.ok and k4.mode == "exhaustive" and k4.checked == 4096
    graphs = pairs = violations = 0
    for n in range(1, 6):
        for g in gc.all_graphs(n):
            rep = gc.check_submodular_exhaustive(g)
            assert rep.mode == "exhaustive"
            graphs += 1
            pairs += rep.checked
            violations += len(rep.violations)
    elapsed = time.perf_counter() - start
    record_property("detail", f"{graphs} graphs, {pairs} pairs, {violations} violations, {elapsed:.1f}s")
    assert graphs == 1 + 2 + 8 + 64 + 1024
    assert violations == 0
    assert elapsed < 60


@criterion(2, "psi supermodular on 10^4 random triples, defect identity exact")
def test_c02_partition_supermodularity(record_property):
    rng = np.random.default_rng(2002)
    flagged_seen, min_slack = 0, None
    bad = []
    for _ in range(10_000):
        p, q, r = pl.random_triple(int(rng.integers(1, 13)), rng)
        res = pl.check_supermodular_triple(p, q, r)
        assert not res.preconditions
        flagged_seen += bool(p.flagged or q.flagged or r.flagged)
        min_slack = res.slack if min_slack is None else min(min_slack, res.slack)
        if res.slack < 0 or pl.weighted_defect(p, q, r) != res.slack:
            bad.append((p, q, r))
    record_property("detail", f"{len(bad)} failures, min slack {min_slack}, "
                              f"{flagged_seen} triples with flags")
    assert flagged_seen > 1000
    assert not bad


@criterion(3, "exact E[R] bias within 1/k in the stated direction per mode")
def test_c03_estimator_bias(record_property):
    oracles = {
        "C_100": la.finite_graph_oracle(gc.cycle_graph(100)),
        "50 triangles": la.finite_graph_oracle(gc.disjoint_triangles(150)),
    }
    checked = 0
    for name, o in oracles.items():
        rk = o.known_rank
        for eps in (0.5, 0.2, 0.1, 0.05, 0.01):
            k = re_.plan(eps).k
            low = re_.expected_estimate(o, k, "radius")
            high = re_.expected_estimate(o, k, "cap")
            assert 0 <= rk - low <= Fraction(1, k), (name, k, low)
            assert 0 <= high - rk <= Fraction(1, k), (name, k, high)
            checked += 2
    record_property("detail", f"{checked} (oracle, k, mode) cases")


@criterion(4, "eps = 0.2 failure fraction <= 0.285 over 200 seeded runs per family")
def test_c04_estimator_guarantee(record_property):
    start = time.perf_counter()
    p = re_.plan(0.2)
    bound = 0.2 + 3 * math.sqrt(0.2 * 0.8 / 200)
    fractions_seen = {}
    for spec in ("cycle:1000", "mixture:triangle@0.5,edge@0.5", "tree:3"):
        o = la.parse_family(spec)
        rk = float(o.known_rank)
        fails = sum(abs(re_.estimate_total_rank(o, p, seed=s).value - rk) >= 0.2
                    for s in range(200))
        fractions_seen[spec] = fails / 200
    elapsed = time.perf_counter() - start
    record_property("detail", ", ".join(f"{k}: {v:.3f}" for k, v in fractions_seen.items())
                    + f", {elapsed:.1f}s")
    assert la.parse_family("cycle:1000").known_rank == Fraction(999, 1000)
    assert la.parse_family("mixture:triangle@0.5,edge@0.5").known_rank == Fraction(7, 12)
    assert la.parse_family("tree:3").known_rank == 1
    assert all(f <= bound for f in fractions_seen.values())
    assert elapsed < 300


@criterion(5, "cycle ranks increase to 1, triangle sequence constant and matched by its limit")
def test_c05_convergence(record_property):
    p = re_.plan(0.2)
    rows = re_.convergence_table("cycle", [10, 100, 1000], p, seed=5)
    exact = [r.exact for r in rows]
    assert exact == [1 - Fraction(1, n) for n in (10, 100, 1000)]
    assert exact[0] < exact[1] < exact[2]
    assert abs(exact[2] - 1) <= Fraction(1, 1000)
    tri = re_.convergence_table("triangles", [3, 30, 300, 3000], p, seed=5)
    assert all(r.exact == Fraction(2, 3) for r in tri)
    limit = re_.estimate_total_rank(la.parse_family("mixture:triangle@1"), re_.plan(0.05), seed=5)
    gap = abs(limit.value - 2 / 3)
    record_property("detail", f"rk(C_1000) = {float(exact[2])}, mixture estimate gap {gap:.2e}")
    assert gap <= 0.05


@criterion(6, "forest additivity exact on 100 forests x 100 subsets")
def test_c06_forest_additivity(record_property):
    rng = np.random.default_rng(6006)
    forests = checked = 0
    while forests < 100:
        g = gc.random_forest(int(rng.integers(2, 51)), rng)
        if not g.edge_count:
            continue
        subsets = [gc.random_edge_set(g, rng) for _ in range(100)]
        rep = mz.forest_additivity_check(g, subsets)
        assert rep.ok, rep.violations[:3]
        for u in subsets[:5]:
            assert gc.normalized_rank(g, u) == Fraction(len(u), g.node_count)
        forests += 1
        checked += rep.checked
    record_property("detail", f"{checked} (forest, subset) pairs, 0 exceptions")


@criterion(7, "greedy and forest measures minorize exhaustively with full total")
def test_c07_minorizing(record_property):
    rng = np.random.default_rng(7007)
    graphs = measures = 0
    while graphs < 50:
        g = gc.random_graph(int(rng.integers(2, 9)), float(rng.uniform(0.2, 0.7)), rng)
        if not 1 <= g.edge_count <= 12:
            continue
        total = gc.normalized_rank(g, g.all_edges())
        for _ in range(10):
            order = [int(i) for i in rng.permutation(g.edge_count)]
            greedy = mz.greedy_minorizer(g, order)
            forest_edges = g.edge_set([i for i in range(g.edge_count) if greedy.weights[i]])
            forest = mz.forest_minorizer(g, forest_edges)
            for a in (greedy, forest):
                rep = mz.verify_minorizing(g, a)
                assert rep.mode == "exhaustive" and rep.ok and rep.base
                assert a.total == total
                measures += 1
        graphs += 1
    record_property("detail", f"{graphs} graphs, {measures} measures verified")


@criterion(8, "rho-eta sandwich on 10^4 random pairs, K3 lower bound tight")
def test_c08_sandwich(record_property):
    rng = np.random.default_rng(8008)
    violations = 0
    for _ in range(10_000):
        wg = gm.random_weighted_graphing(int(rng.integers(1, 10)), rng)
        violations += len(gm.check_rho_eta_sandwich(wg, gc.random_edge_set(wg.graph, rng)).violations)
    k3 = WeightedGraphing.uniform(gc.complete_graph(3))
    e = k3.graph.all_edges()
    lower = gm.average_degree(k3) / (1 + k3.graph.degree_bound) * gm.edge_measure(k3, e)
    record_property("detail", f"{violations} violations, K3: {lower} = {gm.rho(k3, e)}")
    assert violations == 0
    assert lower == gm.rho(k3, e) == Fraction(2, 3)


@criterion(9, "two color classes of the 5-regular tree sum to >= 4/3")
def test_c09_nonadditivity(record_property):
    rep = re_.nonadditivity_experiment(5, 3, re_.plan(0.1), seed=9)
    record_property("detail", f"rho(U) + rho(W) = {rep.sum}, full tree {rep.full_rank_est}")
    assert rep.lower_bound == Fraction(4, 3)
    assert rep.sum >= 4 / 3 and rep.holds
    assert rep.sum >= 1.9
    assert rep.full_rank_est == 1.0


@criterion(10, "re-randomizing property survives splits and joins; two-point example fails")
def test_c10_rerandomizing(record_property):
    rng = np.random.default_rng(1010)
    failures = 0
    for _ in range(10_000):
        space = pl.random_level_space(int(rng.integers(1, 11)), rng)
        p = pl.random_rerandomizing_partition(space, rng)
        q = pl.random_rerandomizing_partition(space, rng)
        assert pl.has_rerandomizing_property(p) and pl.has_rerandomizing_property(q)
        failures += not pl.has_rerandomizing_property(pl.split_finite_classes(p, rng))
        failures += not pl.has_rerandomizing_property(pl.join(p, q))
    joint = Partition.indiscrete(WeightedSpace((Fraction(1, 3), Fraction(2, 3))))
    law = pl.rerandomized_distribution(joint).probs
    record_property("detail", f"{failures} failures, two-point law {tuple(map(str, law))}")
    assert failures == 0
    assert not pl.has_rerandomizing_property(joint)
    assert law == (Fraction(1, 2), Fraction(1, 2))
