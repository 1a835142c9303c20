from fractions import Fraction

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cyclerank import partition_lab as pl
from cyclerank.partition_lab import Partition, WeightedSpace
from cyclerank.reports import PreconditionError

U4 = WeightedSpace.uniform(4)
P = Partition.from_classes(U4, [[0, 1], [2, 3]])
Q = Partition.from_classes(U4, [[1, 2], [0], [3]])


def brute_join(p, q):
    """Connected components of the 'same class in p or q' graph."""
    h = nx.Graph()
    h.add_nodes_from(range(p.space.point_count))
    for part in (p, q):
        for members in part.classes:
            h.add_edges_from(zip(members, members[1:]))
    classes = [sorted(c) for c in nx.connected_components(h)]
    flags = [i for i, c in enumerate(classes)
             if any(p.is_flagged(x) or q.is_flagged(x) for x in c)]
    return Partition.from_classes(p.space, classes, flags)


@st.composite
def partitions(draw, n=None, flags=True):
    n = n if n is not None else draw(st.integers(1, 8))
    labels = draw(st.lists(st.integers(0, n - 1), min_size=n, max_size=n))
    flagged = draw(st.sets(st.sampled_from(sorted(set(labels))))) if flags else set()
    return Partition(WeightedSpace.uniform(n), labels, flagged)


@st.composite
def partition_pairs(draw, flags=True):
    n = draw(st.integers(1, 8))
    return draw(partitions(n, flags)), draw(partitions(n, flags))


def test_space_validation():
    with pytest.raises(ValueError):
        WeightedSpace((Fraction(1, 2), Fraction(1, 3)))
    with pytest.raises(ValueError):
        WeightedSpace((Fraction(3, 2), Fraction(-1, 2)))
    assert WeightedSpace.normalized([1, 2]).weights == (Fraction(1, 3), Fraction(2, 3))


def test_partition_canonical_form():
    a = Partition(U4, ["x", "y", "x", "z"], infinite=["y"])
    b = Partition.from_classes(U4, [[0, 2], [1], [3]], infinite=[1])
    assert a == b and a.labels == (0, 1, 0, 2)
    with pytest.raises(ValueError):
        Partition.from_classes(U4, [[0, 1], [1, 2, 3]])
    with pytest.raises(ValueError):
        Partition.from_classes(U4, [[0, 1]])


def test_psi_examples():
    assert pl.psi(P) == Fraction(1, 2)
    assert pl.psi(Partition.discrete(WeightedSpace.normalized([1, 2, 3]))) == 1
    assert pl.psi(Partition.indiscrete(U4, flagged=True)) == 0


@settings(max_examples=200, deadline=None)
@given(partitions())
def test_psi_uniform_counts_unflagged_classes(p):
    n = p.space.point_count
    unflagged = p.class_count - len(p.flagged)
    assert pl.psi(p) == Fraction(unflagged, n)
    assert 0 <= pl.psi(p) <= 1


def test_join_examples():
    assert pl.join(P, Q) == Partition.indiscrete(U4)
    assert pl.join(P, P) == P
    assert pl.join(P, Partition.discrete(U4)) == P


@settings(max_examples=200, deadline=None)
@given(partition_pairs())
def test_join_matches_graph_components(pq):
    p, q = pq
    j = pl.join(p, q)
    assert j == brute_join(p, q)
    assert p.refines(j) and q.refines(j)
    assert j == pl.join(q, p)


def test_meet_examples():
    assert pl.meet(P, Q) == Partition.discrete(U4)
    assert pl.meet(P, P) == P
    assert pl.meet(P, Partition.discrete(U4)) == Partition.discrete(U4)
    with pytest.raises(PreconditionError):
        pl.meet(Partition.indiscrete(U4, flagged=True), P)


@settings(max_examples=200, deadline=None)
@given(partition_pairs(flags=False))
def test_meet_is_pairwise_intersections(pq):
    p, q = pq
    m = pl.meet(p, q)
    expected = sorted(
        tuple(sorted(set(a) & set(b)))
        for a in p.classes for b in q.classes if set(a) & set(b)
    )
    assert sorted(m.classes) == expected
    assert m.refines(p) and m.refines(q)


def test_rerandomized_distribution_examples():
    s = WeightedSpace((Fraction(1, 3), Fraction(2, 3)))
    joint = Partition.indiscrete(s)
    assert pl.rerandomized_distribution(joint).probs == (Fraction(1, 2), Fraction(1, 2))
    assert not pl.has_rerandomizing_property(joint)
    assert pl.rerandomized_distribution(P).probs == U4.weights
    flagged = Partition(s, [0, 1], infinite=[0, 1])
    assert pl.rerandomized_distribution(flagged).probs == s.weights


def test_rerandomized_distribution_by_double_sum():
    rng = np.random.default_rng(5)
    for _ in range(200):
        space = pl.random_level_space(int(rng.integers(1, 9)), rng)
        p = pl.random_partition(space, rng)
        law = [Fraction(0)] * space.point_count
        for u in range(space.point_count):
            if p.is_flagged(u):
                law[u] += space.weights[u]
                continue
            mates = p.classes[p.labels[u]]
            for v in mates:
                law[v] += space.weights[u] / len(mates)
        assert pl.rerandomized_distribution(p).probs == tuple(law)


def test_has_rerandomizing_property_examples():
    assert pl.has_rerandomizing_property(P)
    s = WeightedSpace((Fraction(1, 4), Fraction(1, 4), Fraction(1, 2)))
    assert pl.has_rerandomizing_property(Partition.from_classes(s, [[0, 1], [2]]))
    assert not pl.has_rerandomizing_property(Partition.from_classes(s, [[0, 2], [1]]))
    assert pl.has_rerandomizing_property(Partition.from_classes(s, [[0, 2], [1]], infinite=[0]))


@settings(max_examples=200, deadline=None)
@given(partitions())
def test_uniform_spaces_always_rerandomize(p):
    assert pl.has_rerandomizing_property(p)


def test_rrand_zero_sum():
    assert pl.check_rrand_zero_sum(P, [0, 0, 0, 0])
    assert pl.check_rrand_zero_sum(P, [1, -1, 0, 0])
    with pytest.raises(PreconditionError):
        pl.check_rrand_zero_sum(P, [1, 0, 0, 0])
    flagged = Partition.from_classes(U4, [[0, 1], [2, 3]], infinite=[1])
    with pytest.raises(PreconditionError):
        pl.check_rrand_zero_sum(flagged, [0, 0, 1, -1])
    s = WeightedSpace((Fraction(1, 3), Fraction(2, 3)))
    with pytest.raises(PreconditionError):
        pl.check_rrand_zero_sum(Partition.indiscrete(s), [1, -1])


def test_rrand_zero_sum_random():
    rng = np.random.default_rng(9)
    for _ in range(300):
        space = pl.random_level_space(int(rng.integers(1, 10)), rng)
        p = pl.random_rerandomizing_partition(space, rng)
        f = [Fraction(0)] * space.point_count
        for c, members in enumerate(p.classes):
            if c in p.flagged:
                continue
            vals = [Fraction(int(v)) for v in rng.integers(-5, 6, size=len(members))]
            vals[-1] -= sum(vals)
            for x, v in zip(members, vals):
                f[x] = v
        assert pl.check_rrand_zero_sum(p, f)


def test_supermodular_example():
    res = pl.check_supermodular_triple(P, Q, Partition.discrete(U4))
    assert (res.psi_r, res.psi_join, res.psi_p, res.psi_q) == (1, Fraction(1, 4), Fraction(1, 2),
                                                              Fraction(3, 4))
    assert res.slack == 0 and res.ok
    same = pl.check_supermodular_triple(P, P, P)
    assert same.slack == 0


def test_supermodular_precondition_failures_are_distinct():
    res = pl.check_supermodular_triple(P, Q, P)
    assert res.preconditions == ["r does not refine q"]
    assert not res.violated and not res.ok
    s = WeightedSpace((Fraction(1, 3), Fraction(2, 3)))
    res = pl.check_supermodular_triple(Partition.indiscrete(s), Partition.discrete(s),
                                       Partition.discrete(s))
    assert "p lacks the re-randomizing property" in res.preconditions


def test_supermodular_random_triples():
    rng = np.random.default_rng(21)
    for _ in range(1000):
        p, q, r = pl.random_triple(int(rng.integers(1, 13)), rng)
        res = pl.check_supermodular_triple(p, q, r)
        assert not res.preconditions
        assert res.slack >= 0
        assert pl.weighted_defect(p, q, r) == res.slack


def test_defect_cases():
    s2 = WeightedSpace.uniform(2)
    d = Partition.discrete(s2)
    assert pl.defect(d, d, d, 0) == 0
    both = Partition.indiscrete(s2, flagged=True)
    assert pl.defect(d, both, d, 0) == 0
    s3 = WeightedSpace.uniform(3)
    p = Partition.from_classes(s3, [[0, 1], [2]], infinite=[1])
    q = Partition.from_classes(s3, [[0, 2], [1]])
    r = Partition.discrete(s3)
    assert pl.join(p, q).flagged
    assert pl.defect(p, q, r, 0) == 1 + 0 - Fraction(1, 2) - Fraction(1, 2) == 0


def test_refines_respects_flags():
    flagged = Partition.indiscrete(U4, flagged=True)
    assert P.refines(flagged)
    assert not flagged.refines(Partition.indiscrete(U4))
    assert Partition.discrete(U4).refines(P)
    assert not P.refines(Q)


def test_psi_is_antitone_under_coarsening():
    rng = np.random.default_rng(2)
    for _ in range(500):
        space = pl.random_level_space(int(rng.integers(1, 10)), rng)
        fine = pl.random_partition(space, rng)
        coarse = pl.random_coarsening(fine, rng)
        assert fine.refines(coarse)
        assert pl.psi(fine) >= pl.psi(coarse)


def test_split_and_join_keep_rerandomizing():
    rng = np.random.default_rng(4)
    for _ in range(500):
        space = pl.random_level_space(int(rng.integers(1, 11)), rng)
        p = pl.random_rerandomizing_partition(space, rng)
        q = pl.random_rerandomizing_partition(space, rng)
        assert pl.has_rerandomizing_property(p) and pl.has_rerandomizing_property(q)
        split = pl.split_finite_classes(p, rng)
        assert split.refines(p)
        assert pl.has_rerandomizing_property(split)
        assert pl.has_rerandomizing_property(pl.join(p, q))


def test_json_round_trip():
    p = Partition.from_classes(WeightedSpace.normalized([1, 1, 2]), [[0, 1], [2]], infinite=[1])
    data = p.to_dict()
    assert data == {"weights": ["1/4", "1/4", "1/2"], "classes": [[0, 1], [2]], "infinite": [1]}
    assert Partition.from_json(p.to_json()) == p
