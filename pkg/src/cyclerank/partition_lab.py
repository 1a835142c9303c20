"""Partitions of finite weighted spaces and the expected reciprocal class size.

A class may be *flagged* as infinite.  Flagged classes stand in for the
infinite classes of a partition of a continuum: they contribute nothing to
:func:`psi` and re-randomization leaves their points in place.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Hashable, Iterable, Sequence

import numpy as np

from cyclerank.reports import PreconditionError, parse_rational, rational_str


@dataclass(frozen=True)
class WeightedSpace:
    """Finite probability space on points ``0 .. point_count-1``."""

    weights: tuple[Fraction, ...]

    def __post_init__(self):
        w = tuple(parse_rational(x) for x in self.weights)
        if not w:
            raise ValueError("space must have at least one point")
        if any(x < 0 for x in w):
            raise ValueError("weights must be nonnegative")
        if sum(w) != 1:
            raise ValueError(f"weights sum to {sum(w)}, not 1")
        object.__setattr__(self, "weights", w)

    @property
    def point_count(self) -> int:
        return len(self.weights)

    @property
    def is_uniform(self) -> bool:
        return len(set(self.weights)) == 1

    @staticmethod
    @lru_cache(maxsize=64)
    def uniform(n: int) -> WeightedSpace:
        return WeightedSpace((Fraction(1, n),) * n)

    @classmethod
    def normalized(cls, masses: Sequence) -> WeightedSpace:
        masses = [parse_rational(m) for m in masses]
        total = sum(masses)
        return cls(tuple(m / total for m in masses))


class Partition:
    """Partition of a :class:`WeightedSpace`, given by a class label per point.

    Labels are canonicalized to ``0, 1, ...`` in order of first appearance,
    so two partitions with the same classes and flags compare equal.
    ``infinite`` lists the (original) labels of the classes flagged infinite.
    """

    __slots__ = ("space", "labels", "flagged", "_sizes", "_classes")

    def __init__(self, space: WeightedSpace, labels: Sequence[Hashable],
                 infinite: Iterable[Hashable] = ()):
        if len(labels) != space.point_count:
            raise ValueError("one label per point required")
        remap: dict = {}
        canon = []
        for lab in labels:
            if lab not in remap:
                remap[lab] = len(remap)
            canon.append(remap[lab])
        flagged = set()
        for lab in infinite:
            if lab not in remap:
                raise ValueError(f"flagged label {lab!r} is not a class")
            flagged.add(remap[lab])
        self.space = space
        self.labels = tuple(canon)
        self.flagged = frozenset(flagged)
        sizes = [0] * len(remap)
        for c in canon:
            sizes[c] += 1
        self._sizes = tuple(sizes)
        self._classes = None

    @classmethod
    def from_classes(cls, space: WeightedSpace, classes: Sequence[Iterable[int]],
                     infinite: Iterable[int] = ()) -> Partition:
        labels = [None] * space.point_count
        for c, members in enumerate(classes):
            for x in members:
                if labels[x] is not None:
                    raise ValueError(f"point {x} appears in two classes")
                labels[x] = c
        if any(lab is None for lab in labels):
            raise ValueError("classes do not cover the space")
        return cls(space, labels, infinite)

    @classmethod
    def discrete(cls, space: WeightedSpace) -> Partition:
        return cls(space, range(space.point_count))

    @classmethod
    def indiscrete(cls, space: WeightedSpace, flagged: bool = False) -> Partition:
        return cls(space, [0] * space.point_count, [0] if flagged else [])

    @property
    def class_count(self) -> int:
        return len(self._sizes)

    @property
    def class_sizes(self) -> tuple[int, ...]:
        return self._sizes

    @property
    def classes(self) -> tuple[tuple[int, ...], ...]:
        if self._classes is None:
            out: list[list[int]] = [[] for _ in self._sizes]
            for x, c in enumerate(self.labels):
                out[c].append(x)
            self._classes = tuple(tuple(c) for c in out)
        return self._classes

    def is_flagged(self, x: int) -> bool:
        return self.labels[x] in self.flagged

    def class_size(self, x: int) -> int:
        return self._sizes[self.labels[x]]

    def inverse_size(self, x: int) -> Fraction:
        """``1/|P_x|``, taken as 0 on flagged classes."""
        if self.is_flagged(x):
            return Fraction(0)
        return Fraction(1, self._sizes[self.labels[x]])

    def refines(self, other: Partition) -> bool:
        """True if every class lies inside a class of ``other``.

        A flagged class may only sit inside a flagged class.
        """
        _same_space(self, other)
        host: dict[int, int] = {}
        for a, b in zip(self.labels, other.labels):
            if host.setdefault(a, b) != b:
                return False
        return all(host[a] in other.flagged for a in self.flagged)

    def __eq__(self, other):
        if not isinstance(other, Partition):
            return NotImplemented
        return (self.space == other.space and self.labels == other.labels
                and self.flagged == other.flagged)

    def __hash__(self):
        return hash((self.labels, self.flagged))

    def __repr__(self):
        parts = []
        for c, members in enumerate(self.classes):
            s = "{" + ",".join(map(str, members)) + "}"
            parts.append(s + "*" if c in self.flagged else s)
        return f"Partition({' '.join(parts)})"

    def to_dict(self) -> dict:
        return {
            "weights": [rational_str(w) for w in self.space.weights],
            "classes": [list(c) for c in self.classes],
            "infinite": sorted(self.flagged),
        }

    @classmethod
    def from_dict(cls, data: dict) -> Partition:
        space = WeightedSpace(tuple(parse_rational(w) for w in data["weights"]))
        return cls.from_classes(space, data["classes"], data.get("infinite", ()))

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> Partition:
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class Distribution:
    space: WeightedSpace = field(repr=False)
    probs: tuple[Fraction, ...]

    def __post_init__(self):
        if len(self.probs) != self.space.point_count:
            raise ValueError("one probability per point required")
        if any(p < 0 for p in self.probs) or sum(self.probs) != 1:
            raise ValueError("not a probability distribution")


def _same_space(p: Partition, q: Partition) -> None:
    if p.space != q.space:
        raise PreconditionError("partitions live on different spaces")


def psi(p: Partition) -> Fraction:
    """Expected reciprocal size of the class of a random point."""
    w = p.space.weights
    sizes = p.class_sizes
    total = Fraction(0)
    for x, c in enumerate(p.labels):
        if c not in p.flagged and w[x]:
            total += w[x] / sizes[c]
    return total


def join(p: Partition, q: Partition) -> Partition:
    """Finest partition coarser than both; flagged where a flagged class was merged in."""
    _same_space(p, q)
    n = p.space.point_count
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for part in (p, q):
        first: dict[int, int] = {}
        for x, c in enumerate(part.labels):
            y = first.setdefault(c, x)
            if y != x:
                rx, ry = find(x), find(y)
                if rx != ry:
                    parent[rx] = ry
    roots = [find(x) for x in range(n)]
    flagged = {roots[x] for x in range(n) if p.is_flagged(x) or q.is_flagged(x)}
    return Partition(p.space, roots, flagged)


def meet(p: Partition, q: Partition) -> Partition:
    """Nonempty pairwise intersections of classes; flagged inputs are rejected."""
    _same_space(p, q)
    if p.flagged or q.flagged:
        raise PreconditionError("meet is undefined for partitions with infinite classes")
    return Partition(p.space, list(zip(p.labels, q.labels)))


def rerandomized_distribution(p: Partition) -> Distribution:
    """Law of a point resampled uniformly within the class of a random point."""
    w = p.space.weights
    mass = [Fraction(0)] * p.class_count
    for x, c in enumerate(p.labels):
        mass[c] += w[x]
    probs = tuple(
        w[x] if c in p.flagged else mass[c] / p.class_sizes[c]
        for x, c in enumerate(p.labels)
    )
    return Distribution(p.space, probs)


def has_rerandomizing_property(p: Partition) -> bool:
    by_fixpoint = rerandomized_distribution(p).probs == p.space.weights
    w = p.space.weights
    level: dict[int, Fraction] = {}
    by_constancy = True
    for x, c in enumerate(p.labels):
        if c not in p.flagged and level.setdefault(c, w[x]) != w[x]:
            by_constancy = False
            break
    if by_fixpoint != by_constancy:
        raise AssertionError(f"re-randomization criteria disagree on {p!r}")
    return by_fixpoint


def check_rrand_zero_sum(p: Partition, f: Sequence) -> bool:
    """Whether ``E f = 0`` for ``f`` summing to zero on each finite class."""
    f = [parse_rational(v) for v in f]
    if len(f) != p.space.point_count:
        raise PreconditionError("one value per point required")
    if not has_rerandomizing_property(p):
        raise PreconditionError("partition lacks the re-randomizing property")
    sums = [Fraction(0)] * p.class_count
    for x, c in enumerate(p.labels):
        if c in p.flagged and f[x] != 0:
            raise PreconditionError(f"f is nonzero on flagged point {x}")
        sums[c] += f[x]
    bad = [c for c, s in enumerate(sums) if s != 0 and c not in p.flagged]
    if bad:
        raise PreconditionError(f"f does not sum to zero on classes {bad}")
    return sum(wx * fx for wx, fx in zip(p.space.weights, f)) == 0


@dataclass
class SupermodularCheck:
    """Outcome of one supermodularity check on a triple ``(p, q, r)``."""

    psi_p: Fraction
    psi_q: Fraction
    psi_r: Fraction
    psi_join: Fraction
    slack: Fraction
    preconditions: list[str] = field(default_factory=list)

    @property
    def violated(self) -> bool:
        return not self.preconditions and self.slack < 0

    @property
    def ok(self) -> bool:
        return not self.preconditions and self.slack >= 0

    def to_dict(self) -> dict:
        return {
            "psi_p": rational_str(self.psi_p),
            "psi_q": rational_str(self.psi_q),
            "psi_r": rational_str(self.psi_r),
            "psi_join": rational_str(self.psi_join),
            "slack": rational_str(self.slack),
            "precondition_failures": list(self.preconditions),
            "violated": self.violated,
        }


def check_supermodular_triple(p: Partition, q: Partition, r: Partition) -> SupermodularCheck:
    """Check ``psi(r) + psi(p v q) >= psi(p) + psi(q)`` for a common refinement ``r``."""
    _same_space(p, q)
    _same_space(p, r)
    pre = []
    if not r.refines(p):
        pre.append("r does not refine p")
    if not r.refines(q):
        pre.append("r does not refine q")
    for name, part in (("p", p), ("q", q), ("r", r)):
        if not has_rerandomizing_property(part):
            pre.append(f"{name} lacks the re-randomizing property")
    j = join(p, q)
    vals = psi(p), psi(q), psi(r), psi(j)
    return SupermodularCheck(*vals, slack=vals[2] + vals[3] - vals[0] - vals[1],
                             preconditions=pre)


def defect(p: Partition, q: Partition, r: Partition, x: int,
           joined: Partition | None = None) -> Fraction:
    """Pointwise summand of the supermodularity slack at point ``x``."""
    j = joined if joined is not None else join(p, q)
    return r.inverse_size(x) + j.inverse_size(x) - p.inverse_size(x) - q.inverse_size(x)


def weighted_defect(p: Partition, q: Partition, r: Partition) -> Fraction:
    j = join(p, q)
    w = p.space.weights
    return sum((w[x] * defect(p, q, r, x, j) for x in range(p.space.point_count)),
               Fraction(0))


# -- random instances --------------------------------------------------------

def random_partition(space: WeightedSpace, rng: np.random.Generator,
                     flag_prob: float = 0.2, class_p: float = 0.35) -> Partition:
    """Geometric number of classes, points assigned uniformly, classes flagged at random."""
    n = space.point_count
    k = min(n, int(rng.geometric(class_p)))
    labels = [int(c) for c in rng.integers(k, size=n)]
    flags = [c for c in set(labels) if rng.random() < flag_prob]
    return Partition(space, labels, flags)


def random_coarsening(p: Partition, rng: np.random.Generator,
                      flag_prob: float = 0.2, class_p: float = 0.35) -> Partition:
    """Merge classes of ``p`` at random; flags are inherited and added at random."""
    k = min(p.class_count, int(rng.geometric(class_p)))
    group = [int(g) for g in rng.integers(k, size=p.class_count)]
    flags = {group[c] for c in p.flagged}
    flags |= {g for g in set(group) if rng.random() < flag_prob}
    return Partition(p.space, [group[c] for c in p.labels], flags)


def random_triple(n: int, rng: np.random.Generator,
                  flag_prob: float = 0.2) -> tuple[Partition, Partition, Partition]:
    """``(p, q, r)`` on the uniform ``n``-point space with ``r`` refining both."""
    space = WeightedSpace.uniform(n)
    r = random_partition(space, rng, flag_prob, class_p=0.15)
    return random_coarsening(r, rng, flag_prob), random_coarsening(r, rng, flag_prob), r


def random_level_space(n: int, rng: np.random.Generator, levels: int = 3) -> WeightedSpace:
    """Space whose weights take a few distinct values."""
    heights = [int(h) for h in rng.integers(1, 6, size=levels)]
    return WeightedSpace.normalized([heights[int(i)] for i in rng.integers(levels, size=n)])


def random_rerandomizing_partition(space: WeightedSpace, rng: np.random.Generator,
                                   flag_prob: float = 0.2) -> Partition:
    """Random partition with every weight-inhomogeneous class flagged."""
    p = random_partition(space, rng, flag_prob)
    w = space.weights
    extra = [c for c, members in enumerate(p.classes)
             if len({w[x] for x in members}) > 1]
    return Partition(space, p.labels, set(p.flagged) | set(extra))


def split_finite_classes(p: Partition, rng: np.random.Generator) -> Partition:
    """Split each unflagged class into random pieces; flagged classes are kept."""
    labels = []
    for x, c in enumerate(p.labels):
        if c in p.flagged:
            labels.append((c, -1))
        else:
            labels.append((c, int(rng.integers(p.class_size(x)))))
    return Partition(p.space, labels, [(c, -1) for c in p.flagged])
