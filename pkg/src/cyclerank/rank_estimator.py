"""Sampling estimator for the total rank ``1 - E[1/|component of a random node|]``.

Each sample explores a bounded neighborhood of a random root.  In
``radius`` mode the term is ``1/|B_k(root)|``; in ``cap`` mode the
component is explored until ``k`` nodes are seen and the term is
``1/size`` for smaller components and 0 otherwise.  Either way the bias is
at most ``1/k <= eps/2``, and ``N`` samples push the sampling error below
``eps/2`` with probability ``1 - eps`` by Hoeffding's inequality.
"""
from __future__ import annotations

import csv
import io
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from cyclerank.local_access import (
    LocalOracle, ball, colored_tree_subgraph, component_capped, regular_tree, sized_family,
)
from cyclerank.reports import PreconditionError, rational_str

MODES = ("cap", "radius")


@dataclass(frozen=True)
class EstimatorPlan:
    epsilon: float
    k: int
    N: int
    mode: str = "cap"

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.k < 1 or self.N < 1:
            raise ValueError("k and N must be positive")


def _exact(epsilon: float) -> Fraction:
    return Fraction(repr(epsilon)) if isinstance(epsilon, float) else Fraction(epsilon)


def plan(epsilon: float, mode: str = "cap") -> EstimatorPlan:
    """``k = ceil(2/eps)`` and ``N = ceil(2/eps^2 * ln(2/eps))``."""
    if not 0 < epsilon < 1:
        raise ValueError("epsilon must lie in (0, 1)")
    eps = _exact(epsilon)
    k = math.ceil(2 / eps)
    n = math.ceil(2 / float(eps) ** 2 * math.log(2 / float(eps)))
    return EstimatorPlan(float(epsilon), k, n, mode)


@dataclass
class Estimate:
    value: float
    plan: EstimatorPlan
    seed: int
    inverse_size_mean: float
    queries: int
    wall_time: float
    family: str = ""
    exact: Fraction | None = None

    def to_dict(self) -> dict:
        """JSON payload; wall time is left out so output is reproducible."""
        out = {
            "family": self.family,
            "epsilon": fmt_float(self.plan.epsilon),
            "k": self.plan.k,
            "N": self.plan.N,
            "mode": self.plan.mode,
            "seed": self.seed,
            "estimate": fmt_float(self.value),
            "queries": self.queries,
        }
        if self.exact is not None:
            out["exact"] = rational_str(self.exact)
            out["abs_error"] = fmt_float(abs(self.value - float(self.exact)))
        return out


def fmt_float(x: float) -> float:
    """Round to 12 significant digits."""
    return float(f"{x:.12g}")


def sample_rng(seed: int, index: int) -> np.random.Generator:
    """Independent stream for sample ``index``; order of evaluation is irrelevant."""
    return np.random.default_rng(np.random.SeedSequence([seed, index]))


def sample_term(o: LocalOracle, root, k: int, mode: str) -> tuple[Fraction, int]:
    """Inverse-size term for one root and the adjacency queries it cost."""
    if mode == "radius":
        b = ball(o, root, k)
        return Fraction(1, b.size), b.queries
    c = component_capped(o, root, k)
    return (Fraction(0) if c.over_cap else Fraction(1, c.size)), c.queries


def _one_sample(o: LocalOracle, p: EstimatorPlan, seed: int, i: int) -> tuple[float, int]:
    root = o.sample_root(sample_rng(seed, i))
    term, q = sample_term(o, root, p.k, p.mode)
    return float(term), q


def estimate_total_rank(o: LocalOracle, p: EstimatorPlan, seed: int,
                        workers: int = 1) -> Estimate:
    start = time.perf_counter()
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(lambda i: _one_sample(o, p, seed, i), range(p.N)))
    else:
        results = [_one_sample(o, p, seed, i) for i in range(p.N)]
    mean = math.fsum(t for t, _ in results) / p.N
    return Estimate(
        value=1.0 - mean,
        plan=p,
        seed=seed,
        inverse_size_mean=mean,
        queries=sum(q for _, q in results),
        wall_time=time.perf_counter() - start,
        family=o.name,
        exact=o.known_rank,
    )


def expected_estimate(o: LocalOracle, k: int, mode: str) -> Fraction:
    """Exact ``E[R]`` by enumerating the oracle's finite root distribution."""
    dist = o.root_distribution()
    if dist is None:
        raise PreconditionError(f"{o.name} has no finite root distribution")
    return 1 - sum((prob * sample_term(o, root, k, mode)[0] for root, prob in dist), Fraction(0))


@dataclass
class ConvergenceRow:
    size: int
    exact: Fraction | None
    estimate: float
    queries: int

    @property
    def abs_error(self) -> float | None:
        return None if self.exact is None else abs(self.estimate - float(self.exact))

    def to_dict(self) -> dict:
        return {
            "size": self.size,
            "exact": None if self.exact is None else fmt_float(float(self.exact)),
            "estimate": fmt_float(self.estimate),
            "abs_error": None if self.abs_error is None else fmt_float(self.abs_error),
            "queries": self.queries,
        }


def convergence_table(family: str | Callable[[int], LocalOracle], sizes: Sequence[int],
                      p: EstimatorPlan, seed: int) -> list[ConvergenceRow]:
    """Exact total rank and an estimate for each member of a sized family."""
    build = (lambda n: sized_family(family, n)) if isinstance(family, str) else family
    rows = []
    for n in sizes:
        o = build(n)
        est = estimate_total_rank(o, p, seed)
        rows.append(ConvergenceRow(n, o.known_rank, est.value, est.queries))
    return rows


def table_csv(rows: Sequence[ConvergenceRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["size", "exact", "estimate", "abs_error", "queries"])
    for r in rows:
        w.writerow(["" if v is None else v for v in r.to_dict().values()])
    return buf.getvalue()


@dataclass
class NonAdditivityReport:
    degree: int
    r: int
    rho_U_est: float
    rho_W_est: float
    full_rank_est: float
    lower_bound: Fraction
    estimates: dict = field(default_factory=dict, repr=False)

    @property
    def sum(self) -> float:
        return self.rho_U_est + self.rho_W_est

    @property
    def holds(self) -> bool:
        """The two halves together exceed the bound, which exceeds the full rank 1."""
        return self.sum >= float(self.lower_bound) and self.lower_bound > 1

    def to_dict(self) -> dict:
        return {
            "degree": self.degree,
            "r": self.r,
            "rho_U_est": fmt_float(self.rho_U_est),
            "rho_W_est": fmt_float(self.rho_W_est),
            "sum": fmt_float(self.sum),
            "paper_bound": fmt_float(float(self.lower_bound)),
            "full_rank_est": fmt_float(self.full_rank_est),
            "holds": self.holds,
        }


def nonadditivity_experiment(degree: int, r: int | None, p: EstimatorPlan,
                             seed: int) -> NonAdditivityReport:
    """Estimate rank on the first ``r`` and the last ``D - r`` colors of the ``D``-regular tree."""
    if r is None:
        r = (degree + 1) // 2
    if degree != 2 * r - 1 or r < 3:
        raise PreconditionError("need D = 2r - 1 with r >= 3")
    u = colored_tree_subgraph(degree, range(1, r + 1))
    w = colored_tree_subgraph(degree, range(r + 1, degree + 1))
    est = {
        "U": estimate_total_rank(u, p, seed),
        "W": estimate_total_rank(w, p, seed + 1),
        "E": estimate_total_rank(regular_tree(degree), p, seed + 2),
    }
    return NonAdditivityReport(degree, r, est["U"].value, est["W"].value, est["E"].value,
                               Fraction(2) - Fraction(2, r), est)
