"""Normalized cycle-matroid rank of graphs and graphings, with exact checkers
and a local sampling estimator for total rank."""

from cyclerank.graph_core import (
    EdgeSet, FiniteGraph, components, normalized_rank, rank, spanning_forest, total_rank_exact,
)
from cyclerank.partition_lab import Partition, WeightedSpace, join, meet, psi
from cyclerank.graphing_model import WeightedGraphing, edge_measure, rho
from cyclerank.local_access import LocalOracle, parse_family
from cyclerank.rank_estimator import estimate_total_rank, plan

__version__ = "0.1.0"
