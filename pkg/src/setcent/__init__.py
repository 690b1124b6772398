"""Approximate maximization of set betweenness centrality with certified bounds."""

__version__ = "0.1.0"

from .bounds import BoundReport
from .engine import RunConfig, RunResult, bound_report, run
from .graph import Graph, parse_edge_list, read_edge_list, vertex_diameter_exact
from .greedy import GreedyResult, greedy_cover
from .rademacher import EraBound, RademacherState
from .sampler import Sample, sample_hyperedge

__all__ = [
    "BoundReport", "EraBound", "Graph", "GreedyResult", "RademacherState", "RunConfig",
    "RunResult", "Sample", "bound_report", "greedy_cover", "parse_edge_list",
    "read_edge_list", "run", "sample_hyperedge", "vertex_diameter_exact",
]
