"""Streaming coresets and a Lloyd-style solver for probabilistic Euclidean k-median."""

from .centers import CenterComputeConfig, compute_center_set, kmedianpp_seed, lloyd_median_iterate
from .coreset import BucketKey, Coreset, CoresetConfig, compute_coreset
from .errors import ProbiError
from .eval import EvalReport, RunStatistics, aggregate, evaluate
from .model import (
    CenterSet,
    CoresetNode,
    NodeSet,
    ProbabilisticNode,
    Realization,
    WeightedPoint,
    assign_expected_nearest,
    euclidean_distance,
    expected_clustering_cost,
    expected_node_cost,
    node_center_of_gravity,
    node_spread,
)
from .onemedian import WeiszfeldConfig, approximate_one_median, best_support_point, node_one_median
from .solver import SolverConfig, plloyd_iterate, plloyd_seed, solve
from .stream import StreamConfig, StreamState, finalize, push_node, stream_coreset

__version__ = "0.1.0"
