"""P-LLOYD++: Lloyd-style solver for the assigned probabilistic k-median problem.

Seeds are realization points drawn by total realization score times
distance to the chosen seeds.  Each round assigns whole nodes to their
expected nearest center and moves every center to the approximate 1-median
of the pooled realizations of its nodes.  The pooled objective equals the
cluster's expected cost, so accepting a move only when it does not raise
that cost keeps every round monotone.

Works the same on raw nodes and on summaries: costs and scores use the
effective node weights of the :class:`NodeSet`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .centers import d_sample
from .errors import EmptyInputError, InvalidInputError
from .model import CenterSet, NodeSet, as_points
from .onemedian import WeiszfeldConfig, _one_median
from .rng import make_rng


@dataclass(frozen=True)
class SolverConfig:
    k: int
    max_iterations: int = 10
    restarts: int = 1
    rng_seed: int = 0
    weiszfeld: WeiszfeldConfig = field(default_factory=WeiszfeldConfig)

    def __post_init__(self):
        if self.k < 1:
            raise InvalidInputError("k must be >= 1")
        if self.max_iterations < 1 or self.restarts < 1:
            raise InvalidInputError("max_iterations and restarts must be >= 1")


class Solution(NamedTuple):
    centers: CenterSet
    cost: float


def _node_set(nodes) -> NodeSet:
    try:
        return NodeSet.from_any(nodes)
    except EmptyInputError:
        raise
    except TypeError as exc:
        raise InvalidInputError(f"cannot interpret nodes: {exc}") from exc


def realization_candidates(ns: NodeSet) -> tuple[np.ndarray, np.ndarray]:
    """Distinct realization points (first-appearance order) and their total scores."""
    _, first, inverse = np.unique(ns.points, axis=0, return_index=True, return_inverse=True)
    inverse = inverse.reshape(-1)
    order = np.argsort(first, kind="stable")
    rank = np.empty_like(order)
    rank[order] = np.arange(order.shape[0])
    scores = np.bincount(rank[inverse], weights=ns.realization_weights(), minlength=order.shape[0])
    return ns.points[first[order]], scores


def plloyd_seed(nodes, k: int, rng, first_index=None) -> CenterSet:
    ns = _node_set(nodes)
    if k < 1:
        raise InvalidInputError("k must be >= 1")
    cand, scores = realization_candidates(ns)
    idx = d_sample(cand, scores, k, make_rng(rng), first_index)
    return CenterSet(cand[idx].copy(), requested_k=k)


def _iterate(ns: NodeSet, centers, cfg: SolverConfig, trajectory=None):
    centers = np.array(centers, dtype=np.float64)
    if trajectory is not None:
        trajectory.append(centers.copy())
    owner = ns.owner
    wr = ns.realization_weights()
    prev = None
    rounds = 0
    best, best_cost = centers, np.inf
    while True:
        M = ns.cost_matrix(centers)
        labels = np.argmin(M, axis=1)
        cost = float(ns.weights @ M[np.arange(M.shape[0]), labels])
        if cost <= best_cost:
            best, best_cost = centers, cost
        if prev is not None and np.array_equal(labels, prev):
            break
        if rounds >= cfg.max_iterations:
            break
        new = centers.copy()
        order = np.argsort(labels[owner], kind="stable")
        bounds = np.searchsorted(labels[owner][order], np.arange(centers.shape[0] + 1))
        for j in range(centers.shape[0]):
            if bounds[j] == bounds[j + 1]:
                continue
            rows = order[bounds[j]:bounds[j + 1]]
            members = labels == j
            res = _one_median(ns.points[rows], wr[rows], cfg.weiszfeld)
            if res.cost <= float(ns.weights[members] @ M[members, j]):
                new[j] = res.point
        centers = new
        prev = labels
        rounds += 1
        if trajectory is not None:
            trajectory.append(centers.copy())
    return best, best_cost


def plloyd_iterate(nodes, C, cfg: SolverConfig, trajectory: list | None = None) -> CenterSet:
    """Expected-nearest assignment alternated with pooled 1-median updates.

    Stops on a stable assignment or after ``cfg.max_iterations`` rounds and
    returns the cheapest center set seen.
    """
    ns = _node_set(nodes)
    start = C.centers if isinstance(C, CenterSet) else as_points(C)
    best, _ = _iterate(ns, start, cfg, trajectory)
    return CenterSet(best, requested_k=C.requested_k if isinstance(C, CenterSet) else None)


def solve(nodes, cfg: SolverConfig, trajectories: list | None = None) -> Solution:
    """Best of ``cfg.restarts`` seed-and-iterate trials; trial ``t`` uses seed ``rng_seed + t``."""
    ns = _node_set(nodes)
    cand, scores = realization_candidates(ns)
    best, best_cost = None, np.inf
    for t in range(cfg.restarts):
        rng = make_rng(cfg.rng_seed + t)
        idx = d_sample(cand, scores, cfg.k, rng)
        traj = [] if trajectories is not None else None
        centers, cost = _iterate(ns, cand[idx], cfg, traj)
        if trajectories is not None:
            trajectories.append(traj)
        if cost < best_cost:
            best, best_cost = centers, cost
    return Solution(CenterSet(best, requested_k=cfg.k), best_cost)
