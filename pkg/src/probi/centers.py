"""Center set for weighted deterministic points.

k-median++ style seeding (first center uniform, later ones drawn with
probability proportional to weight times distance to the chosen centers)
followed by Lloyd-style rounds that move every center to the approximate
1-median of its cluster.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyInputError, InvalidInputError
from .model import CenterSet, WeightedPoint, as_points, pairwise_distances
from .onemedian import WeiszfeldConfig, _one_median
from .rng import make_rng


@dataclass(frozen=True)
class CenterComputeConfig:
    k: int
    max_lloyd_iterations: int = 10
    restarts: int = 1
    rng_seed: int = 0
    weiszfeld: WeiszfeldConfig = field(default_factory=WeiszfeldConfig)

    def __post_init__(self):
        if self.k < 1:
            raise InvalidInputError("k must be >= 1")
        if self.max_lloyd_iterations < 1 or self.restarts < 1:
            raise InvalidInputError("max_lloyd_iterations and restarts must be >= 1")


def weighted_points(Y, weights=None) -> tuple[np.ndarray, np.ndarray]:
    """Split ``Y`` (WeightedPoints, or an array plus ``weights``) into arrays."""
    if weights is None and len(Y) and isinstance(Y[0], WeightedPoint):
        P = np.array([y.point for y in Y])
        w = np.array([y.weight for y in Y])
    else:
        if len(Y) == 0:
            raise EmptyInputError("no points given")
        P = as_points(Y)
        w = np.ones(P.shape[0]) if weights is None else np.asarray(weights, dtype=np.float64).reshape(-1)
    if P.size == 0:
        raise EmptyInputError("no points given")
    if w.shape[0] != P.shape[0] or np.any(w <= 0):
        raise InvalidInputError("weights must be positive, one per point")
    return P, w


def distinct_count(P: np.ndarray) -> int:
    return np.unique(P, axis=0).shape[0]


def d_sample(candidates: np.ndarray, scores: np.ndarray, k: int, rng, first=None) -> list[int]:
    """Indices of up to ``k`` seeds drawn by score-weighted distance sampling.

    The first index is uniform over the candidates (or ``first`` if given);
    each further one is drawn with probability proportional to
    ``score * distance to the nearest chosen seed``.  Stops early once that
    mass is zero everywhere.
    """
    n = candidates.shape[0]
    if n == 0:
        raise EmptyInputError("no candidates to seed from")
    chosen = [int(rng.integers(n)) if first is None else int(first)]
    nearest = pairwise_distances(candidates, candidates[chosen[-1]][None, :])[:, 0]
    while len(chosen) < k:
        mass = scores * nearest
        cum = np.cumsum(mass)
        total = cum[-1]
        if not total > 0:
            break
        i = int(np.searchsorted(cum, rng.random() * total, side="right"))
        i = min(i, n - 1)
        while mass[i] <= 0:  # float edge at the top end of the cumulative sum
            i -= 1
        chosen.append(i)
        np.minimum(nearest, pairwise_distances(candidates, candidates[i][None, :])[:, 0], out=nearest)
    return chosen


def kmedianpp_seed(Y, k: int, rng, weights=None, first_index=None) -> CenterSet:
    P, w = weighted_points(Y, weights)
    if k < 1:
        raise InvalidInputError("k must be >= 1")
    idx = d_sample(P, w, k, make_rng(rng), first_index)
    return CenterSet(P[idx].copy(), requested_k=k)


def _update_cluster(P, w, members, old_center, old_cost, wcfg):
    res = _one_median(P[members], w[members], wcfg)
    if res.cost <= old_cost:
        return res.point
    return old_center


def _lloyd(P, w, centers, cfg, trajectory=None):
    centers = np.array(centers, dtype=np.float64)
    if trajectory is not None:
        trajectory.append(centers.copy())
    prev = None
    rounds = 0
    while True:
        D = pairwise_distances(P, centers)
        labels = np.argmin(D, axis=1)
        if prev is not None and np.array_equal(labels, prev):
            break
        if rounds >= cfg.max_lloyd_iterations:
            break
        new = centers.copy()
        for j in range(centers.shape[0]):
            members = labels == j
            if not members.any():
                continue
            old_cost = float(D[members, j] @ w[members])
            new[j] = _update_cluster(P, w, members, centers[j], old_cost, cfg.weiszfeld)
        centers = new
        prev = labels
        rounds += 1
        if trajectory is not None:
            trajectory.append(centers.copy())
    return centers, rounds, kmedian_cost(P, w, centers)


def lloyd_median_iterate(Y, C, cfg: CenterComputeConfig, weights=None, trajectory: list | None = None) -> CenterSet:
    """Alternate nearest-center assignment and per-cluster 1-median updates.

    Stops when no point changes cluster or after ``max_lloyd_iterations``
    update rounds.  Empty clusters keep their center, and a center only
    moves when the new point is no more expensive for its cluster, so the
    cost never increases.  If ``trajectory`` is a list, the initial centers
    and the centers after every round are appended to it.
    """
    P, w = weighted_points(Y, weights)
    start = C.centers if isinstance(C, CenterSet) else as_points(C)
    centers, _, _ = _lloyd(P, w, start, cfg, trajectory)
    return CenterSet(centers, requested_k=C.requested_k if isinstance(C, CenterSet) else None)


def kmedian_cost(P, w, C) -> float:
    C = C.centers if isinstance(C, CenterSet) else as_points(C)
    return float(w @ pairwise_distances(P, C).min(axis=1))


def compute_center_set(Y, cfg: CenterComputeConfig, weights=None, trajectories: list | None = None) -> CenterSet:
    """Best of ``cfg.restarts`` seed-and-iterate trials by weighted k-median cost.

    ``k`` is clamped to the number of distinct points; the result then
    reports the requested value in ``requested_k``.  Trial ``t`` draws from
    the stream seeded with ``rng_seed + t``.
    """
    P, w = weighted_points(Y, weights)
    k = min(cfg.k, distinct_count(P))
    best, best_cost = None, np.inf
    for t in range(cfg.restarts):
        rng = make_rng(cfg.rng_seed + t)
        idx = d_sample(P, w, k, rng)
        traj = [] if trajectories is not None else None
        centers, _, cost = _lloyd(P, w, P[idx], cfg, traj)
        if trajectories is not None:
            trajectories.append(traj)
        if cost < best_cost:
            best, best_cost = centers, cost
    return CenterSet(best, requested_k=cfg.k)
