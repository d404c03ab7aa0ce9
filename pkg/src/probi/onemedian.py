"""Weighted geometric median (1-median) approximation.

Weiszfeld's fixed-point iteration started at the weighted center of gravity,
stopped by a step-ratio rule and an iteration cap.  When an iterate lands on
a support point (where the recurrence is undefined) the best support point
is used instead, which is a 2-approximation of the 1-median.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.spatial.distance import cdist

from .errors import CoincidentIterate, DimensionTooLargeError, EmptySupportError, InvalidInputError
from .model import NodeSet, ProbabilisticNode, WeightedPoint, as_point, as_points


@dataclass(frozen=True)
class WeiszfeldConfig:
    max_iterations: int = 15
    ratio_threshold: float = 0.1
    coincidence_epsilon: float = 1e-12
    # supports larger than this skip the O(m^2) comparison against the best
    # support point, and the fallback only scans this many nearest candidates
    support_check_limit: int = 1024

    def __post_init__(self):
        if self.max_iterations < 1:
            raise InvalidInputError("max_iterations must be >= 1")
        if not self.ratio_threshold > 0:
            raise InvalidInputError("ratio_threshold must be > 0")
        if not self.coincidence_epsilon > 0:
            raise InvalidInputError("coincidence_epsilon must be > 0")
        if self.support_check_limit < 1:
            raise InvalidInputError("support_check_limit must be >= 1")


DEFAULT_WEISZFELD = WeiszfeldConfig()


class OneMedian(NamedTuple):
    point: np.ndarray
    iterations: int
    fallback: bool
    cost: float


def _support(points, weights):
    X = np.asarray(points, dtype=np.float64)
    if X.size == 0:
        raise EmptySupportError("support is empty")
    X = as_points(X)
    if weights is None:
        w = np.ones(X.shape[0])
    else:
        w = np.asarray(weights, dtype=np.float64).reshape(-1)
        if w.shape[0] != X.shape[0]:
            raise InvalidInputError("one weight per support point required")
        if np.any(~np.isfinite(w)) or np.any(w <= 0):
            raise InvalidInputError("support weights must be positive")
    return X, w


def weighted_cost(points, weights, y) -> float:
    """``sum_j w_j * ||x_j - y||``."""
    X, w = _support(points, weights)
    return float(w @ np.sqrt(np.sum((X - as_point(y)) ** 2, axis=1)))


def weiszfeld_step(points, weights, y, eps: float = DEFAULT_WEISZFELD.coincidence_epsilon) -> np.ndarray:
    """One Weiszfeld update from ``y``.

    Raises :class:`CoincidentIterate` if ``y`` is within ``eps`` of a support
    point.
    """
    X, w = _support(points, weights)
    y = as_point(y, X.shape[1])
    d = np.sqrt(np.sum((X - y) ** 2, axis=1))
    j = int(np.argmin(d))
    if d[j] < eps:
        raise CoincidentIterate(j)
    coef = w / d
    return (coef @ X) / coef.sum()


def best_support_point(points, weights=None) -> np.ndarray:
    """The support point of least weighted distance sum (first on ties)."""
    X, w = _support(points, weights)
    return X[_best_support_index(X, w)].copy()


def _best_support_index(X, w, candidates=None, chunk=1024) -> int:
    cand = np.arange(X.shape[0]) if candidates is None else np.asarray(candidates)
    best_i, best_c = -1, np.inf
    for lo in range(0, cand.shape[0], chunk):
        idx = cand[lo:lo + chunk]
        costs = cdist(X[idx], X) @ w
        i = int(np.argmin(costs))
        if costs[i] < best_c:
            best_i, best_c = int(idx[i]), float(costs[i])
    return best_i


def _exact_best_support(X, w, limit, near=None) -> tuple[int, float]:
    if X.shape[0] <= limit:
        i = _best_support_index(X, w)
    else:
        ref = X.mean(axis=0) if near is None else near
        dref = np.sum((X - ref) ** 2, axis=1)
        cand = np.sort(np.argpartition(dref, limit - 1)[:limit])
        i = _best_support_index(X, w, cand)
    return i, float(w @ np.sqrt(np.sum((X - X[i]) ** 2, axis=1)))


def approximate_one_median(points, weights=None, cfg: WeiszfeldConfig = DEFAULT_WEISZFELD) -> OneMedian:
    """Approximate weighted 1-median of ``points``.

    Starts at the weighted center of gravity.  The first two Weiszfeld steps
    are always taken; afterwards iteration continues only while the latest
    step is at most ``ratio_threshold`` times the previous one and fewer than
    ``max_iterations`` steps were made.  A step shorter than
    ``coincidence_epsilon`` counts as converged.  The lowest-cost iterate
    seen is returned, and it is replaced by the best support point whenever
    that one is cheaper.
    """
    X, w = _support(points, weights)
    return _one_median(X, w, cfg)


def _one_median(X: np.ndarray, w: np.ndarray, cfg: WeiszfeldConfig) -> OneMedian:
    eps = cfg.coincidence_epsilon
    if np.all(X == X[0]):
        return OneMedian(X[0].copy(), 0, False, 0.0)

    y = (w @ X) / w.sum()
    best_y, best_c = y, np.inf
    steps: list[float] = []
    iterations = 0
    converged = False
    fallback = False
    while True:
        diff = X - y
        d = np.sqrt(np.einsum("ij,ij->i", diff, diff))
        c = float(w @ d)
        if c < best_c:
            best_y, best_c = y, c
        if converged or iterations >= cfg.max_iterations:
            break
        if len(steps) >= 2 and not steps[-1] <= cfg.ratio_threshold * steps[-2]:
            break
        if d.min() < eps:
            fallback = True
            break
        coef = w / d
        y_next = (coef @ X) / coef.sum()
        iterations += 1
        step = float(np.sqrt(np.sum((y_next - y) ** 2)))
        steps.append(step)
        y = y_next
        converged = step < eps

    m = X.shape[0]
    if fallback or m <= cfg.support_check_limit:
        i, c = _exact_best_support(X, w, cfg.support_check_limit, near=y)
        if c < best_c:
            best_y, best_c = X[i], c
    return OneMedian(np.array(best_y, dtype=np.float64), iterations, fallback, best_c)


def node_one_median(v: ProbabilisticNode, cfg: WeiszfeldConfig = DEFAULT_WEISZFELD) -> WeightedPoint:
    """Representative point of a node, carrying the node's weight."""
    res = approximate_one_median(v.points, v.realization_weights, cfg)
    return WeightedPoint(res.point, v.weight)


class BatchOneMedians(NamedTuple):
    points: np.ndarray
    iterations: np.ndarray
    fallback: np.ndarray
    costs: np.ndarray


def batch_one_medians(ns: NodeSet, cfg: WeiszfeldConfig = DEFAULT_WEISZFELD) -> BatchOneMedians:
    """:func:`approximate_one_median` for every node of ``ns`` at once.

    Per-node semantics are identical to the scalar routine; realization
    weights are ``node_weight * p`` (the node weight cancels anyway).
    """
    n = len(ns)
    X = ns.points
    owner = ns.owner
    starts = ns.offsets[:-1]
    wr = ns.probs * ns.node_weights[owner]
    eps = cfg.coincidence_epsilon

    first = X[starts][owner]
    single = np.add.reduceat(np.any(X != first, axis=1).astype(np.int64), starts) == 0

    y = np.add.reduceat(wr[:, None] * X, starts, axis=0) / np.add.reduceat(wr, starts)[:, None]
    y[single] = X[starts[single]]
    best_y = y.copy()
    best_c = np.full(n, np.inf)
    best_c[single] = 0.0
    iterations = np.zeros(n, dtype=np.int64)
    s_prev = np.zeros(n)
    s_last = np.zeros(n)
    converged = np.zeros(n, dtype=bool)
    fallback = np.zeros(n, dtype=bool)
    active = ~single

    while active.any():
        diff = X - y[owner]
        d = np.sqrt(np.einsum("ij,ij->i", diff, diff))
        c = np.add.reduceat(wr * d, starts)
        better = active & (c < best_c)
        best_y[better] = y[better]
        best_c[better] = c[better]

        stop = converged | (iterations >= cfg.max_iterations)
        stop |= (iterations >= 2) & ~(s_last <= cfg.ratio_threshold * s_prev)
        active &= ~stop
        hit = active & (np.minimum.reduceat(d, starts) < eps)
        fallback |= hit
        active &= ~hit
        if not active.any():
            break

        rows = active[owner]
        coef = np.zeros_like(d)
        np.divide(wr, d, out=coef, where=rows)
        num = np.add.reduceat(coef[:, None] * X, starts, axis=0)
        den = np.add.reduceat(coef, starts)
        y_next = num[active] / den[active][:, None]
        step = np.sqrt(np.sum((y_next - y[active]) ** 2, axis=1))
        y[active] = y_next
        iterations[active] += 1
        s_prev[active] = s_last[active]
        s_last[active] = step
        converged[active] = step < eps

    _apply_support_check(ns, wr, y, best_y, best_c, fallback, single, cfg)
    return BatchOneMedians(best_y, iterations, fallback, best_c)


def _apply_support_check(ns, wr, y_last, best_y, best_c, fallback, single, cfg):
    sizes = ns.sizes
    starts = ns.offsets[:-1]
    check = ~single & (fallback | (sizes <= cfg.support_check_limit))
    small = check & (sizes <= cfg.support_check_limit)
    if small.any():
        idx = np.flatnonzero(small)
        m = sizes[idx]
        # all (candidate row, support row) pairs within each checked node
        cand_rows = np.repeat(np.repeat(starts[idx], m) + _ranges(m), np.repeat(m, m))
        sup_rows = np.repeat(starts[idx], m * m) + _ranges(np.repeat(m, m))
        diff = ns.points[cand_rows] - ns.points[sup_rows]
        pc = wr[sup_rows] * np.sqrt(np.einsum("ij,ij->i", diff, diff))
        cand_start = np.concatenate(([0], np.cumsum(np.repeat(m, m))[:-1]))
        cand_cost = np.add.reduceat(pc, cand_start)
        node_start = np.concatenate(([0], np.cumsum(m)[:-1]))
        node_min = np.minimum.reduceat(cand_cost, node_start)
        local_owner = np.repeat(np.arange(idx.shape[0]), m)
        is_min = cand_cost == node_min[local_owner]
        # first candidate per node achieving the minimum
        pos = np.flatnonzero(is_min)
        _, first = np.unique(local_owner[pos], return_index=True)
        first_pos = pos[first]
        win_rows = np.repeat(starts[idx], m)[first_pos] + (first_pos - node_start)
        take = node_min < best_c[idx]
        sel = idx[take]
        best_y[sel] = ns.points[win_rows[take]]
        best_c[sel] = node_min[take]
    for i in np.flatnonzero(check & ~small):
        a, b = ns.offsets[i], ns.offsets[i + 1]
        j, c = _exact_best_support(ns.points[a:b], wr[a:b], cfg.support_check_limit, near=y_last[i])
        if c < best_c[i]:
            best_y[i] = ns.points[a + j]
            best_c[i] = c


def _ranges(m):
    """Concatenation of ``arange(k)`` for every ``k`` in ``m``."""
    total = int(np.sum(m))
    ends = np.cumsum(m)
    return np.arange(total) - np.repeat(ends - m, m)


def brute_force_one_median(points, weights=None, resolution: float = 1e-3, coarse: int | None = None) -> np.ndarray:
    """Grid-search 1-median over the bounding box, refined once around the best cell.

    Test oracle for d <= 3.  The coarse grid has ``coarse`` points per axis;
    the refinement scans two coarse cells either side of the winner at
    ``resolution`` spacing.
    """
    X, w = _support(points, weights)
    d = X.shape[1]
    if d > 3:
        raise DimensionTooLargeError(f"grid oracle supports d <= 3, got {d}")
    if coarse is None:
        coarse = {1: 4001, 2: 201, 3: 41}[d]
    lo, hi = X.min(axis=0), X.max(axis=0)

    def grid_axes(a, b, step):
        return [np.arange(a[i], b[i] + 0.5 * step, step) if b[i] > a[i] else np.array([a[i]]) for i in range(d)]

    def best_on(axes):
        best, best_c = None, np.inf
        mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d)
        for k in range(0, mesh.shape[0], 8192):
            G = mesh[k:k + 8192]
            D = np.sqrt(np.sum((G[:, None, :] - X[None, :, :]) ** 2, axis=2))
            c = D @ w
            i = int(np.argmin(c))
            if c[i] < best_c:
                best, best_c = G[i], c[i]
        return best

    extent = float(np.max(hi - lo))
    step = max(extent / (coarse - 1), resolution)
    g = best_on(grid_axes(lo, hi, step))
    if step <= resolution:
        return g
    a = np.maximum(g - 2 * step, lo)
    b = np.minimum(g + 2 * step, hi)
    return best_on(grid_axes(a, b, resolution))
