"""Sampling-based coreset for probabilistic k-median.

Steps: replace every node by an approximate 1-median carrying the node's
weight; compute a center set on those representatives; bucket the
representatives by nearest center, distance ring and spread ring; draw a
weighted sample with replacement from every bucket, each draw weighted so
the bucket's total weight is preserved.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np

from .centers import CenterComputeConfig, compute_center_set, kmedian_cost
from .errors import EmptyInputError, InvalidInputError
from .model import CenterSet, CoresetNode, NodeSet, WeightedPoint, pairwise_distances
from .onemedian import WeiszfeldConfig, batch_one_medians
from .rng import derive_seed, make_rng

SAMPLING_MODES = ("weighted", "uniform")


class BucketKey(NamedTuple):
    ell: int
    h: int
    a: int


@dataclass(frozen=True)
class CoresetConfig:
    k: int
    sample_constant: float = 200.0
    epsilon: float = 0.1  # recorded only; nothing here depends on it
    weiszfeld: WeiszfeldConfig = field(default_factory=WeiszfeldConfig)
    centers: CenterComputeConfig | None = None
    rng_seed: int = 0
    sampling: str = "weighted"
    merge_duplicates: bool = False

    def __post_init__(self):
        if self.k < 1:
            raise InvalidInputError("k must be >= 1")
        if not self.sample_constant > 0:
            raise InvalidInputError("sample_constant must be > 0")
        if not self.epsilon > 0:
            raise InvalidInputError("epsilon must be > 0")
        if self.sampling not in SAMPLING_MODES:
            raise InvalidInputError(f"sampling must be one of {SAMPLING_MODES}")
        if self.centers is None:
            object.__setattr__(self, "centers", CenterComputeConfig(k=self.k, weiszfeld=self.weiszfeld))


class Representatives(NamedTuple):
    points: np.ndarray
    weights: np.ndarray
    nodes: NodeSet
    fallback: np.ndarray

    def pairs(self) -> list[tuple[WeightedPoint, int]]:
        """``(representative, index of its node)`` for every node."""
        return [(WeightedPoint(p, w), i) for i, (p, w) in enumerate(zip(self.points, self.weights))]


@dataclass(frozen=True)
class BucketInfo:
    members: int
    samples: int
    weight: float
    emitted_weight: float


@dataclass(frozen=True, eq=False)
class Coreset(Sequence):
    """A weighted summary; iterating yields :class:`CoresetNode` objects."""

    nodes: NodeSet
    k: int
    epsilon: float
    source_weight: float
    source_count: int
    centers: CenterSet | None = None
    radius: float | None = None
    buckets: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.nodes)

    def __getitem__(self, i):
        if isinstance(i, slice):
            return [self[j] for j in range(*i.indices(len(self)))]
        if i < 0:
            i += len(self)
        return CoresetNode(self.nodes.node(i), float(self.nodes.weights[i]))

    @property
    def total_weight(self) -> float:
        return self.nodes.total_weight

    def cost(self, C) -> float:
        return self.nodes.cost(C)


def build_representatives(V, cfg: CoresetConfig) -> Representatives:
    ns = NodeSet.from_any(V)
    res = batch_one_medians(ns, cfg.weiszfeld)
    return Representatives(res.points, ns.weights.copy(), ns, res.fallback)


def ring_radius(points, weights, A) -> float:
    """Weighted average distance to the nearest center; 1.0 if that is zero."""
    P = np.asarray(points, dtype=np.float64)
    w = np.asarray(weights, dtype=np.float64)
    num = kmedian_cost(P, w, A)
    if not num > 0:
        return 1.0
    return num / float(w.sum())


def ring_index(value, R, closed_first=False):
    """Index of the dyadic ring ``(2^(i-1) R, 2^i R]`` holding ``value``.

    Index 0 is the inner ball: ``value < R`` (open, the default) or
    ``value <= R`` (``closed_first``).  Works elementwise on arrays.
    """
    v = np.asarray(value, dtype=np.float64)
    ratio = v / R
    with np.errstate(divide="ignore"):
        h = np.ceil(np.log2(np.maximum(ratio, 1.0))).astype(np.int64)
    h = np.maximum(h, 1)
    # exact boundary corrections for log2 rounding
    up = v > np.ldexp(R, h)
    h = np.where(up, h + 1, h)
    down = (h > 1) & (v <= np.ldexp(R, h - 1))
    h = np.where(down, h - 1, h)
    inner = v <= R if closed_first else v < R
    h = np.where(inner, 0, h)
    return int(h) if h.ndim == 0 else h


def partition(points, spreads, A, R) -> dict[BucketKey, np.ndarray]:
    """Bucket representatives by (nearest center, distance ring, spread ring).

    Returns indices per key, keys in sorted order.  Ties for the nearest
    center go to the lowest index.
    """
    if not R > 0:
        raise InvalidInputError("ring radius must be positive")
    P = np.asarray(points, dtype=np.float64)
    C = A.centers if isinstance(A, CenterSet) else np.asarray(A, dtype=np.float64)
    D = pairwise_distances(P, C)
    ell = np.argmin(D, axis=1)
    dist = D[np.arange(P.shape[0]), ell]
    h = ring_index(dist, R)
    a = ring_index(np.asarray(spreads, dtype=np.float64), R, closed_first=True)
    keys = np.stack([ell, np.atleast_1d(h), np.atleast_1d(a)], axis=1)
    uniq, inverse = np.unique(keys, axis=0, return_inverse=True)
    inverse = inverse.reshape(-1)
    order = np.argsort(inverse, kind="stable")
    bounds = np.searchsorted(inverse[order], np.arange(uniq.shape[0] + 1))
    return {
        BucketKey(*map(int, uniq[b])): order[bounds[b]:bounds[b + 1]]
        for b in range(uniq.shape[0])
    }


def sample_size(bucket, k: int, sample_constant: float = 200.0) -> int:
    """``max(ceil(sample_constant * k / n_plus), 1)``.

    ``bucket`` is either the count of members with non-empty support or a
    sequence of member sizes (realization counts).
    """
    if isinstance(bucket, (int, np.integer)):
        n_plus = int(bucket)
    else:
        n_plus = int(np.count_nonzero(np.asarray(bucket) > 0))
    if n_plus < 1:
        raise EmptyInputError("bucket has no member with non-empty support")
    return max(math.ceil(sample_constant * k / n_plus), 1)


def sample_bucket(weights, s: int, rng, uniform: bool = False) -> tuple[np.ndarray, np.ndarray]:
    """Draw ``s`` member indices i.i.d. with replacement.

    Weighted mode picks member ``i`` with probability ``w_i / W`` and gives
    every draw weight ``W / s``, so the emitted weights sum to ``W``.
    Uniform mode picks members uniformly and weights a draw of ``i`` by
    ``n * w_i / s``; it is unbiased but conserves the total only in
    expectation.
    """
    w = np.asarray(weights, dtype=np.float64).reshape(-1)
    n = w.shape[0]
    if n == 0:
        raise EmptyInputError("empty bucket")
    if s < 1:
        raise InvalidInputError("sample size must be >= 1")
    W = float(w.sum())
    if not W > 0:
        raise InvalidInputError("bucket weight must be positive")
    if uniform:
        idx = rng.integers(n, size=s)
        return idx, w[idx] * (n / s)
    cum = np.cumsum(w)
    idx = np.searchsorted(cum, rng.random(s) * cum[-1], side="right")
    np.minimum(idx, n - 1, out=idx)
    return idx, np.full(s, W / s)


def _merge_draws(idx, cw):
    uniq, inverse = np.unique(idx, return_inverse=True)
    return uniq, np.bincount(inverse.reshape(-1), weights=cw)


def compute_coreset(V, cfg: CoresetConfig, rng=None) -> Coreset:
    """Weighted node summary of ``V``; node weights are read as effective weights."""
    ns = NodeSet.from_any(V)
    rng = make_rng(cfg.rng_seed if rng is None else rng)
    seed = derive_seed(rng)

    reps = build_representatives(ns, cfg)
    A = compute_center_set(reps.points, replace(cfg.centers, rng_seed=seed), weights=reps.weights)
    R = ring_radius(reps.points, reps.weights, A)
    spreads = ns.spreads(reps.points)
    buckets = partition(reps.points, spreads, A, R)

    sizes = ns.sizes
    chosen, chosen_w, info = [], [], {}
    for key, members in buckets.items():
        s = sample_size(sizes[members], cfg.k, cfg.sample_constant)
        brng = make_rng(seed, 1 + key.ell, key.h, key.a)
        idx, cw = sample_bucket(ns.weights[members], s, brng, uniform=cfg.sampling == "uniform")
        if cfg.merge_duplicates:
            idx, cw = _merge_draws(idx, cw)
        chosen.append(members[idx])
        chosen_w.append(cw)
        info[key] = BucketInfo(int(members.shape[0]), s, float(ns.weights[members].sum()), float(cw.sum()))

    out = ns.take(np.concatenate(chosen), np.concatenate(chosen_w))
    return Coreset(
        nodes=out,
        k=cfg.k,
        epsilon=cfg.epsilon,
        source_weight=ns.total_weight,
        source_count=len(ns),
        centers=A,
        radius=R,
        buckets=info,
    )
