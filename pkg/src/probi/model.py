"""Domain types and expected-cost arithmetic for probabilistic k-median.

A node is a finite discrete distribution over points in R^d (total
probability at most one) with a positive weight.  The assigned cost of a
node to a center ``c`` is ``sum_j p_j * ||x_j - c||``; a clustering cost
multiplies that by the node's (effective) weight and sums over nodes, each
node using its expected nearest center.

Scalar helpers operate on single nodes and mirror the definitions directly.
:class:`NodeSet` packs many nodes into flat arrays so the hot paths
(Weiszfeld, assignment, sampling) run vectorized.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.spatial.distance import cdist

from .errors import DimensionMismatchError, EmptyInputError, InvalidInputError, InvalidProbabilityError

PROBABILITY_SLACK = 1e-9


def as_point(coords, dim=None) -> np.ndarray:
    p = np.array(coords, dtype=np.float64).reshape(-1)
    if p.size == 0:
        raise InvalidInputError("a point needs at least one coordinate")
    if not np.all(np.isfinite(p)):
        raise InvalidInputError(f"non-finite coordinate in {coords!r}")
    if dim is not None and p.size != dim:
        raise DimensionMismatchError(f"expected dimension {dim}, got {p.size}")
    return p


def as_points(coords, dim=None) -> np.ndarray:
    P = np.array(coords, dtype=np.float64)
    if P.ndim == 1:
        P = P.reshape(1, -1)
    if P.ndim != 2 or P.shape[0] == 0 or P.shape[1] == 0:
        raise InvalidInputError("points must form a non-empty (n, d) array")
    if not np.all(np.isfinite(P)):
        raise InvalidInputError("non-finite coordinate in point array")
    if dim is not None and P.shape[1] != dim:
        raise DimensionMismatchError(f"expected dimension {dim}, got {P.shape[1]}")
    return P


def pairwise_distances(P: np.ndarray, C: np.ndarray) -> np.ndarray:
    """Euclidean distances between rows of ``P`` (n, d) and ``C`` (k, d)."""
    if P.shape[1] != C.shape[1]:
        raise DimensionMismatchError(f"dimension {P.shape[1]} vs {C.shape[1]}")
    return cdist(P, C)


@dataclass(frozen=True)
class Realization:
    point: np.ndarray
    probability: float


@dataclass(frozen=True, eq=False)
class ProbabilisticNode:
    """A weighted discrete distribution over points.

    ``points`` has shape (m, d) and ``probs`` shape (m,).  Zero-probability
    realizations are dropped on construction.
    """

    points: np.ndarray
    probs: np.ndarray
    weight: float = 1.0
    id: str | None = None

    def __post_init__(self):
        P = as_points(self.points)
        p = np.array(self.probs, dtype=np.float64).reshape(-1)
        if p.shape[0] != P.shape[0]:
            raise InvalidInputError("points and probabilities differ in length")
        if not np.all(np.isfinite(p)) or np.any(p < 0) or np.any(p > 1 + PROBABILITY_SLACK):
            raise InvalidProbabilityError(f"realization probabilities must lie in (0, 1]: {p.tolist()}")
        keep = p > 0
        if not keep.all():
            P, p = P[keep], p[keep]
        total = float(p.sum())
        if p.size == 0 or total <= 0:
            raise InvalidProbabilityError("node has no realization with positive probability")
        if total > 1 + PROBABILITY_SLACK:
            raise InvalidProbabilityError(f"total probability {total!r} exceeds 1")
        w = float(self.weight)
        if not np.isfinite(w) or w <= 0:
            raise InvalidInputError(f"node weight must be positive, got {self.weight!r}")
        P.setflags(write=False)
        p.setflags(write=False)
        object.__setattr__(self, "points", P)
        object.__setattr__(self, "probs", p)
        object.__setattr__(self, "weight", w)

    @classmethod
    def from_realizations(cls, realizations, weight=1.0, id=None):
        """Build from ``Realization`` objects or ``(point, probability)`` pairs."""
        pts, probs = [], []
        for r in realizations:
            if isinstance(r, Realization):
                pts.append(r.point)
                probs.append(r.probability)
            else:
                pt, pr = r
                pts.append(pt)
                probs.append(pr)
        if not pts:
            raise InvalidProbabilityError("node needs at least one realization")
        return cls(np.array(pts, dtype=np.float64), np.array(probs, dtype=np.float64), weight, id)

    @property
    def realizations(self) -> tuple[Realization, ...]:
        return tuple(Realization(x, float(p)) for x, p in zip(self.points, self.probs))

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def size(self) -> int:
        return self.points.shape[0]

    @property
    def total_probability(self) -> float:
        return float(self.probs.sum())

    @property
    def realization_weights(self) -> np.ndarray:
        return self.weight * self.probs

    def __repr__(self):
        return f"ProbabilisticNode(id={self.id!r}, weight={self.weight!r}, m={self.size}, d={self.dim})"


@dataclass(frozen=True)
class WeightedPoint:
    point: np.ndarray
    weight: float

    def __post_init__(self):
        object.__setattr__(self, "point", as_point(self.point))
        w = float(self.weight)
        if not np.isfinite(w) or w <= 0:
            raise InvalidInputError(f"weight must be positive, got {self.weight!r}")
        object.__setattr__(self, "weight", w)


@dataclass(frozen=True)
class CoresetNode:
    node: ProbabilisticNode
    coreset_weight: float

    def __post_init__(self):
        w = float(self.coreset_weight)
        if not np.isfinite(w) or w <= 0:
            raise InvalidInputError(f"coreset weight must be positive, got {self.coreset_weight!r}")
        object.__setattr__(self, "coreset_weight", w)


@dataclass(frozen=True, eq=False)
class CenterSet(Sequence):
    """An ordered, non-empty set of centers.

    ``requested_k`` is set when the producer had to clamp ``k`` to the number
    of distinct input points.
    """

    centers: np.ndarray
    requested_k: int | None = None

    def __post_init__(self):
        C = as_points(self.centers)
        C.setflags(write=False)
        object.__setattr__(self, "centers", C)

    def __len__(self):
        return self.centers.shape[0]

    def __getitem__(self, i):
        return self.centers[i]

    def __iter__(self):
        return iter(self.centers)

    @property
    def dim(self) -> int:
        return self.centers.shape[1]

    @property
    def clamped(self) -> bool:
        return self.requested_k is not None and self.requested_k != len(self)

    def __repr__(self):
        return f"CenterSet(k={len(self)}, d={self.dim})"


def _centers_array(C) -> np.ndarray:
    if isinstance(C, CenterSet):
        return C.centers
    return as_points(C)


# ---------------------------------------------------------------------------
# scalar operations


def euclidean_distance(a, b) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise DimensionMismatchError(f"dimension {a.shape} vs {b.shape}")
    return float(np.sqrt(np.sum((a - b) ** 2)))


def expected_node_cost(v: ProbabilisticNode, c) -> float:
    """Sum of ``p_j * dist(x_j, c)`` over the node's realizations (unweighted)."""
    c = as_point(c)
    if c.size != v.dim:
        raise DimensionMismatchError(f"node dimension {v.dim} vs center dimension {c.size}")
    d = np.sqrt(np.sum((v.points - c) ** 2, axis=1))
    return float(np.dot(v.probs, d))


def assign_expected_nearest(v: ProbabilisticNode, C) -> int:
    C = _centers_array(C)
    if C.shape[1] != v.dim:
        raise DimensionMismatchError(f"node dimension {v.dim} vs center dimension {C.shape[1]}")
    costs = v.probs @ pairwise_distances(v.points, C)
    return int(np.argmin(costs))


def node_center_of_gravity(v: ProbabilisticNode) -> np.ndarray:
    w = v.realization_weights
    return (w @ v.points) / w.sum()


def node_spread(v: ProbabilisticNode, y) -> float:
    """Average realization distance to ``y`` under the renormalized distribution."""
    return expected_node_cost(v, y) / v.total_probability


def expected_clustering_cost(nodes, C) -> float:
    """Weighted expected k-median cost with each node on its expected nearest center.

    ``nodes`` may be a :class:`NodeSet`, or a sequence whose items are
    ``(ProbabilisticNode, weight)`` pairs, :class:`CoresetNode` objects
    (weighted by ``coreset_weight``) or bare nodes (weighted by their own
    weight).
    """
    ns = nodes if isinstance(nodes, NodeSet) else NodeSet.from_any(nodes)
    return ns.cost(C)


# ---------------------------------------------------------------------------
# batched representation


@dataclass(frozen=True, eq=False)
class NodeSet:
    """Many nodes packed into flat arrays.

    Realizations of node ``i`` occupy rows ``offsets[i]:offsets[i + 1]`` of
    ``points``/``probs``.  ``weights`` are the effective weights used for
    costs (node weight for raw data, coreset weight for a summary);
    ``node_weights`` keep each node's own weight so summaries can be
    serialized and re-expanded into :class:`CoresetNode` objects.
    """

    points: np.ndarray
    probs: np.ndarray
    offsets: np.ndarray
    weights: np.ndarray
    node_weights: np.ndarray
    ids: np.ndarray
    _owner: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        n = self.offsets.shape[0] - 1
        if n < 1:
            raise EmptyInputError("a node set needs at least one node")
        if self.weights.shape != (n,) or self.node_weights.shape != (n,) or len(self.ids) != n:
            raise InvalidInputError("inconsistent node set arrays")

    # -- construction -----------------------------------------------------

    @classmethod
    def from_nodes(cls, nodes: Iterable[ProbabilisticNode], weights=None) -> "NodeSet":
        nodes = list(nodes)
        if not nodes:
            raise EmptyInputError("no nodes given")
        dim = nodes[0].dim
        for v in nodes:
            if v.dim != dim:
                raise DimensionMismatchError(f"node {v.id!r} has dimension {v.dim}, expected {dim}")
        sizes = np.fromiter((v.size for v in nodes), dtype=np.int64, count=len(nodes))
        offsets = np.zeros(len(nodes) + 1, dtype=np.int64)
        np.cumsum(sizes, out=offsets[1:])
        points = np.concatenate([v.points for v in nodes], axis=0)
        probs = np.concatenate([v.probs for v in nodes])
        node_weights = np.fromiter((v.weight for v in nodes), dtype=np.float64, count=len(nodes))
        if weights is None:
            eff = node_weights.copy()
        else:
            eff = np.asarray(weights, dtype=np.float64).reshape(-1)
            if eff.shape[0] != len(nodes) or np.any(~np.isfinite(eff)) or np.any(eff <= 0):
                raise InvalidInputError("effective weights must be positive, one per node")
        ids = np.empty(len(nodes), dtype=object)
        ids[:] = [v.id for v in nodes]
        return cls(points, probs, offsets, eff, node_weights, ids)

    @classmethod
    def from_coreset_nodes(cls, cns: Iterable[CoresetNode]) -> "NodeSet":
        cns = list(cns)
        return cls.from_nodes([c.node for c in cns], [c.coreset_weight for c in cns])

    @classmethod
    def from_any(cls, items) -> "NodeSet":
        if isinstance(items, NodeSet):
            return items
        items = list(items)
        if not items:
            raise EmptyInputError("no nodes given")
        nodes, weights = [], []
        for it in items:
            if isinstance(it, CoresetNode):
                nodes.append(it.node)
                weights.append(it.coreset_weight)
            elif isinstance(it, ProbabilisticNode):
                nodes.append(it)
                weights.append(it.weight)
            else:
                v, w = it
                nodes.append(v)
                weights.append(w)
        return cls.from_nodes(nodes, weights)

    @classmethod
    def from_points(cls, points, weights=None) -> "NodeSet":
        """One single-realization node (p = 1) per row of ``points``."""
        P = as_points(points)
        n = P.shape[0]
        w = np.ones(n) if weights is None else np.asarray(weights, dtype=np.float64).reshape(-1)
        if w.shape[0] != n or np.any(~np.isfinite(w)) or np.any(w <= 0):
            raise InvalidInputError("weights must be positive, one per point")
        ids = np.empty(n, dtype=object)
        return cls(P.copy(), np.ones(n), np.arange(n + 1, dtype=np.int64), w.copy(), w.copy(), ids)

    @staticmethod
    def concat(sets: Sequence["NodeSet"]) -> "NodeSet":
        sets = [s for s in sets if s is not None]
        if not sets:
            raise EmptyInputError("nothing to concatenate")
        if len(sets) == 1:
            return sets[0]
        dim = sets[0].dim
        for s in sets:
            if s.dim != dim:
                raise DimensionMismatchError(f"node sets of dimension {s.dim} and {dim}")
        shifts = np.cumsum([0] + [s.points.shape[0] for s in sets[:-1]])
        offsets = np.concatenate([sets[0].offsets[:1]] + [s.offsets[1:] + sh for s, sh in zip(sets, shifts)])
        return NodeSet(
            np.concatenate([s.points for s in sets], axis=0),
            np.concatenate([s.probs for s in sets]),
            offsets,
            np.concatenate([s.weights for s in sets]),
            np.concatenate([s.node_weights for s in sets]),
            np.concatenate([s.ids for s in sets]),
        )

    # -- accessors --------------------------------------------------------

    def __len__(self):
        return self.offsets.shape[0] - 1

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def sizes(self) -> np.ndarray:
        return np.diff(self.offsets)

    @property
    def owner(self) -> np.ndarray:
        """Node index of every realization row."""
        if self._owner is None:
            object.__setattr__(self, "_owner", np.repeat(np.arange(len(self)), self.sizes))
        return self._owner

    @property
    def total_probabilities(self) -> np.ndarray:
        return np.add.reduceat(self.probs, self.offsets[:-1])

    @property
    def total_weight(self) -> float:
        return float(self.weights.sum())

    def realization_weights(self, effective=True) -> np.ndarray:
        w = self.weights if effective else self.node_weights
        return w[self.owner] * self.probs

    def node(self, i: int) -> ProbabilisticNode:
        a, b = self.offsets[i], self.offsets[i + 1]
        return ProbabilisticNode(self.points[a:b], self.probs[a:b], self.node_weights[i], self.ids[i])

    def nodes(self) -> list[ProbabilisticNode]:
        return [self.node(i) for i in range(len(self))]

    def coreset_nodes(self) -> list[CoresetNode]:
        return [CoresetNode(self.node(i), float(self.weights[i])) for i in range(len(self))]

    def take(self, index, weights=None) -> "NodeSet":
        """Nodes at ``index`` (repeats allowed), optionally with new effective weights."""
        index = np.asarray(index, dtype=np.int64).reshape(-1)
        sizes = self.sizes[index]
        offsets = np.zeros(index.shape[0] + 1, dtype=np.int64)
        np.cumsum(sizes, out=offsets[1:])
        starts = self.offsets[:-1][index]
        rows = np.repeat(starts - offsets[:-1], sizes) + np.arange(offsets[-1])
        eff = self.weights[index] if weights is None else np.asarray(weights, dtype=np.float64).reshape(-1)
        return NodeSet(
            self.points[rows], self.probs[rows], offsets, eff, self.node_weights[index], self.ids[index]
        )

    def with_weights(self, weights) -> "NodeSet":
        return NodeSet(
            self.points, self.probs, self.offsets, np.asarray(weights, dtype=np.float64),
            self.node_weights, self.ids, self._owner,
        )

    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        return self.points.min(axis=0), self.points.max(axis=0)

    # -- costs ------------------------------------------------------------

    def cost_matrix(self, C) -> np.ndarray:
        """Unweighted expected cost of every node to every center, shape (n, k)."""
        C = _centers_array(C)
        D = pairwise_distances(self.points, C)
        D *= self.probs[:, None]
        return np.add.reduceat(D, self.offsets[:-1], axis=0)

    def assign(self, C) -> tuple[np.ndarray, np.ndarray]:
        """Expected-nearest center index (lowest index on ties) and its cost per node."""
        M = self.cost_matrix(C)
        idx = np.argmin(M, axis=1)
        return idx, M[np.arange(M.shape[0]), idx]

    def cost(self, C) -> float:
        _, c = self.assign(C)
        return float(np.dot(self.weights, c))

    def centers_of_gravity(self) -> np.ndarray:
        wp = self.probs[:, None] * self.points
        num = np.add.reduceat(wp, self.offsets[:-1], axis=0)
        return num / self.total_probabilities[:, None]

    def spreads(self, Y: np.ndarray) -> np.ndarray:
        """Renormalized expected distance of each node to its own point ``Y[i]``."""
        diff = self.points - Y[self.owner]
        d = np.sqrt(np.einsum("ij,ij->i", diff, diff))
        return np.add.reduceat(self.probs * d, self.offsets[:-1]) / self.total_probabilities
