"""Merge & Reduce streaming of coresets.

Incoming nodes fill a raw buffer of capacity ``N``.  A full buffer is
carried up a binary-counter cascade of levels: level ``l >= 1`` is empty or
holds a summary standing for ``2**(l-1) * N`` stream nodes; two summaries
at the same level are merged, reduced with :func:`compute_coreset` and
carried one level up.  Only the buffer and one summary per level are kept.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterable

from .coreset import Coreset, CoresetConfig, compute_coreset
from .errors import EmptyStreamError, InvalidInputError
from .model import NodeSet, ProbabilisticNode
from .rng import make_rng

# child stream id reserved for reducing the raw buffer at finalize time
_FINAL_STREAM = 1 << 32


@dataclass(frozen=True)
class StreamConfig:
    coreset: CoresetConfig
    bucket_capacity: int | None = None
    # repeated draws of a node become one entry with the summed weight; keeps
    # summaries from outgrowing their input when buckets are tiny
    merge_duplicates: bool = True

    def __post_init__(self):
        if self.bucket_capacity is None:
            object.__setattr__(self, "bucket_capacity", int(self.coreset.sample_constant * self.coreset.k))
        if self.bucket_capacity < 1:
            raise InvalidInputError("bucket_capacity must be >= 1")

    @property
    def reduce_config(self) -> CoresetConfig:
        return replace(self.coreset, merge_duplicates=self.merge_duplicates)


@dataclass
class Summary:
    nodes: NodeSet
    represented: int
    depth: int

    def __len__(self):
        return len(self.nodes)


@dataclass
class StreamState:
    config: StreamConfig
    b0: list = field(default_factory=list)
    levels: list = field(default_factory=list)  # levels[i] is level i + 1
    count: int = 0
    pushed_weight: float = 0.0
    reduces: int = 0
    peak_live: int = 0
    dim: int | None = None

    @property
    def capacity(self) -> int:
        return self.config.bucket_capacity

    @property
    def live_nodes(self) -> int:
        return len(self.b0) + sum(len(s) for s in self.levels if s is not None)

    def occupied_levels(self) -> list[int]:
        return [i + 1 for i, s in enumerate(self.levels) if s is not None]

    def push(self, v: ProbabilisticNode) -> "StreamState":
        if self.dim is None:
            self.dim = v.dim
        elif v.dim != self.dim:
            raise InvalidInputError(f"node {v.id!r} has dimension {v.dim}, stream has {self.dim}")
        self.b0.append(v)
        self.count += 1
        self.pushed_weight += v.weight
        self._note_live(0)
        if len(self.b0) == self.capacity:
            self._cascade()
        return self

    def extend(self, nodes: Iterable[ProbabilisticNode]) -> "StreamState":
        for v in nodes:
            self.push(v)
        return self

    def _note_live(self, extra):
        live = self.live_nodes + extra
        if live > self.peak_live:
            self.peak_live = live

    def _reduce(self, ns: NodeSet, stream_id: int) -> NodeSet:
        rng = make_rng(self.config.coreset.rng_seed, stream_id)
        self.reduces += 1
        return compute_coreset(ns, self.config.reduce_config, rng).nodes

    def _cascade(self):
        carry = Summary(NodeSet.from_nodes(self.b0), self.capacity, 0)
        self.b0 = []
        level = 0
        while True:
            if level == len(self.levels):
                self.levels.append(None)
            held = self.levels[level]
            if held is None:
                assert carry.represented == (1 << level) * self.capacity
                self.levels[level] = carry
                return
            self.levels[level] = None
            merged = NodeSet.concat([held.nodes, carry.nodes])
            self._note_live(len(merged))
            reduced = self._reduce(merged, self.reduces)
            carry = Summary(reduced, held.represented + carry.represented, max(held.depth, carry.depth) + 1)
            self._note_live(len(carry))
            level += 1

    def finalize(self) -> Coreset:
        """Union of the reduced buffer and every occupied level.

        Buffers smaller than ``2k`` are passed through unreduced.  The state
        is left untouched, so pushing may continue afterwards.
        """
        if self.count == 0:
            raise EmptyStreamError("no node was pushed")
        cfg = self.config.coreset
        parts = []
        if self.b0:
            raw = NodeSet.from_nodes(self.b0)
            if len(raw) >= 2 * cfg.k:
                rng = make_rng(cfg.rng_seed, _FINAL_STREAM)
                raw = compute_coreset(raw, self.config.reduce_config, rng).nodes
            parts.append(raw)
        parts.extend(s.nodes for s in self.levels if s is not None)
        return Coreset(
            nodes=NodeSet.concat(parts),
            k=cfg.k,
            epsilon=cfg.epsilon,
            source_weight=self.pushed_weight,
            source_count=self.count,
        )

    def max_depth(self) -> int:
        return max((s.depth for s in self.levels if s is not None), default=0)


def new_stream(cfg: StreamConfig) -> StreamState:
    return StreamState(cfg)


def push_node(state: StreamState, v: ProbabilisticNode) -> StreamState:
    return state.push(v)


def finalize(state: StreamState) -> Coreset:
    return state.finalize()


def stream_coreset(nodes: Iterable[ProbabilisticNode], cfg: StreamConfig) -> Coreset:
    """One pass over ``nodes``; returns the final summary."""
    return StreamState(cfg).extend(nodes).finalize()
