"""Point, node and coreset file formats.

* point file: one point per line, coordinates separated by commas and/or
  whitespace; blank lines and lines starting with ``#`` are ignored.
* node file: JSON lines ``{"id", "weight", "realizations": [{"p", "x"}]}``.
* coreset file: a ``#meta {json}`` header, then node lines that also carry
  ``coreset_weight``.

Readers are generators so large files stream in one pass.  Floats are
written with their shortest round-trip representation.
"""

from __future__ import annotations

import json
import re
from typing import Iterable, Iterator

import numpy as np

from .errors import DimensionMismatchError, InvalidInputError, ParseError, ProbiError
from .model import NodeSet, ProbabilisticNode

_SEP = re.compile(r"[,\s]+")
META_PREFIX = "#meta "


def _data_lines(path) -> Iterator[tuple[int, str]]:
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            s = line.strip()
            if s and not s.startswith("#"):
                yield lineno, s


def read_points(path) -> Iterator[np.ndarray]:
    dim = None
    seen = False
    for lineno, s in _data_lines(path):
        try:
            p = np.array([float(t) for t in _SEP.split(s) if t], dtype=np.float64)
        except ValueError as exc:
            raise ParseError(f"bad coordinate ({exc})", path, lineno) from None
        if p.size == 0 or not np.all(np.isfinite(p)):
            raise ParseError("point needs finite coordinates", path, lineno)
        if dim is None:
            dim = p.size
        elif p.size != dim:
            raise ParseError(f"dimension {p.size}, expected {dim}", path, lineno)
        seen = True
        yield p
    if not seen:
        raise ParseError("no data lines", path)


def format_point(p) -> str:
    return ",".join(repr(float(x)) for x in p)


def write_points(path, points: Iterable) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for p in points:
            fh.write(format_point(p) + "\n")


def synth_nodes(points: Iterable, chunk: int = 10) -> Iterator[ProbabilisticNode]:
    """Uniform nodes of weight 1 from consecutive chunks of points.

    A trailing partial chunk is dropped.
    """
    if chunk < 1:
        raise InvalidInputError("chunk must be >= 1")
    buf = []
    probs = np.full(chunk, 1.0 / chunk)
    index = 0
    for p in points:
        buf.append(p)
        if len(buf) == chunk:
            yield ProbabilisticNode(np.array(buf), probs, 1.0, str(index))
            index += 1
            buf = []


def node_to_dict(v: ProbabilisticNode, coreset_weight=None) -> dict:
    d = {
        "id": v.id,
        "weight": v.weight,
        "realizations": [{"p": float(p), "x": [float(c) for c in x]} for x, p in zip(v.points, v.probs)],
    }
    if coreset_weight is not None:
        d["coreset_weight"] = float(coreset_weight)
    return d


def node_from_dict(d: dict) -> tuple[ProbabilisticNode, float | None]:
    if not isinstance(d, dict):
        raise InvalidInputError("node line must be a JSON object")
    reals = d.get("realizations")
    if not isinstance(reals, list) or not reals:
        raise InvalidInputError("node needs a non-empty 'realizations' list")
    try:
        pts = [r["x"] for r in reals]
        probs = [r["p"] for r in reals]
    except (KeyError, TypeError):
        raise InvalidInputError("each realization needs 'p' and 'x'") from None
    dims = {len(x) if isinstance(x, list) else -1 for x in pts}
    if len(dims) != 1 or -1 in dims:
        raise DimensionMismatchError("realizations of one node differ in dimension")
    try:
        pts = np.array(pts, dtype=np.float64)
        probs = np.array(probs, dtype=np.float64)
    except (TypeError, ValueError):
        raise InvalidInputError("non-numeric realization field") from None
    node_id = d.get("id")
    v = ProbabilisticNode(pts, probs, d.get("weight", 1.0), None if node_id is None else str(node_id))
    cw = d.get("coreset_weight")
    return v, (None if cw is None else float(cw))


def _iter_node_lines(path) -> Iterator[tuple[int, ProbabilisticNode, float | None]]:
    dim = None
    for lineno, s in _data_lines(path):
        try:
            v, cw = node_from_dict(json.loads(s))
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON ({exc.msg})", path, lineno) from None
        except ProbiError as exc:
            raise type(exc)(f"{path}:{lineno}: {exc}") if not isinstance(exc, ParseError) else exc
        if dim is None:
            dim = v.dim
        elif v.dim != dim:
            raise DimensionMismatchError(f"{path}:{lineno}: dimension {v.dim}, expected {dim}")
        yield lineno, v, cw


def iter_nodes(path) -> Iterator[ProbabilisticNode]:
    """Stream the nodes of a node (or coreset) file."""
    for _, v, _ in _iter_node_lines(path):
        yield v


def write_nodes(path, nodes: Iterable[ProbabilisticNode]) -> int:
    n = 0
    with open(path, "w", encoding="utf-8") as fh:
        for v in nodes:
            fh.write(json.dumps(node_to_dict(v)) + "\n")
            n += 1
    return n


def read_meta(path) -> dict | None:
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            s = line.strip()
            if not s:
                continue
            if s.startswith(META_PREFIX):
                try:
                    return json.loads(s[len(META_PREFIX):])
                except json.JSONDecodeError as exc:
                    raise ParseError(f"invalid meta header ({exc.msg})", path, 1) from None
            return None
    return None


def write_coreset(path, ns: NodeSet, meta: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(META_PREFIX + json.dumps(meta, sort_keys=True) + "\n")
        for i in range(len(ns)):
            fh.write(json.dumps(node_to_dict(ns.node(i), ns.weights[i])) + "\n")


def read_node_set(path) -> tuple[NodeSet, dict | None]:
    """Load a node or coreset file; coreset files use ``coreset_weight`` as effective weight."""
    meta = read_meta(path)
    nodes, weights = [], []
    for lineno, v, cw in _iter_node_lines(path):
        if meta is not None and cw is None:
            raise ParseError("coreset line without coreset_weight", path, lineno)
        nodes.append(v)
        weights.append(v.weight if cw is None else cw)
    if not nodes:
        raise ParseError("no nodes in file", path)
    try:
        ns = NodeSet.from_nodes(nodes, weights)
    except InvalidInputError as exc:
        raise type(exc)(f"{path}: {exc}") from None
    if meta is not None and "total_weight" in meta:
        total = float(meta["total_weight"])
        if abs(ns.total_weight - total) > 1e-9 * max(1.0, abs(total)):
            raise ParseError(f"coreset weights sum to {ns.total_weight!r}, meta says {total!r}", path)
    return ns, meta


def read_centers(path) -> np.ndarray:
    return np.array(list(read_points(path)))
