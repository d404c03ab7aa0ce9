"""Summary-vs-full cost evaluation and run statistics."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Iterable

import numpy as np

from .errors import EmptyInputError
from .model import NodeSet

DEFAULT_METRICS = (
    "cost_on_summary",
    "cost_on_full",
    "rel_diff",
    "runtime_coreset_ms",
    "runtime_solve_ms",
    "coreset_size",
)


@dataclass(frozen=True)
class EvalReport:
    k: int
    cost_on_summary: float
    cost_on_full: float
    rel_diff: float
    degenerate: bool = False
    runtime_coreset_ms: float | None = None
    runtime_solve_ms: float | None = None
    seed: int | None = None
    coreset_size: int | None = None
    node_count: int | None = None

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class MetricStats:
    mean: float
    median: float
    variance_coefficient: float
    count: int


@dataclass(frozen=True)
class RunStatistics:
    metrics: dict

    def __getitem__(self, name) -> MetricStats:
        return self.metrics[name]

    def to_dict(self) -> dict:
        return {name: asdict(s) for name, s in self.metrics.items()}


def relative_difference(cost_on_full: float, cost_on_summary: float) -> tuple[float, bool]:
    """``(full - summary) / full``; ``(0.0, True)`` when the full cost is zero."""
    if cost_on_full == 0:
        return 0.0, True
    return (cost_on_full - cost_on_summary) / cost_on_full, False


def evaluate(summary, full_nodes, C, *, k=None, seed=None, runtime_coreset_ms=None,
             runtime_solve_ms=None) -> EvalReport:
    """Cost of center set ``C`` on the summary and on the full data."""
    s = summary if isinstance(summary, NodeSet) else NodeSet.from_any(getattr(summary, "nodes", summary))
    f = full_nodes if isinstance(full_nodes, NodeSet) else NodeSet.from_any(full_nodes)
    on_summary = s.cost(C)
    on_full = s.cost(C) if f is s else f.cost(C)
    rel, degenerate = relative_difference(on_full, on_summary)
    return EvalReport(
        k=len(C) if k is None else k,
        cost_on_summary=on_summary,
        cost_on_full=on_full,
        rel_diff=rel,
        degenerate=degenerate,
        runtime_coreset_ms=runtime_coreset_ms,
        runtime_solve_ms=runtime_solve_ms,
        seed=seed,
        coreset_size=len(s),
        node_count=len(f),
    )


def summarize(values: Iterable[float]) -> MetricStats:
    """Mean, lower median and population coefficient of variation."""
    x = np.asarray(list(values), dtype=np.float64)
    if x.size == 0:
        raise EmptyInputError("no values to summarize")
    mean = float(x.mean())
    median = float(np.sort(x)[(x.size - 1) // 2])
    std = float(x.std())
    varcoef = std / abs(mean) if mean != 0 else 0.0
    return MetricStats(mean, median, varcoef, int(x.size))


def aggregate(reports, metrics=DEFAULT_METRICS) -> RunStatistics:
    """Per-metric statistics over reports; metrics missing from every report are skipped."""
    reports = list(reports)
    if not reports:
        raise EmptyInputError("no reports to aggregate")
    out = {}
    for name in metrics:
        vals = [getattr(r, name) if not isinstance(r, dict) else r.get(name) for r in reports]
        vals = [v for v in vals if v is not None]
        if vals:
            out[name] = summarize(vals)
    return RunStatistics(out)
