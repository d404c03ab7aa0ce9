"""End-to-end PROBI run: streaming summary, solve on the summary, evaluate."""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Callable, Iterable

from .coreset import Coreset, CoresetConfig
from .eval import EvalReport, evaluate
from .model import NodeSet, ProbabilisticNode
from .solver import Solution, SolverConfig, solve
from .stream import StreamConfig, StreamState


@dataclass(frozen=True)
class PipelineConfig:
    k: int
    seed: int = 0
    bucket_capacity: int | None = None
    sample_constant: float = 200.0
    epsilon: float = 0.1
    restarts: int = 1
    max_iterations: int = 10
    merge_duplicates: bool = True

    def stream_config(self) -> StreamConfig:
        cc = CoresetConfig(k=self.k, sample_constant=self.sample_constant, epsilon=self.epsilon,
                           rng_seed=self.seed)
        return StreamConfig(cc, self.bucket_capacity, self.merge_duplicates)

    def solver_config(self) -> SolverConfig:
        return SolverConfig(k=self.k, max_iterations=self.max_iterations, restarts=self.restarts,
                            rng_seed=self.seed)


@dataclass(frozen=True)
class PipelineResult:
    summary: Coreset
    solution: Solution
    report: EvalReport
    stream: StreamState


def run_pipeline(nodes: Iterable[ProbabilisticNode] | Callable[[], Iterable[ProbabilisticNode]],
                 full: NodeSet, cfg: PipelineConfig) -> PipelineResult:
    """Stream ``nodes`` into a summary, solve on it, then score on ``full``."""
    source = nodes() if callable(nodes) else nodes
    t0 = time.perf_counter()
    state = StreamState(cfg.stream_config()).extend(source)
    summary = state.finalize()
    t1 = time.perf_counter()
    sol = solve(summary.nodes, cfg.solver_config())
    t2 = time.perf_counter()
    report = evaluate(summary.nodes, full, sol.centers, k=cfg.k, seed=cfg.seed,
                      runtime_coreset_ms=(t1 - t0) * 1e3, runtime_solve_ms=(t2 - t1) * 1e3)
    return PipelineResult(summary, sol, report, state)
