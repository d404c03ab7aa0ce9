"""Command-line interface: ``probi synth|coreset|solve|eval|bench``.

Every option can also come from an environment variable named
``PROBI_<OPTION>`` (upper case, dashes as underscores); an explicit flag
wins.  Failures exit non-zero with a JSON error object on stderr.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

from . import io
from .coreset import CoresetConfig
from .errors import DimensionMismatchError, InvalidInputError, ProbiError
from .eval import aggregate, evaluate
from .pipeline import PipelineConfig, run_pipeline
from .solver import SolverConfig, solve
from .stream import StreamConfig, StreamState

ENV_PREFIX = "PROBI_"
TIMING_METRICS = ("runtime_coreset_ms", "runtime_solve_ms")


def _env_bool(value: str) -> bool:
    return value.strip().lower() in ("1", "true", "yes", "on")


def _add(parser, flag, *, type=str, default=None, required=False, help=None, action=None):
    dest = flag.lstrip("-").replace("-", "_")
    env = os.environ.get(ENV_PREFIX + dest.upper())
    if action == "store_true":
        d = _env_bool(env) if env is not None else False
        parser.add_argument(flag, dest=dest, action="store_true", default=d, help=help)
        return
    if env is not None:
        default, required = type(env), False
    parser.add_argument(flag, dest=dest, type=type, default=default, required=required, help=help)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="probi", description="Streaming coresets for probabilistic k-median.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("synth", help="group a point file into uniform nodes")
    _add(s, "--points", required=True, help="input point file")
    _add(s, "--out", required=True, help="output node file (JSON lines)")
    _add(s, "--chunk", type=int, default=10, help="points per node")

    s = sub.add_parser("coreset", help="single-pass streaming coreset of a node file")
    _add(s, "--nodes", required=True)
    _add(s, "--out", required=True)
    _add(s, "--k", type=int, required=True)
    _add(s, "--bucket-capacity", type=int, help="raw buffer size N (default 200*k)")
    _add(s, "--sample-constant", type=float, default=200.0)
    _add(s, "--epsilon", type=float, default=0.1)
    _add(s, "--seed", type=int, default=0)
    _add(s, "--keep-duplicates", action="store_true", help="do not merge repeated draws inside reduce steps")

    s = sub.add_parser("solve", help="P-LLOYD++ on a node or coreset file")
    _add(s, "--input", required=True)
    _add(s, "--k", type=int, required=True)
    _add(s, "--restarts", type=int, default=1)
    _add(s, "--max-iters", type=int, default=10)
    _add(s, "--seed", type=int, default=0)
    _add(s, "--out", required=True, help="centers file, one center per line")

    s = sub.add_parser("eval", help="cost of centers on summary and full data")
    _add(s, "--nodes", required=True)
    _add(s, "--summary")
    _add(s, "--centers", required=True)
    _add(s, "--out", required=True)

    s = sub.add_parser("bench", help="repeat the full pipeline and report run statistics")
    _add(s, "--nodes", required=True)
    _add(s, "--k", type=int, required=True)
    _add(s, "--reps", type=int, default=100)
    _add(s, "--seed", type=int, default=0)
    _add(s, "--bucket-capacity", type=int)
    _add(s, "--sample-constant", type=float, default=200.0)
    _add(s, "--restarts", type=int, default=1)
    _add(s, "--out", required=True)
    _add(s, "--no-timings", action="store_true", help="omit wall-clock metrics (byte-reproducible output)")
    return p


def _check_k(k):
    if k < 1:
        raise InvalidInputError(f"k must be >= 1, got {k}")


def _write_json(path, obj):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def cmd_synth(a):
    n = io.write_nodes(a.out, io.synth_nodes(io.read_points(a.points), a.chunk))
    return {"nodes": n}


def cmd_coreset(a):
    _check_k(a.k)
    cc = CoresetConfig(k=a.k, sample_constant=a.sample_constant, epsilon=a.epsilon, rng_seed=a.seed)
    cfg = StreamConfig(cc, a.bucket_capacity, merge_duplicates=not a.keep_duplicates)
    state = StreamState(cfg).extend(io.iter_nodes(a.nodes))
    summary = state.finalize()
    meta = {
        "format": "probi-coreset/1",
        "k": a.k,
        "seed": a.seed,
        "epsilon": a.epsilon,
        "sample_constant": a.sample_constant,
        "bucket_capacity": cfg.bucket_capacity,
        "total_weight": summary.source_weight,
        "source_count": summary.source_count,
        "coreset_size": len(summary),
        "reduces": state.reduces,
    }
    io.write_coreset(a.out, summary.nodes, meta)
    return {"coreset_size": len(summary), "source_count": summary.source_count, "peak_live_nodes": state.peak_live}


def cmd_solve(a):
    _check_k(a.k)
    ns, _ = io.read_node_set(a.input)
    sol = solve(ns, SolverConfig(k=a.k, max_iterations=a.max_iters, restarts=a.restarts, rng_seed=a.seed))
    io.write_points(a.out, sol.centers)
    return {"k": len(sol.centers), "cost": sol.cost}


def cmd_eval(a):
    full, _ = io.read_node_set(a.nodes)
    summary = full
    if a.summary is not None:
        summary, _ = io.read_node_set(a.summary)
    C = io.read_centers(a.centers)
    if C.shape[1] != full.dim or summary.dim != full.dim:
        raise DimensionMismatchError("centers, nodes and summary must share one dimension")
    report = evaluate(summary, full, C)
    _write_json(a.out, report.to_dict())
    return {"rel_diff": report.rel_diff}


def cmd_bench(a):
    _check_k(a.k)
    if a.reps < 1:
        raise InvalidInputError("reps must be >= 1")
    full, _ = io.read_node_set(a.nodes)
    reports = []
    for r in range(a.reps):
        cfg = PipelineConfig(k=a.k, seed=a.seed + r, bucket_capacity=a.bucket_capacity,
                             sample_constant=a.sample_constant, restarts=a.restarts)
        res = run_pipeline(lambda: io.iter_nodes(a.nodes), full, cfg)
        d = res.report.to_dict()
        if a.no_timings:
            for key in TIMING_METRICS:
                d.pop(key)
        reports.append(d)
    stats = aggregate(reports)
    out = {"k": a.k, "reps": a.reps, "seed": a.seed, "node_count": len(full),
           "statistics": stats.to_dict(), "reports": reports}
    _write_json(a.out, out)
    return {"reps": a.reps}


COMMANDS = {"synth": cmd_synth, "coreset": cmd_coreset, "solve": cmd_solve, "eval": cmd_eval, "bench": cmd_bench}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    start = time.perf_counter()
    try:
        info = COMMANDS[args.command](args)
    except ProbiError as exc:
        print(json.dumps(exc.to_dict()), file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(json.dumps({"error": "missing_file", "message": str(exc), "path": exc.filename}), file=sys.stderr)
        return 2
    except OSError as exc:
        print(json.dumps({"error": "io_error", "message": str(exc)}), file=sys.stderr)
        return 2
    info["command"] = args.command
    info["elapsed_ms"] = round((time.perf_counter() - start) * 1e3, 3)
    print(json.dumps(info, sort_keys=True))
    return 0


if __name__ == "__main__":
    sys.exit(main())
