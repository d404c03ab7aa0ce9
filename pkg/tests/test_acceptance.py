"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py -v -s`` (or plain
``python3 tests/test_acceptance.py``); the session summary repeats every
line under "acceptance criteria".
"""

import json
import math
import os
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest
from scipy.stats import chisquare

from probi import io
from probi.centers import CenterComputeConfig, compute_center_set, kmedianpp_seed
from probi.cli import main as cli_main
from probi.coreset import CoresetConfig, compute_coreset
from probi.errors import CoincidentIterate
from probi.model import NodeSet, ProbabilisticNode
from probi.onemedian import approximate_one_median, brute_force_one_median, weighted_cost, weiszfeld_step
from probi.pipeline import PipelineConfig, run_pipeline
from probi.rng import make_rng
from probi.solver import SolverConfig, plloyd_seed, solve
from probi.stream import StreamConfig, StreamState

from helpers import blob_nodes, census_like, covertype_like, criterion, random_nodes

HERE = Path(__file__).resolve().parent


def test_c01_one_median_oracle_equivalence():
    with criterion(1, "1-median vs grid oracle, 200 instances, ratio <= 1.01, < 30 s") as c:
        rng = np.random.default_rng(101)
        t0 = time.perf_counter()
        worst = 0.0
        for _ in range(200):
            d = int(rng.integers(1, 3))
            n = int(rng.integers(2, 51))
            X = rng.uniform(-10, 10, (n, d)) * rng.uniform(0.1, 1.0)
            w = rng.uniform(0.1, 5.0, n)
            got = approximate_one_median(X, w).cost
            oracle = weighted_cost(X, w, brute_force_one_median(X, w, resolution=1e-3))
            worst = max(worst, got / oracle)
        elapsed = time.perf_counter() - t0
        c.ok = worst <= 1.01 and elapsed < 30
        c.detail = f"worst ratio {worst:.5f}, {elapsed:.1f} s"


def test_c02_weiszfeld_descent():
    with criterion(2, "Weiszfeld steps never increase cost, 1000 steps, rel tol 1e-9") as c:
        rng = np.random.default_rng(202)
        steps, bad, worst = 0, 0, -np.inf
        while steps < 1000:
            n, d = int(rng.integers(2, 40)), int(rng.integers(1, 4))
            X = rng.normal(size=(n, d)) * rng.uniform(0.01, 100)
            w = rng.uniform(0.1, 10, n)
            y = rng.normal(size=d) * rng.uniform(0.01, 100) if rng.random() < 0.5 else (w @ X) / w.sum()
            for _ in range(10):
                try:
                    nxt = weiszfeld_step(X, w, y)
                except CoincidentIterate:
                    break
                before, after = weighted_cost(X, w, y), weighted_cost(X, w, nxt)
                worst = max(worst, (after - before) / before)
                bad += after > before * (1 + 1e-9)
                steps += 1
                y = nxt
        c.ok = bad == 0
        c.detail = f"{steps} steps, {bad} increases, largest relative change {worst:+.2e}"


def test_c03_coreset_unbiasedness():
    with criterion(3, "coreset cost unbiased: 1000 reruns within 3 SE and 2%, < 2 min") as c:
        rng = np.random.default_rng(303)
        full = NodeSet.from_nodes(random_nodes(rng, 2000, d=2, m=5, spread=2.0, scale=30.0, weights=True))
        lo, hi = full.bounding_box()
        C = rng.uniform(lo, hi, (5, 2))
        target = full.cost(C)
        cfg = CoresetConfig(k=5)
        t0 = time.perf_counter()
        est = np.array([compute_coreset(full, cfg, make_rng(seed)).cost(C) for seed in range(1000)])
        elapsed = time.perf_counter() - t0
        mean = est.mean()
        se = est.std(ddof=1) / math.sqrt(est.size)
        z = (mean - target) / se
        rel = abs(mean - target) / target
        c.ok = abs(z) <= 3 and rel <= 0.02 and elapsed < 120
        c.detail = f"z = {z:+.2f}, relative error {rel:.4%}, {elapsed:.1f} s"


def test_c04_weight_conservation():
    with criterion(4, "weight conservation to 1e-9 relative: batch, per bucket, streaming") as c:
        worst, instances = 0.0, 0
        for seed in range(20):
            rng = np.random.default_rng(400 + seed)
            n = int(rng.integers(1, 600))
            ns = NodeSet.from_nodes(random_nodes(rng, n, d=int(rng.integers(1, 4)), m=int(rng.integers(1, 6)),
                                                 partial=True, weights=True))
            cfg = CoresetConfig(k=int(rng.integers(1, 6)), sample_constant=float(rng.uniform(1, 300)),
                                rng_seed=seed, merge_duplicates=bool(seed % 2))
            cs = compute_coreset(ns, cfg)
            worst = max(worst, abs(cs.total_weight - ns.total_weight) / ns.total_weight)
            for b in cs.buckets.values():
                worst = max(worst, abs(b.emitted_weight - b.weight) / b.weight)
            st = StreamState(StreamConfig(cfg, int(rng.integers(1, 80)), bool(seed % 3))).extend(ns.nodes())
            fin = st.finalize()
            pushed = float(ns.node_weights.sum())
            worst = max(worst, abs(fin.total_weight - pushed) / pushed)
            instances += 1
        c.ok = worst <= 1e-9
        c.detail = f"{instances} instances, worst relative deviation {worst:.1e}"


@pytest.mark.slow
def test_c05_merge_reduce_structure():
    with criterion(5, "occupied levels = binary representation of floor(n/N), n <= 1e5, N in {1,7,64}") as c:
        n = 100_000
        rng = np.random.default_rng(505)
        pts = rng.normal(size=(n, 2))
        vs = [ProbabilisticNode(pts[i:i + 1], [1.0]) for i in range(n)]
        mismatches, checks, elapsed = 0, 0, []
        for N in (1, 7, 64):
            t0 = time.perf_counter()
            st = StreamState(StreamConfig(CoresetConfig(k=1, sample_constant=1.0, rng_seed=N), N))
            for i, v in enumerate(vs):
                st.push(v)
                q = (i + 1) // N
                expected = [b + 1 for b in range(q.bit_length()) if q >> b & 1]
                mismatches += st.occupied_levels() != expected
                checks += 1
            elapsed.append(f"N={N}: {time.perf_counter() - t0:.0f} s")
        c.ok = mismatches == 0
        c.detail = f"{checks} checks, {mismatches} mismatches; " + ", ".join(elapsed)


def test_c06_stream_vs_batch():
    with criterion(6, "stream vs batch summary cost gap <= 0.25 of full cost, 4N nodes, 10 center sets") as c:
        rng = np.random.default_rng(606)
        k = 5
        cc = CoresetConfig(k=k, rng_seed=6)
        N = StreamConfig(cc).bucket_capacity
        vs = blob_nodes(rng, 4 * N, rng.uniform(-50, 50, (k, 5)), 2.0, m=5)
        full = NodeSet.from_nodes(vs)
        streamed = StreamState(StreamConfig(cc)).extend(vs).finalize()
        batch = compute_coreset(full, cc)
        lo, hi = full.bounding_box()
        gaps = []
        for _ in range(10):
            C = rng.uniform(lo, hi, (k, 5))
            gaps.append(abs(streamed.cost(C) - batch.cost(C)) / full.cost(C))
        c.ok = max(gaps) <= 0.25
        c.detail = f"N = {N}, {4 * N} nodes, worst gap {max(gaps):.4f}"


@pytest.mark.slow
def test_c07_census_like_quality():
    with criterion(7, "Census-like: cost <= 1.1x solve(full) and |rel_diff| < 0.05 in >= 90/100, < 5 min") as c:
        t0 = time.perf_counter()
        vs = census_like()
        full = NodeSet.from_nodes(vs)
        ref = solve(full, SolverConfig(k=10, restarts=10, rng_seed=10**6)).cost
        good, worst_ratio, worst_rel = 0, 0.0, 0.0
        for seed in range(100):
            rep = run_pipeline(vs, full, PipelineConfig(k=10, seed=seed, restarts=15)).report
            ratio = rep.cost_on_full / ref
            worst_ratio, worst_rel = max(worst_ratio, ratio), max(worst_rel, abs(rep.rel_diff))
            good += ratio <= 1.1 and abs(rep.rel_diff) < 0.05
        elapsed = time.perf_counter() - t0
        c.ok = good >= 90 and elapsed < 300
        c.detail = f"{good}/100 good, worst ratio {worst_ratio:.3f}, worst |rel_diff| {worst_rel:.4f}, {elapsed:.0f} s"


@pytest.mark.slow
def test_c08_covertype_like_quality():
    with criterion(8, "CoverType-like: cost within 2x of solve(full) in >= 90/100 runs, k in {10, 20}") as c:
        vs = covertype_like()
        full = NodeSet.from_nodes(vs)
        parts, ok = [], True
        for k in (10, 20):
            ref = solve(full, SolverConfig(k=k, restarts=3, rng_seed=10**6)).cost
            ratios = [run_pipeline(vs, full, PipelineConfig(k=k, seed=s)).report.cost_on_full / ref
                      for s in range(100)]
            good = sum(r <= 2.0 for r in ratios)
            ok &= good >= 90
            parts.append(f"k={k}: {good}/100, worst ratio {max(ratios):.3f}")
        c.ok = ok
        c.detail = "; ".join(parts)


def test_c09_seeding_distributions():
    with criterion(9, "seeding chi-square at 0.001 on the 3-point instance, both modules") as c:
        Y = np.array([[0.0], [1.0], [10.0]])
        ns = NodeSet.from_points(Y)
        expected = 10_000 * np.array([1 / 11, 10 / 11])
        pvals = []
        for seed_fn in (
            lambda s: kmedianpp_seed(Y, 2, make_rng(s), first_index=0),
            lambda s: plloyd_seed(ns, 2, make_rng(s), first_index=0),
        ):
            counts = np.zeros(3)
            for s in range(10_000):
                counts[int(seed_fn(s).centers[1, 0] == 10.0) + 1] += 1
            counts[0] = 0  # the fixed first center can never be drawn again
            pvals.append(chisquare(counts[1:], expected).pvalue)
        c.ok = min(pvals) > 1e-3
        c.detail = f"p = {pvals[0]:.3f} (centers), {pvals[1]:.3f} (solver)"


def test_c10_degenerate_equivalence():
    with criterion(10, "single-realization nodes: solver and centers trajectories identical, 50 instances") as c:
        rng = np.random.default_rng(1010)
        same = 0
        for i in range(50):
            n, d, k = int(rng.integers(3, 200)), int(rng.integers(1, 5)), int(rng.integers(1, 8))
            Y = rng.normal(size=(n, d)) * rng.uniform(1, 20)
            w = rng.uniform(0.2, 5.0, n)
            tc, ts = [], []
            A = compute_center_set(Y, CenterComputeConfig(k=k, restarts=2, rng_seed=i), weights=w, trajectories=tc)
            sol = solve(NodeSet.from_points(Y, w), SolverConfig(k=k, restarts=2, rng_seed=i), trajectories=ts)
            ok = len(tc) == len(ts) and all(
                len(a) == len(b) and all(np.array_equal(x, y) for x, y in zip(a, b)) for a, b in zip(tc, ts)
            )
            ok &= np.array_equal(A.centers, sol.centers.centers)
            same += ok
        c.ok = same == 50
        c.detail = f"{same}/50 identical"


def _run_cli(*argv):
    code = cli_main([str(a) for a in argv])
    assert code == 0, f"probi {' '.join(map(str, argv))} exited with {code}"


def test_c11_cli_determinism(tmp_path):
    with criterion(11, "every CLI subcommand byte-reproducible under a fixed seed") as c:
        rng = np.random.default_rng(1111)
        pts = tmp_path / "points.txt"
        io.write_points(pts, np.vstack([rng.normal(m, 1.0, (300, 3)) for m in (0.0, 8.0, -8.0)]))
        outputs = {}
        for run in ("a", "b"):
            d = tmp_path / run
            d.mkdir()
            _run_cli("synth", "--points", pts, "--out", d / "nodes.jsonl")
            _run_cli("coreset", "--nodes", d / "nodes.jsonl", "--out", d / "coreset.jsonl", "--k", 3,
                     "--bucket-capacity", 20, "--seed", 5)
            _run_cli("solve", "--input", d / "coreset.jsonl", "--k", 3, "--restarts", 2, "--seed", 5,
                     "--out", d / "centers.txt")
            _run_cli("eval", "--nodes", d / "nodes.jsonl", "--summary", d / "coreset.jsonl",
                     "--centers", d / "centers.txt", "--out", d / "report.json")
            _run_cli("bench", "--nodes", d / "nodes.jsonl", "--k", 3, "--reps", 3, "--seed", 5,
                     "--bucket-capacity", 20, "--no-timings", "--out", d / "bench.json")
            _run_cli("bench", "--nodes", d / "nodes.jsonl", "--k", 3, "--reps", 3, "--seed", 5,
                     "--bucket-capacity", 20, "--out", d / "bench_timed.json")
            outputs[run] = {p.name: p.read_bytes() for p in d.iterdir()}

        def strip_timings(raw):
            data = json.loads(raw)
            for r in data["reports"]:
                r.pop("runtime_coreset_ms"), r.pop("runtime_solve_ms")
            for key in ("runtime_coreset_ms", "runtime_solve_ms"):
                data["statistics"].pop(key)
            return data

        exact = [name for name in outputs["a"] if name != "bench_timed.json"]
        same = [name for name in exact if outputs["a"][name] == outputs["b"][name]]
        timed_same = strip_timings(outputs["a"]["bench_timed.json"]) == strip_timings(outputs["b"]["bench_timed.json"])
        c.ok = len(same) == len(exact) and timed_same
        c.detail = (f"{len(same)}/{len(exact)} files byte-identical; timed bench identical apart from "
                    f"wall-clock fields: {timed_same}")


_PERF_SCRIPT = """
import json, resource, sys, time
sys.path.insert(0, {tests!r})
from helpers import perf_nodes
from probi.coreset import CoresetConfig
from probi.stream import StreamConfig, StreamState
n, k = int(sys.argv[1]), int(sys.argv[2])
t0 = time.perf_counter()
st = StreamState(StreamConfig(CoresetConfig(k=k, rng_seed=k))).extend(perf_nodes(n, seed=k))
summary = st.finalize()
elapsed = time.perf_counter() - t0
print(json.dumps({{"seconds": elapsed, "peak_rss_mb": resource.getrusage(resource.RUSAGE_SELF).ru_maxrss / 1024,
                   "count": st.count, "size": len(summary), "peak_live": st.peak_live}}))
"""


def _perf_run(n, k):
    script = _PERF_SCRIPT.format(tests=str(HERE))
    out = subprocess.run([sys.executable, "-c", script, str(n), str(k)], check=True,
                         capture_output=True, text=True, env=os.environ.copy())
    return json.loads(out.stdout.strip().splitlines()[-1])


@pytest.mark.slow
def test_c12_performance_envelope():
    with criterion(12, "1e6 nodes (d=10, m=10) single pass: < 8 GB, < 10 min, time(k=20) <= 3x time(k=10)") as c:
        n = 1_000_000
        r10 = _perf_run(n, 10)
        r20 = _perf_run(n, 20)
        ratio = r20["seconds"] / r10["seconds"]
        mem = max(r10["peak_rss_mb"], r20["peak_rss_mb"])
        c.ok = (r10["count"] == r20["count"] == n and mem < 8 * 1024
                and max(r10["seconds"], r20["seconds"]) < 600 and ratio <= 3.0)
        c.detail = (f"k=10: {r10['seconds']:.0f} s, k=20: {r20['seconds']:.0f} s, ratio {ratio:.2f}, "
                    f"peak RSS {mem:.0f} MB, peak live nodes {max(r10['peak_live'], r20['peak_live'])}")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-s"]))
