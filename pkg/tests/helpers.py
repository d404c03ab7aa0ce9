"""Synthetic data generators shared by the test modules."""

import numpy as np

from probi.model import ProbabilisticNode


def random_nodes(rng, n, d=2, m=5, spread=1.0, scale=10.0, weights=False, partial=False):
    """``n`` nodes with ``m`` realizations scattered around random anchors."""
    nodes = []
    for i in range(n):
        anchor = rng.uniform(-scale, scale, d)
        pts = anchor + rng.normal(0.0, spread, (m, d))
        p = rng.dirichlet(np.ones(m))
        if partial:
            p = p * rng.uniform(0.3, 1.0)
        w = float(rng.uniform(0.5, 3.0)) if weights else 1.0
        nodes.append(ProbabilisticNode(pts, p, w, str(i)))
    return nodes


def blob_nodes(rng, n, means, sigma, m=10):
    """Nodes whose ``m`` uniform realizations all come from one randomly chosen blob."""
    means = np.asarray(means, dtype=np.float64)
    labels = rng.integers(means.shape[0], size=n)
    pts = means[labels][:, None, :] + rng.normal(0.0, sigma, (n, m, means.shape[1]))
    probs = np.full(m, 1.0 / m)
    return [ProbabilisticNode(pts[i], probs, 1.0, str(i)) for i in range(n)]


def census_like(seed=0, n=10_000, k=10, separation=10.0):
    """``k`` blobs with pairwise mean distance ``separation`` and sigma 0.05 of it."""
    rng = np.random.default_rng(seed)
    means = np.eye(k) * separation / np.sqrt(2.0)
    return blob_nodes(rng, n, means, 0.05 * separation)


def covertype_like(seed=11, n=10_000, d=10, centers=30, m=10):
    """Heavily overlapping noisy data: close blob means, wide per-node noise."""
    rng = np.random.default_rng(seed)
    means = rng.normal(0.0, 1.0, (centers, d))
    labels = rng.integers(centers, size=n)
    anchors = means[labels] + rng.normal(0.0, 1.0, (n, d))
    pts = anchors[:, None, :] + rng.normal(0.0, 0.5, (n, m, d))
    probs = np.full(m, 1.0 / m)
    return [ProbabilisticNode(pts[i], probs, 1.0, str(i)) for i in range(n)]


def perf_nodes(n, d=10, m=10, seed=0, batch=10_000):
    """Generator of ``n`` nodes in ``d`` dimensions with ``m`` uniform realizations."""
    rng = np.random.default_rng(seed)
    means = rng.normal(0.0, 10.0, (20, d))
    probs = np.full(m, 1.0 / m)
    made = 0
    while made < n:
        b = min(batch, n - made)
        labels = rng.integers(20, size=b)
        pts = means[labels][:, None, :] + rng.normal(0.0, 1.0, (b, m, d))
        for i in range(b):
            yield ProbabilisticNode(pts[i], probs, 1.0, None)
        made += b


# one line per acceptance criterion, printed at the end of the session
ACCEPTANCE_RESULTS: dict = {}


def record(number, title, ok, detail=""):
    ACCEPTANCE_RESULTS[number] = (title, bool(ok), detail)
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:>2}: {title}" + (f" ({detail})" if detail else "")
    print(line, flush=True)
    return line


class criterion:
    """Context manager that records a criterion outcome, failing on any exception."""

    def __init__(self, number, title):
        self.number, self.title = number, title
        self.ok, self.detail = False, ""

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc_type is not None:
            record(self.number, self.title, False, f"{exc_type.__name__}: {exc}")
            return False
        record(self.number, self.title, self.ok, self.detail)
        assert self.ok, f"criterion {self.number} failed: {self.detail}"
        return False
