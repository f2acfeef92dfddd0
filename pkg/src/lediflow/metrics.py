"""Sample-set distances and the steps-versus-quality sweep."""

from __future__ import annotations

import csv
import time

import numpy as np

from . import kernels
from .core import seeded_rng


def _as_set(a, name):
    a = np.asarray(a, dtype=np.float64)
    if a.ndim == 1:
        a = a[:, None]
    if a.ndim != 2 or len(a) == 0:
        raise ValueError(f"{name} must be a non-empty (n, d) sample set")
    return np.ascontiguousarray(a)


def wasserstein2_1d_sorted(a_sorted, b_sorted):
    """Squared W2 between two empirical 1-D measures given sorted values.

    Works column-wise on ``(n, p)`` / ``(m, p)`` arrays and handles n != m by
    integrating the squared quantile difference over the merged CDF levels.
    """
    n, m = len(a_sorted), len(b_sorted)
    if n == m:
        return np.mean((a_sorted - b_sorted) ** 2, axis=0)
    levels = np.union1d(np.arange(1, n + 1) / n, np.arange(1, m + 1) / m)
    widths = np.diff(np.concatenate([[0.0], levels]))
    ia = np.minimum(np.searchsorted(np.arange(1, n + 1) / n, levels - 1e-12), n - 1)
    ib = np.minimum(np.searchsorted(np.arange(1, m + 1) / m, levels - 1e-12), m - 1)
    diff = a_sorted[ia] - b_sorted[ib]
    return widths @ (diff ** 2)


def random_directions(dim, count, rng):
    u = rng.standard_normal((count, dim))
    return u / np.linalg.norm(u, axis=1, keepdims=True)


def sliced_w2(a, b, projections=128, rng=None, seed=0):
    """Mean over random unit directions of the 1-D squared Wasserstein-2 distance."""
    a = _as_set(a, "a")
    b = _as_set(b, "b")
    if a.shape[1] != b.shape[1]:
        raise ValueError(f"dimension mismatch: {a.shape[1]} vs {b.shape[1]}")
    if projections < 1:
        raise ValueError("projections must be >= 1")
    rng = rng if rng is not None else seeded_rng(seed)
    dirs = random_directions(a.shape[1], projections, rng)
    pa = np.sort(a @ dirs.T, axis=0)
    pb = np.sort(b @ dirs.T, axis=0)
    return float(np.mean(wasserstein2_1d_sorted(pa, pb)))


def median_bandwidth(a, b, max_points=1000, seed=0):
    """Median pairwise distance over the pooled sample (subsampled if large)."""
    pooled = np.concatenate([_as_set(a, "a"), _as_set(b, "b")])
    if len(pooled) > max_points:
        pooled = pooled[seeded_rng(seed).choice(len(pooled), max_points, replace=False)]
    sq = np.sum(pooled ** 2, axis=1)
    d2 = sq[:, None] + sq[None, :] - 2.0 * pooled @ pooled.T
    iu = np.triu_indices(len(pooled), k=1)
    med = float(np.sqrt(np.median(np.maximum(d2[iu], 0.0))))
    return med if med > 0 else 1.0


def mmd_rbf(a, b, bandwidth=None):
    """Unbiased MMD^2 with kernel ``exp(-|u - v|^2 / (2 bandwidth^2))``.

    Defaults to the median-distance bandwidth. With equal set sizes this is
    the paired U-statistic, which also drops the ``k(a_i, b_i)`` cross terms
    and is therefore exactly zero when ``a`` and ``b`` are the same array.
    Being unbiased, the estimate can dip slightly below zero when both sets
    share a distribution.
    """
    a = _as_set(a, "a")
    b = _as_set(b, "b")
    if len(a) < 2 or len(b) < 2:
        raise ValueError("unbiased MMD needs at least two points per set")
    if bandwidth is None:
        bandwidth = median_bandwidth(a, b)
    if not bandwidth > 0:
        raise ValueError(f"bandwidth must be positive, got {bandwidth}")
    gamma = 1.0 / (2.0 * bandwidth ** 2)
    n, m = len(a), len(b)
    kaa = kernels.rbf_pair_sum(a, a, gamma, True) / (n * (n - 1))
    kbb = kernels.rbf_pair_sum(b, b, gamma, True) / (m * (m - 1))
    if n == m:
        kab = kernels.rbf_pair_sum(a, b, gamma, True) / (n * (n - 1))
    else:
        kab = kernels.rbf_pair_sum(a, b, gamma, False) / (n * m)
    return float(kaa + kbb - 2.0 * kab)


def mmd_permutation_null(a, b, bandwidth, permutations=100, seed=0):
    """MMD^2 values after random relabelling of the pooled sample."""
    a = _as_set(a, "a")
    b = _as_set(b, "b")
    pooled = np.concatenate([a, b])
    rng = seeded_rng(seed)
    out = np.empty(permutations)
    for i in range(permutations):
        perm = rng.permutation(len(pooled))
        out[i] = mmd_rbf(pooled[perm[:len(a)]], pooled[perm[len(a):]], bandwidth)
    return out


def step_sweep(generator, reference, steps_list, metric=None):
    """Evaluate ``generator(steps)`` against ``reference`` for each step count.

    Returns rows ``{"steps", "metric", "seconds_per_batch"}``; the wall time
    covers generation only.
    """
    steps_list = list(steps_list)
    if not steps_list:
        raise ValueError("steps_list must be non-empty")
    metric = metric or sliced_w2
    rows = []
    for steps in steps_list:
        start = time.perf_counter()
        samples = generator(steps)
        elapsed = time.perf_counter() - start
        rows.append({"steps": steps, "metric": metric(samples, reference),
                     "seconds_per_batch": elapsed})
    return rows


SWEEP_HEADER = ["method", "prior", "solver", "steps", "metric", "seconds_per_batch"]


def write_sweep_csv(path, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=SWEEP_HEADER, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: row[k] for k in SWEEP_HEADER})


def write_plot_script(path, csv_name, ylabel="sliced W2"):
    """Gnuplot script drawing metric versus seconds per batch, one series per prior."""
    script = f"""set datafile separator ','
set key autotitle columnhead
set xlabel 'seconds per batch'
set ylabel '{ylabel}'
set logscale y
set terminal pngcairo size 800,600
set output 'sweep.png'
plot '{csv_name}' using (strcol(2) eq 'gaussian' ? $6 : 1/0):5 with linespoints title 'gaussian prior', \\
     '{csv_name}' using (strcol(2) eq 'learned' ? $6 : 1/0):5 with linespoints title 'learned prior'
"""
    with open(path, "w") as fh:
        fh.write(script)
