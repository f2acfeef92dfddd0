import csv
import math

import numpy as np
import pytest

from lediflow.core import seeded_rng
from lediflow.metrics import (
    SWEEP_HEADER,
    median_bandwidth,
    mmd_permutation_null,
    mmd_rbf,
    sliced_w2,
    step_sweep,
    wasserstein2_1d_sorted,
    write_plot_script,
    write_sweep_csv,
)


def w2_by_replication(a, b):
    """Exact squared W2 of two 1-D empirical measures via lcm-fold replication."""
    n, m = len(a), len(b)
    L = n * m // math.gcd(n, m)
    qa = np.repeat(np.sort(a), L // n)
    qb = np.repeat(np.sort(b), L // m)
    return float(np.mean((qa - qb) ** 2))


def mmd_oracle(a, b, bandwidth):
    def k(u, v):
        d2 = ((u[:, None, :] - v[None, :, :]) ** 2).sum(-1)
        return np.exp(-d2 / (2 * bandwidth ** 2))

    n, m = len(a), len(b)
    kaa, kbb, kab = k(a, a), k(b, b), k(a, b)
    cross = (kab.sum() - np.trace(kab)) / (n * (n - 1)) if n == m else kab.mean()
    return ((kaa.sum() - np.trace(kaa)) / (n * (n - 1))
            + (kbb.sum() - np.trace(kbb)) / (m * (m - 1)) - 2 * cross)


@pytest.mark.parametrize("n,m", [(5, 5), (3, 5), (7, 4), (1, 6), (10, 15)])
def test_w2_1d_matches_replication_oracle(n, m):
    rng = seeded_rng(n * 31 + m)
    a, b = rng.standard_normal(n), rng.standard_normal(m) + 0.3
    got = wasserstein2_1d_sorted(np.sort(a)[:, None], np.sort(b)[:, None])[0]
    assert got == pytest.approx(w2_by_replication(a, b), rel=1e-12, abs=1e-15)


def test_sliced_w2_identical_sets_is_exactly_zero(rng):
    a = rng.standard_normal((500, 3))
    assert sliced_w2(a, a, 64) == 0.0
    assert sliced_w2(a, a[rng.permutation(500)], 64) == 0.0


def test_sliced_w2_symmetric_and_deterministic(rng):
    a = rng.standard_normal((300, 2))
    b = rng.standard_normal((200, 2)) * 1.5
    assert sliced_w2(a, b, 32, seed=4) == sliced_w2(b, a, 32, seed=4)
    assert sliced_w2(a, b, 32, seed=4) == sliced_w2(a, b, 32, seed=4)
    assert sliced_w2(a, b, 32) > 0


def test_sliced_w2_joint_permutation_invariance(rng):
    a, b = rng.standard_normal((100, 2)), rng.standard_normal((100, 2)) + 1
    pa, pb = rng.permutation(100), rng.permutation(100)
    assert sliced_w2(a, b, 16) == pytest.approx(sliced_w2(a[pa], b[pb], 16), rel=1e-12)


@pytest.mark.parametrize("d,c", [(2, 1.0), (4, 2.0)])
def test_sliced_w2_mean_shift_matches_analytic(d, c, rng):
    a = rng.standard_normal((10_000, d))
    b = a.copy()
    b[:, 0] += c
    # shifting a copy makes every projection a pure translation, so the
    # estimate is c^2 * mean(u_1^2) over the drawn directions
    assert sliced_w2(a, b, 512) == pytest.approx(c * c / d, rel=0.1)


def test_sliced_w2_one_dimensional_equals_w2(rng):
    a, b = rng.standard_normal(40), rng.standard_normal(60)
    assert sliced_w2(a, b, 5) == pytest.approx(w2_by_replication(a, b), rel=1e-12)


def test_sliced_w2_errors():
    with pytest.raises(ValueError):
        sliced_w2(np.zeros((0, 2)), np.zeros((3, 2)))
    with pytest.raises(ValueError):
        sliced_w2(np.zeros((3, 2)), np.zeros((3, 3)))
    with pytest.raises(ValueError):
        sliced_w2(np.zeros((3, 2)), np.zeros((3, 2)), projections=0)


@pytest.mark.parametrize("m", [45, 60])
def test_mmd_matches_direct_oracle(m, rng):
    a = rng.standard_normal((60, 3))
    b = rng.standard_normal((m, 3)) + 0.5
    for bw in (0.5, 1.0, 3.0):
        assert mmd_rbf(a, b, bw) == pytest.approx(mmd_oracle(a, b, bw), rel=1e-10, abs=1e-13)


def test_mmd_same_distribution_within_permutation_noise(rng):
    a = rng.standard_normal((200, 2))
    b = rng.standard_normal((200, 2))
    bw = median_bandwidth(a, b)
    null = mmd_permutation_null(a, b, bw, permutations=100, seed=1)
    stat = mmd_rbf(a, b, bw)
    assert abs(stat) <= 3 * null.std()


def test_mmd_far_clusters_large(rng):
    a = rng.standard_normal((100, 2)) * 0.1
    b = rng.standard_normal((100, 2)) * 0.1 + 50.0
    assert mmd_rbf(a, b, 1.0) > 0.5
    assert mmd_rbf(a, b) > 0.5


def test_mmd_identical_sets_near_zero(rng):
    a = rng.standard_normal((100, 2))
    assert abs(mmd_rbf(a, a, 1.0)) <= 1e-12
    assert abs(mmd_rbf(a, a.copy())) <= 1e-12


def test_mmd_errors(rng):
    a = rng.standard_normal((10, 2))
    with pytest.raises(ValueError):
        mmd_rbf(a, a, 0.0)
    with pytest.raises(ValueError):
        mmd_rbf(a, a, -1.0)
    with pytest.raises(ValueError):
        mmd_rbf(a[:1], a)


def test_median_bandwidth_two_points():
    assert median_bandwidth(np.array([[0.0, 0.0]]), np.array([[3.0, 4.0]])) == pytest.approx(5.0)


def test_step_sweep_rows(rng):
    ref = rng.standard_normal((100, 2))
    fixed = rng.standard_normal((100, 2))
    rows = step_sweep(lambda s: fixed, ref, [1, 2, 4])
    assert [r["steps"] for r in rows] == [1, 2, 4]
    assert len({r["metric"] for r in rows}) == 1
    assert all(r["seconds_per_batch"] >= 0 for r in rows)
    assert len(step_sweep(lambda s: fixed, ref, [3])) == 1
    with pytest.raises(ValueError):
        step_sweep(lambda s: fixed, ref, [])


def test_step_sweep_propagates_errors(rng):
    def boom(steps):
        raise RuntimeError("generator failed")

    with pytest.raises(RuntimeError):
        step_sweep(boom, rng.standard_normal((5, 2)), [1])


def test_sweep_csv_and_plot_script(tmp_path):
    rows = [{"method": "fm", "prior": "gaussian", "solver": "midpoint", "steps": 1,
             "metric": 0.5, "seconds_per_batch": 0.1}]
    write_sweep_csv(tmp_path / "s.csv", rows)
    with open(tmp_path / "s.csv") as fh:
        got = list(csv.reader(fh))
    assert got[0] == SWEEP_HEADER
    assert got[1][:4] == ["fm", "gaussian", "midpoint", "1"]
    write_plot_script(tmp_path / "s.gp", "s.csv")
    text = (tmp_path / "s.gp").read_text()
    assert "'s.csv'" in text and "learned" in text and "gaussian" in text
