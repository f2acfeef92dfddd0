import numpy as np
import pytest

from lediflow import _pykernels, kernels

_ckernels = pytest.importorskip("lediflow._ckernels")


def test_backend_reported():
    assert kernels.BACKEND in ("cython", "python")


@pytest.mark.parametrize("dtype,tol", [(np.float32, 2e-6), (np.float64, 1e-14)])
def test_silu_parity(dtype, tol, rng):
    pre = (rng.standard_normal((37, 19)) * 6).astype(dtype)
    pre[0, :5] = [0.0, -100.0, 100.0, -88.5, 88.5]
    outs = {}
    for name, impl in (("c", _ckernels), ("py", _pykernels)):
        out, sig = np.empty_like(pre), np.empty_like(pre)
        impl.silu_forward(pre, out, sig)
        grad = np.ones_like(pre)
        dpre = np.empty_like(pre)
        impl.silu_backward(grad, pre, sig, dpre)
        outs[name] = (out, sig, dpre)
    ref = 1.0 / (1.0 + np.exp(-pre.astype(np.float64)))
    for a, b in zip(outs["c"], outs["py"]):
        assert np.all(np.isfinite(a))
        assert np.max(np.abs(a.astype(np.float64) - b) / np.maximum(1.0, np.abs(b))) <= tol
    assert np.max(np.abs(outs["c"][1] - ref)) <= tol


def test_silu_float32_relative_accuracy():
    x = np.linspace(-80, 80, 100_001, dtype=np.float32)[None]
    out, sig = np.empty_like(x), np.empty_like(x)
    _ckernels.silu_forward(x, out, sig)
    ref = 1.0 / (1.0 + np.exp(-x.astype(np.float64)))
    assert np.max(np.abs(sig - ref) / ref) < 1e-6


@pytest.mark.parametrize("dtype", [np.float32, np.float64])
def test_adamw_parity(dtype, rng):
    n = 1001
    state = {}
    for name, impl in (("c", _ckernels), ("py", _pykernels)):
        r = np.random.default_rng(0)
        p = r.standard_normal(n).astype(dtype)
        m, v = np.zeros_like(p), np.zeros_like(p)
        for step in range(1, 6):
            g = r.standard_normal(n).astype(dtype)
            impl.adamw_update(p, g, m, v, 1e-2, 0.9, 0.99, 1e-8, 0.01, 1 - 0.9 ** step, 1 - 0.99 ** step)
        state[name] = (p, m, v)
    tol = 1e-5 if dtype == np.float32 else 1e-12
    for a, b in zip(state["c"], state["py"]):
        assert np.allclose(a, b, rtol=tol, atol=tol)


@pytest.mark.parametrize("skip", [False, True])
def test_rbf_parity(skip, rng):
    a = rng.standard_normal((50, 3))
    b = a.copy() if skip else rng.standard_normal((40, 3))
    got_c = _ckernels.rbf_pair_sum(a, b, 0.7, skip)
    got_py = _pykernels.rbf_pair_sum(a, b, 0.7, skip)
    d2 = ((a[:, None] - b[None]) ** 2).sum(-1)
    k = np.exp(-0.7 * d2)
    ref = k.sum() - (np.trace(k) if skip else 0.0)
    assert got_c == pytest.approx(ref, rel=1e-12)
    assert got_py == pytest.approx(ref, rel=1e-12)


def test_empty_inputs():
    e = np.zeros((0, 4), np.float32)
    _ckernels.silu_forward(e, e.copy(), e.copy())
    assert _ckernels.rbf_pair_sum(np.zeros((0, 2)), np.zeros((3, 2)), 1.0, False) == 0.0
