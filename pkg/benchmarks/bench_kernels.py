"""Compare the compiled kernels against their numpy twins.

    python3 benchmarks/bench_kernels.py [--repeat N]

Each row reports the median wall time per call for both backends and the
speedup. The last row times one full training step (forward, backward,
AdamW) of a width-128 regressor on a 256-sample batch, patching the backend
the model dispatches through.
"""

import argparse
import statistics
import time

import numpy as np

from lediflow import _pykernels, kernels
from lediflow.core import AdamW, ConditionedRegressor, seeded_rng

try:
    from lediflow import _ckernels
except ImportError:
    _ckernels = None


def timeit(fn, repeat):
    fn()
    samples = []
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        samples.append(time.perf_counter() - start)
    return statistics.median(samples)


def case_silu_forward(impl, rng):
    pre = rng.standard_normal((256, 128)).astype(np.float32)
    out, sig = np.empty_like(pre), np.empty_like(pre)
    return lambda: impl.silu_forward(pre, out, sig)


def case_silu_backward(impl, rng):
    pre = rng.standard_normal((256, 128)).astype(np.float32)
    grad = rng.standard_normal((256, 128)).astype(np.float32)
    out, sig = np.empty_like(pre), np.empty_like(pre)
    _pykernels.silu_forward(pre, out, sig)
    return lambda: impl.silu_backward(grad, pre, sig, out)


def case_adamw(impl, rng):
    n = 50_000
    param = rng.standard_normal(n).astype(np.float32)
    grad = rng.standard_normal(n).astype(np.float32)
    m, v = np.zeros_like(param), np.zeros_like(param)
    return lambda: impl.adamw_update(param, grad, m, v, 3e-4, 0.9, 0.99, 1e-8, 0.0, 0.1, 0.01)


def case_rbf(impl, rng):
    a = rng.standard_normal((1000, 2))
    b = rng.standard_normal((1000, 2))
    return lambda: impl.rbf_pair_sum(a, b, 0.5, False)


def case_train_step(impl, rng):
    model = ConditionedRegressor(2, 2, cond_dim=32, width=128, seed=0)
    opt = AdamW()
    x = rng.standard_normal((256, 2))
    cond = rng.standard_normal((256, 32))
    t = rng.random(256)
    target = rng.standard_normal((256, 2))

    def step():
        saved = {name: getattr(kernels, name) for name in ("silu_forward", "silu_backward", "adamw_update")}
        for name in saved:
            setattr(kernels, name, getattr(impl, name))
        try:
            pred = model.forward(x, t, cond)
            grads, _ = model.backward(2.0 * (pred - target) / pred.size)
            opt.step(model.params, grads)
        finally:
            for name, fn in saved.items():
                setattr(kernels, name, fn)

    return step


CASES = [
    ("silu_forward 256x128 f32", case_silu_forward),
    ("silu_backward 256x128 f32", case_silu_backward),
    ("adamw_update 50k f32", case_adamw),
    ("rbf_pair_sum 1000x1000 d=2", case_rbf),
    ("train step (fwd+bwd+adamw)", case_train_step),
]


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=200)
    args = parser.parse_args()
    if _ckernels is None:
        print("compiled extension not built; run `python3 setup.py build_ext --inplace`")
        return
    print(f"{'case':<30}{'numpy us':>12}{'cython us':>12}{'speedup':>10}")
    for name, make in CASES:
        t_py = timeit(make(_pykernels, seeded_rng(0)), args.repeat)
        t_c = timeit(make(_ckernels, seeded_rng(0)), args.repeat)
        print(f"{name:<30}{t_py * 1e6:>12.1f}{t_c * 1e6:>12.1f}{t_py / t_c:>9.2f}x")


if __name__ == "__main__":
    main()
