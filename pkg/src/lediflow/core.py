"""Numeric foundation: RNG, the conditioned MLP regressor, and AdamW.

Samples are plain numpy arrays. A batch is a 2-D array ``(n, dim)``; a single
sample is a 1-D array and is promoted to a batch of one where needed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels

LOG_VAR_MIN = -30.0
LOG_VAR_MAX = 10.0


class ContractError(ValueError):
    """Raised when an input violates a dimension or value contract."""


class BackwardStateError(RuntimeError):
    """Raised when ``backward`` is called without a recorded forward pass."""


class NonFiniteError(FloatingPointError):
    """Raised when a loss or gradient stops being finite."""


def seeded_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(int(seed) & 0xFFFFFFFFFFFFFFFF))


def gaussian_draw(rng: np.random.Generator, n, dtype=np.float64) -> np.ndarray:
    """I.i.d. standard normal variates; ``n`` may be an int or a shape."""
    return rng.standard_normal(n, dtype=dtype)


@dataclass
class DiagonalGaussian:
    """Per-dimension Gaussian given by mean and natural-log variance."""

    mean: np.ndarray
    log_var: np.ndarray

    def __post_init__(self):
        self.mean = np.asarray(self.mean)
        self.log_var = np.asarray(self.log_var)
        if self.mean.shape != self.log_var.shape:
            raise ContractError(
                f"mean shape {self.mean.shape} != log_var shape {self.log_var.shape}"
            )

    @classmethod
    def from_packed(cls, packed: np.ndarray) -> "DiagonalGaussian":
        """Split a ``(..., 2n)`` output into first-half mean and second-half log-variance."""
        half = packed.shape[-1] // 2
        return cls(packed[..., :half], packed[..., half:])

    @property
    def clamped_log_var(self) -> np.ndarray:
        return np.clip(self.log_var, LOG_VAR_MIN, LOG_VAR_MAX)

    @property
    def std(self) -> np.ndarray:
        return np.exp(0.5 * self.clamped_log_var)

    def sample(self, rng: np.random.Generator, sigma_floor: float = 0.0) -> np.ndarray:
        std = self.std
        if sigma_floor:
            std = np.maximum(std, sigma_floor)
        eps = gaussian_draw(rng, self.mean.shape, dtype=self.mean.dtype)
        return self.mean + std * eps


def time_embedding(t: np.ndarray, n_freq: int = 16, dtype=np.float32) -> np.ndarray:
    """Sinusoidal features ``[sin(f t), cos(f t)]`` with f geometric in [1, 1000]."""
    freqs = np.geomspace(1.0, 1000.0, n_freq)
    arg = np.asarray(t, dtype=np.float64).reshape(-1, 1) * freqs[None, :]
    return np.concatenate([np.sin(arg), np.cos(arg)], axis=1).astype(dtype)


class ConditionedRegressor:
    """Residual SiLU MLP mapping ``(state, t, cond) -> vector``.

    Layout: ``h = silu(W_in [state, emb(t), cond] + b_in)``, then ``depth - 1``
    residual blocks ``h = h + silu(W_i h + b_i)``, then a linear head whose
    weights start at zero so the initial output is identically zero.

    ``forward`` records the activations needed by ``backward``; it never
    touches the parameters.
    """

    TIME_FEATURES = 32

    def __init__(self, input_dim, output_dim, cond_dim=0, width=128, depth=3,
                 use_time=True, seed=0, dtype=np.float32):
        for name, val in (("input_dim", input_dim), ("output_dim", output_dim),
                          ("width", width), ("depth", depth)):
            if int(val) < 1:
                raise ContractError(f"{name} must be positive, got {val}")
        if cond_dim < 0:
            raise ContractError("cond_dim must be >= 0")
        self.input_dim = int(input_dim)
        self.output_dim = int(output_dim)
        self.cond_dim = int(cond_dim)
        self.width = int(width)
        self.depth = int(depth)
        self.use_time = bool(use_time)
        self.dtype = np.dtype(dtype)
        self.params: dict[str, np.ndarray] = {}
        self._cache = None
        self._init_params(seed)

    @property
    def feature_dim(self) -> int:
        return self.input_dim + (self.TIME_FEATURES if self.use_time else 0) + self.cond_dim

    def _init_params(self, seed):
        rng = seeded_rng(seed)
        fan_in = self.feature_dim
        self.params["in.w"] = rng.uniform(-1, 1, (fan_in, self.width)) * np.sqrt(3.0 / fan_in)
        self.params["in.b"] = np.zeros(self.width)
        for i in range(1, self.depth):
            self.params[f"res{i}.w"] = (
                rng.uniform(-1, 1, (self.width, self.width)) * np.sqrt(3.0 / self.width)
            )
            self.params[f"res{i}.b"] = np.zeros(self.width)
        self.params["out.w"] = np.zeros((self.width, self.output_dim))
        self.params["out.b"] = np.zeros(self.output_dim)
        for k in self.params:
            self.params[k] = np.ascontiguousarray(self.params[k], dtype=self.dtype)

    def spec(self) -> dict:
        return dict(input_dim=self.input_dim, output_dim=self.output_dim,
                    cond_dim=self.cond_dim, width=self.width, depth=self.depth,
                    use_time=self.use_time)

    def copy(self) -> "ConditionedRegressor":
        clone = ConditionedRegressor.__new__(ConditionedRegressor)
        clone.__dict__.update(self.__dict__)
        clone.params = {k: v.copy() for k, v in self.params.items()}
        clone._cache = None
        return clone

    def astype(self, dtype) -> "ConditionedRegressor":
        clone = self.copy()
        clone.dtype = np.dtype(dtype)
        clone.params = {k: np.ascontiguousarray(v, dtype=dtype) for k, v in self.params.items()}
        return clone

    def _features(self, state, t, cond):
        state = np.asarray(state)
        if state.ndim == 1:
            state = state[None, :]
        if state.ndim != 2 or state.shape[1] != self.input_dim:
            raise ContractError(
                f"state has trailing dim {state.shape[-1]}, model expects {self.input_dim}"
            )
        n = state.shape[0]
        parts = [state.astype(self.dtype, copy=False)]
        if self.use_time:
            t_arr = np.broadcast_to(np.asarray(t, dtype=np.float64).reshape(-1), (n,))
            parts.append(time_embedding(t_arr, self.TIME_FEATURES // 2, self.dtype))
        if self.cond_dim:
            if cond is None:
                raise ContractError(f"model expects a condition of length {self.cond_dim}")
            cond = np.asarray(cond, dtype=self.dtype)
            if cond.ndim == 1:
                cond = cond[None, :]
            if cond.shape[-1] != self.cond_dim:
                raise ContractError(
                    f"cond has length {cond.shape[-1]}, model expects {self.cond_dim}"
                )
            parts.append(np.broadcast_to(cond, (n, self.cond_dim)))
        elif cond is not None and np.size(cond) > 0:
            raise ContractError("unconditional model received a non-empty condition")
        return np.ascontiguousarray(np.concatenate(parts, axis=1))

    def forward(self, state, t=0.0, cond=None, record=True) -> np.ndarray:
        """Evaluate the network on a batch; 1-D state in gives 1-D output back.

        ``record=False`` skips caching activations, which keeps concurrent
        inference on a shared model safe.
        """
        squeeze = np.ndim(state) == 1
        feats = self._features(state, t, cond)
        p = self.params
        pre = feats @ p["in.w"]
        pre += p["in.b"]
        h = np.empty_like(pre)
        sig = np.empty_like(pre)
        kernels.silu_forward(pre, h, sig)
        layers = [(pre, sig)]
        hiddens = [h]
        for i in range(1, self.depth):
            pre = h @ p[f"res{i}.w"]
            pre += p[f"res{i}.b"]
            act = np.empty_like(pre)
            sig = np.empty_like(pre)
            kernels.silu_forward(pre, act, sig)
            h = h + act
            layers.append((pre, sig))
            hiddens.append(h)
        out = h @ p["out.w"]
        out += p["out.b"]
        if record:
            self._cache = (feats, layers, hiddens)
        return out[0] if squeeze else out

    __call__ = forward

    def backward(self, grad_out) -> tuple[dict[str, np.ndarray], np.ndarray]:
        """Backpropagate ``dL/d(output)`` through the last recorded forward pass.

        Returns ``(param_grads, state_grad)``; ``state_grad`` is the gradient
        with respect to the ``state`` argument only. The cache is consumed.
        """
        if self._cache is None:
            raise BackwardStateError("backward called without a recorded forward pass")
        feats, layers, hiddens = self._cache
        self._cache = None
        g = np.asarray(grad_out, dtype=self.dtype)
        if g.ndim == 1:
            g = g[None, :]
        if g.shape != (feats.shape[0], self.output_dim):
            raise ContractError(f"grad_out shape {g.shape} does not match forward output")
        p = self.params
        grads = {}
        grads["out.w"] = hiddens[-1].T @ g
        grads["out.b"] = g.sum(axis=0)
        gh = g @ p["out.w"].T
        gpre = np.empty_like(gh)
        for i in range(self.depth - 1, 0, -1):
            pre, sig = layers[i]
            kernels.silu_backward(np.ascontiguousarray(gh), pre, sig, gpre)
            grads[f"res{i}.w"] = hiddens[i - 1].T @ gpre
            grads[f"res{i}.b"] = gpre.sum(axis=0)
            gh = gh + gpre @ p[f"res{i}.w"].T
        pre, sig = layers[0]
        kernels.silu_backward(np.ascontiguousarray(gh), pre, sig, gpre)
        grads["in.w"] = feats.T @ gpre
        grads["in.b"] = gpre.sum(axis=0)
        gfeat = gpre @ p["in.w"][: self.input_dim].T
        return grads, gfeat


@dataclass
class TrainConfig:
    """Optimizer and loop settings shared by all three trainers."""

    steps: int = 4000
    batch_size: int = 256
    lr: float = 3e-4
    beta1: float = 0.9
    beta2: float = 0.99
    weight_decay: float = 0.0
    eps: float = 1e-8
    seed: int = 0
    log_every: int = 100
    ema_decay: float = 0.0

    def optimizer(self) -> "AdamW":
        return AdamW(lr=self.lr, beta1=self.beta1, beta2=self.beta2,
                     weight_decay=self.weight_decay, eps=self.eps)


class TrainingAborted(RuntimeError):
    """Training hit a non-finite loss; ``last_good`` holds the last finite parameters."""

    def __init__(self, message, step, last_good):
        super().__init__(message)
        self.step = step
        self.last_good = last_good


@dataclass
class AdamW:
    """Decoupled-weight-decay Adam with bias correction, updating params in place."""

    lr: float = 3e-4
    beta1: float = 0.9
    beta2: float = 0.99
    weight_decay: float = 0.0
    eps: float = 1e-8
    step_count: int = 0
    m: dict = field(default_factory=dict)
    v: dict = field(default_factory=dict)

    def step(self, params: dict, grads: dict) -> dict:
        for name, g in grads.items():
            if not np.all(np.isfinite(g)):
                raise NonFiniteError(
                    f"non-finite gradient for parameter {name!r} at step {self.step_count + 1}"
                )
            if g.shape != params[name].shape:
                raise ContractError(
                    f"gradient shape {g.shape} != parameter shape {params[name].shape} for {name!r}"
                )
        self.step_count += 1
        bc1 = 1.0 - self.beta1 ** self.step_count
        bc2 = 1.0 - self.beta2 ** self.step_count
        for name, g in grads.items():
            p = params[name]
            if name not in self.m:
                self.m[name] = np.zeros_like(p)
                self.v[name] = np.zeros_like(p)
            kernels.adamw_update(
                p.reshape(-1), np.ascontiguousarray(g, dtype=p.dtype).reshape(-1),
                self.m[name].reshape(-1), self.v[name].reshape(-1),
                self.lr, self.beta1, self.beta2, self.eps, self.weight_decay, bc1, bc2,
            )
        return params
