"""Flow-matching objectives and the vector-field model trainer.

Two priors are supported. With the Gaussian prior the start point is
``x ~ N(0, 1)`` and the model is unconditional (plain CFM loss). With a learned
prior the frozen auxiliary model supplies a latent condition ``z_hat`` and a
start point ``x ~ N(mu(z_hat), sigma(z_hat)^2)``; the loss weights each
element by ``1 / max(sigma, 1e-3)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .auxprior import SIGMA_FLOOR, AuxModel, decode, encode, reparam_sample
from .core import (
    ConditionedRegressor,
    DiagonalGaussian,
    ContractError,
    NonFiniteError,
    TrainConfig,
    TrainingAborted,
    seeded_rng,
)

MAX_WEIGHT = 1.0 / SIGMA_FLOOR


class GaussianPrior:
    """Marker for the standard-normal baseline prior."""

    def __repr__(self):
        return "GaussianPrior()"


@dataclass
class LearnedPrior:
    aux: AuxModel


@dataclass
class FlowTrainBatch:
    x: np.ndarray
    y: np.ndarray
    t: np.ndarray
    cond: np.ndarray | None = None
    sigma_prior: np.ndarray | None = None

    @property
    def state(self) -> np.ndarray:
        return interpolate(self.x, self.y, self.t[:, None])


def interpolate(x, y, t):
    """Straight-line path ``y * t + x * (1 - t)``."""
    t_arr = np.asarray(t)
    if np.any(t_arr < 0.0) or np.any(t_arr > 1.0):
        raise ContractError("t must lie in [0, 1]")
    x = np.asarray(x)
    y = np.asarray(y)
    if x.shape != y.shape:
        raise ContractError(f"shape mismatch {x.shape} vs {y.shape}")
    return y * t_arr + x * (1.0 - t_arr)


def cfm_loss(pred_v, x, y) -> float:
    diff = np.asarray(pred_v) - (np.asarray(y) - np.asarray(x))
    return float(np.mean(diff * diff))


def cfm_loss_grad(pred_v, x, y) -> np.ndarray:
    pred_v = np.asarray(pred_v)
    return 2.0 * (pred_v - (np.asarray(y) - np.asarray(x))) / pred_v.size


def wcfm_weights(sigma_prior) -> np.ndarray:
    """Per-element importance weights ``1 / max(sigma, 1e-3)``, bounded by 1e3."""
    return 1.0 / np.maximum(np.asarray(sigma_prior), SIGMA_FLOOR)


def wcfm_loss(pred_v, x, y, sigma_prior) -> float:
    diff = np.asarray(pred_v) - (np.asarray(y) - np.asarray(x))
    return float(np.mean(diff * diff * wcfm_weights(sigma_prior)))


def wcfm_loss_grad(pred_v, x, y, sigma_prior) -> np.ndarray:
    pred_v = np.asarray(pred_v)
    diff = pred_v - (np.asarray(y) - np.asarray(x))
    return 2.0 * diff * wcfm_weights(sigma_prior) / pred_v.size


class _PosteriorCache:
    """Encoder posteriors of the whole (fixed) dataset, computed once."""

    def __init__(self, aux, data, chunk=4096):
        means, log_vars = [], []
        for i in range(0, len(data), chunk):
            q = encode(aux, data[i:i + chunk])
            means.append(q.mean)
            log_vars.append(q.log_var)
        self.mean = np.concatenate(means)
        self.log_var = np.concatenate(log_vars)

    def sample(self, idx, rng):
        return reparam_sample(DiagonalGaussian(self.mean[idx], self.log_var[idx]), rng)


def make_batch_sampler(prior, data, batch_size):
    """Return ``draw(rng) -> FlowTrainBatch`` for the given prior.

    Draw order per batch is fixed (indices, z_hat, x, t) so runs are
    reproducible from the seed alone.
    """
    data = np.asarray(data, dtype=np.float32)
    if data.ndim != 2 or len(data) == 0:
        raise ContractError("dataset must be a non-empty (n, d) array")
    n, d = data.shape

    if isinstance(prior, LearnedPrior):
        aux = prior.aux
        if aux.data_dim != d:
            raise ContractError(f"aux model data dim {aux.data_dim} != dataset dim {d}")
        posterior = _PosteriorCache(aux, data)

        def draw(rng):
            idx = rng.integers(0, n, batch_size)
            z_hat = posterior.sample(idx, rng)
            p = decode(aux, z_hat)
            sigma = np.maximum(p.std, np.float32(SIGMA_FLOOR))
            x = p.mean + sigma * rng.standard_normal(p.mean.shape, dtype=np.float32)
            t = rng.random(batch_size, dtype=np.float32)
            return FlowTrainBatch(x, data[idx], t, z_hat, sigma)
    else:
        def draw(rng):
            idx = rng.integers(0, n, batch_size)
            x = rng.standard_normal((batch_size, d), dtype=np.float32)
            t = rng.random(batch_size, dtype=np.float32)
            return FlowTrainBatch(x, data[idx], t)

    return draw


def fit_flow(model: ConditionedRegressor, draw_batch, config: TrainConfig):
    """Generic AdamW loop over batches from ``draw_batch``; returns (model, history)."""
    rng = seeded_rng(config.seed)
    opt = config.optimizer()
    last_good = {k: v.copy() for k, v in model.params.items()}
    ema = {k: v.copy() for k, v in model.params.items()} if config.ema_decay else None
    history = []
    window = []
    for step in range(1, config.steps + 1):
        batch = draw_batch(rng)
        pred = model.forward(batch.state, batch.t, batch.cond)
        if batch.sigma_prior is None:
            loss = cfm_loss(pred, batch.x, batch.y)
            grad = cfm_loss_grad(pred, batch.x, batch.y)
        else:
            loss = wcfm_loss(pred, batch.x, batch.y, batch.sigma_prior)
            grad = wcfm_loss_grad(pred, batch.x, batch.y, batch.sigma_prior)
        if not math.isfinite(loss):
            raise TrainingAborted(f"non-finite flow loss at step {step}", step, last_good)
        grads, _ = model.backward(grad)
        try:
            opt.step(model.params, grads)
        except NonFiniteError as exc:
            raise TrainingAborted(str(exc), step, last_good) from exc
        if ema is not None:
            decay = np.float32(min(config.ema_decay, (1.0 + step) / (10.0 + step)))
            for k, v in model.params.items():
                ema[k] *= decay
                ema[k] += (1 - decay) * v
        window.append(loss)
        if step % config.log_every == 0 or step == config.steps:
            history.append((step, float(np.mean(window))))
            window = []
            last_good = {k: v.copy() for k, v in model.params.items()}
    if ema is not None:
        for k in model.params:
            model.params[k][...] = ema[k]
    return model, history


def train_flow(model: ConditionedRegressor, prior, data, config: TrainConfig | None = None):
    """Train the data-space vector field from ``prior`` to ``data``.

    ``prior`` is a :class:`GaussianPrior` (CFM loss, unconditional model) or a
    :class:`LearnedPrior` wrapping a frozen auxiliary model (weighted loss,
    model conditioned on the sampled latent).
    """
    config = config or TrainConfig()
    if isinstance(prior, LearnedPrior):
        if model.cond_dim != prior.aux.latent_dim:
            raise ContractError(
                f"model cond_dim {model.cond_dim} != latent size {prior.aux.latent_dim}"
            )
    elif model.cond_dim:
        raise ContractError("Gaussian-prior model must be unconditional")
    draw = make_batch_sampler(prior, data, config.batch_size)
    return fit_flow(model, draw, config)


def as_vector_field(model: ConditionedRegressor, cond=None):
    """Wrap the model as ``field(t, state) -> velocity`` for :mod:`lediflow.ode`."""

    def field(t, state):
        out = model.forward(state, t, cond, record=False)
        return out.astype(np.result_type(state, out), copy=False)

    return field
