"""Auxiliary encoder/decoder that predicts a per-dimension Gaussian prior.

The encoder maps data ``y`` to a latent posterior, the decoder maps a latent
code to ``(mean, log_var)`` over data dimensions. Training minimizes
``beta * KL(posterior || N(0, 1)) + VGL`` where VGL is the Gaussian negative
log-likelihood of the data under the decoder output.

Reductions are means over dimensions and batch, so ``beta`` does not depend
on the data or latent size.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    LOG_VAR_MAX,
    LOG_VAR_MIN,
    ConditionedRegressor,
    ContractError,
    DiagonalGaussian,
    NonFiniteError,
    TrainConfig,
    TrainingAborted,
    seeded_rng,
)

DEFAULT_BETA = 1e-3
SIGMA_FLOOR = 1e-3
LOG_2PI = math.log(2.0 * math.pi)


@dataclass
class AuxModel:
    encoder: ConditionedRegressor
    decoder: ConditionedRegressor
    beta: float = DEFAULT_BETA

    def __post_init__(self):
        if not self.beta > 0:
            raise ContractError(f"beta must be positive, got {self.beta}")
        if self.encoder.output_dim != 2 * self.latent_dim:
            raise ContractError("encoder output must be twice the latent size")
        if self.decoder.input_dim != self.latent_dim:
            raise ContractError("decoder input must equal the latent size")
        if self.decoder.output_dim != 2 * self.data_dim:
            raise ContractError("decoder output must be twice the data size")

    @classmethod
    def create(cls, data_dim, latent_dim, width=128, depth=3, beta=DEFAULT_BETA, seed=0):
        enc = ConditionedRegressor(data_dim, 2 * latent_dim, width=width, depth=depth,
                                   use_time=False, seed=seed)
        dec = ConditionedRegressor(latent_dim, 2 * data_dim, width=width, depth=depth,
                                   use_time=False, seed=seed + 1)
        return cls(enc, dec, beta)

    @property
    def data_dim(self) -> int:
        return self.encoder.input_dim

    @property
    def latent_dim(self) -> int:
        return self.decoder.input_dim

    def encode(self, y) -> DiagonalGaussian:
        return encode(self, y)

    def decode(self, z) -> DiagonalGaussian:
        return decode(self, z)


def encode(aux: AuxModel, y) -> DiagonalGaussian:
    return DiagonalGaussian.from_packed(aux.encoder.forward(y, record=False))


def decode(aux: AuxModel, z) -> DiagonalGaussian:
    return DiagonalGaussian.from_packed(aux.decoder.forward(z, record=False))


def reparam_sample(g: DiagonalGaussian, rng, eps=None, return_eps=False):
    """Draw ``mean + std * eps`` with ``eps ~ N(0, 1)``.

    The log-variance is clamped to [-30, 10] first so the std is always
    positive and finite. Pass ``eps`` to reuse fixed noise, and
    ``return_eps=True`` to get it back for :func:`reparam_backward`.
    """
    if eps is None:
        eps = rng.standard_normal(g.mean.shape).astype(g.mean.dtype, copy=False)
    z = g.mean + g.std * eps
    return (z, eps) if return_eps else z


def reparam_backward(g: DiagonalGaussian, eps, grad_sample):
    """Pathwise gradient of a reparameterized sample w.r.t. ``(mean, log_var)``."""
    lv = g.log_var
    inside = (lv >= LOG_VAR_MIN) & (lv <= LOG_VAR_MAX)
    g_log_var = grad_sample * eps * 0.5 * g.std * inside
    return grad_sample, g_log_var


def vgl_loss(y, p: DiagonalGaussian) -> float:
    y = np.asarray(y)
    if y.shape != p.mean.shape:
        raise ContractError(f"target shape {y.shape} != prior shape {p.mean.shape}")
    if not (np.all(np.isfinite(y)) and np.all(np.isfinite(p.mean))
            and np.all(np.isfinite(p.log_var))):
        raise NonFiniteError("non-finite input to vgl_loss")
    lv = p.clamped_log_var
    r2 = (y - p.mean) ** 2
    return float(np.mean(0.5 * (r2 * np.exp(-lv) + lv + LOG_2PI)))


def vgl_loss_grad(y, p: DiagonalGaussian):
    """Gradients of :func:`vgl_loss` w.r.t. ``(mean, log_var)``."""
    y = np.asarray(y)
    n = y.size
    lv = p.clamped_log_var
    inv_var = np.exp(-lv)
    resid = y - p.mean
    g_mean = -resid * inv_var / n
    inside = (p.log_var >= LOG_VAR_MIN) & (p.log_var <= LOG_VAR_MAX)
    g_lv = 0.5 * (1.0 - resid ** 2 * inv_var) / n * inside
    return g_mean, g_lv


def kl_to_standard_normal(g: DiagonalGaussian) -> float:
    lv = g.clamped_log_var
    return float(np.mean(0.5 * (g.mean ** 2 + np.exp(lv) - lv - 1.0)))


def kl_grad(g: DiagonalGaussian):
    n = g.mean.size
    lv = g.clamped_log_var
    inside = (g.log_var >= LOG_VAR_MIN) & (g.log_var <= LOG_VAR_MAX)
    return g.mean / n, 0.5 * (np.exp(lv) - 1.0) / n * inside


def aux_loss_and_grads(aux: AuxModel, y, eps):
    """One forward/backward of ``beta * KL + VGL`` on a batch with fixed noise."""
    q = DiagonalGaussian.from_packed(aux.encoder.forward(y))
    z = reparam_sample(q, None, eps=eps)
    p = DiagonalGaussian.from_packed(aux.decoder.forward(z))
    kl = kl_to_standard_normal(q)
    vgl = vgl_loss(y, p)
    loss = aux.beta * kl + vgl

    gm, glv = vgl_loss_grad(y, p)
    dec_grads, g_z = aux.decoder.backward(np.concatenate([gm, glv], axis=-1))
    gq_mean, gq_lv = reparam_backward(q, eps, g_z)
    km, klv = kl_grad(q)
    g_enc_out = np.concatenate([gq_mean + aux.beta * km, gq_lv + aux.beta * klv], axis=-1)
    enc_grads, _ = aux.encoder.backward(g_enc_out)

    grads = {f"enc.{k}": v for k, v in enc_grads.items()}
    grads.update({f"dec.{k}": v for k, v in dec_grads.items()})
    return loss, kl, vgl, grads


def _aux_params(aux):
    params = {f"enc.{k}": v for k, v in aux.encoder.params.items()}
    params.update({f"dec.{k}": v for k, v in aux.decoder.params.items()})
    return params


def train_auxiliary(aux: AuxModel, data, config: TrainConfig | None = None):
    """Fit the encoder/decoder with AdamW on random minibatches.

    Returns ``(aux, history)``; history rows are ``(step, loss, kl, vgl)``
    averaged over each ``log_every`` window.
    """
    config = config or TrainConfig()
    data = np.asarray(data, dtype=aux.encoder.dtype)
    if data.ndim != 2 or len(data) == 0:
        raise ContractError("dataset must be a non-empty (n, d) array")
    if data.shape[1] != aux.data_dim:
        raise ContractError(f"data dim {data.shape[1]} != model data dim {aux.data_dim}")
    rng = seeded_rng(config.seed)
    opt = config.optimizer()
    params = _aux_params(aux)
    last_good = {k: v.copy() for k, v in params.items()}
    history = []
    window = []
    for step in range(1, config.steps + 1):
        idx = rng.integers(0, len(data), config.batch_size)
        y = data[idx]
        eps = rng.standard_normal((len(y), aux.latent_dim)).astype(data.dtype)
        try:
            loss, kl, vgl, grads = aux_loss_and_grads(aux, y, eps)
            if not math.isfinite(loss):
                raise NonFiniteError(f"non-finite auxiliary loss at step {step}")
            opt.step(params, grads)
        except NonFiniteError as exc:
            raise TrainingAborted(str(exc), step, last_good) from exc
        window.append((loss, kl, vgl))
        if step % config.log_every == 0 or step == config.steps:
            history.append((step, *np.mean(window, axis=0).tolist()))
            window = []
            last_good = {k: v.copy() for k, v in params.items()}
    return aux, history
