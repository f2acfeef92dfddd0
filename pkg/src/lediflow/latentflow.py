"""Latent sampler: an unconditional flow from N(0, 1) to the encoder's latents."""

from __future__ import annotations

import numpy as np

from .auxprior import AuxModel
from .core import ConditionedRegressor, ContractError, TrainConfig
from .flowmatch import FlowTrainBatch, _PosteriorCache, as_vector_field, fit_flow
from .ode import Direction, Method, SolverConfig, integrate

DEFAULT_SAMPLE_STEPS = 4
DEFAULT_INVERT_STEPS = 32


def train_latent_sampler(model: ConditionedRegressor, aux: AuxModel, data,
                         config: TrainConfig | None = None):
    """Fit the latent flow on pairs ``(w ~ N(0, 1), z_hat ~ q(z | y))``.

    Pairs are drawn independently every step; ``z_hat`` is a fresh sample of
    the encoder posterior of a random data point.
    """
    config = config or TrainConfig()
    if model.cond_dim:
        raise ContractError("latent sampler must be unconditional")
    if model.input_dim != aux.latent_dim:
        raise ContractError(f"model dim {model.input_dim} != latent size {aux.latent_dim}")
    data = np.asarray(data, dtype=np.float32)
    if data.ndim != 2 or len(data) == 0:
        raise ContractError("dataset must be a non-empty (n, d) array")
    posterior = _PosteriorCache(aux, data)
    k = aux.latent_dim
    bs = config.batch_size

    def draw(rng):
        idx = rng.integers(0, len(data), bs)
        z = posterior.sample(idx, rng)
        w = rng.standard_normal((bs, k), dtype=np.float32)
        t = rng.random(bs, dtype=np.float32)
        return FlowTrainBatch(w, z, t)

    return fit_flow(model, draw, config)


def sample_latent(model: ConditionedRegressor, rng, n=None, steps=DEFAULT_SAMPLE_STEPS,
                  method=Method.MIDPOINT):
    """Draw ``w ~ N(0, 1)`` and push it forward to a latent code.

    ``n=None`` returns a single 1-D code, otherwise an ``(n, k)`` batch.
    """
    shape = model.input_dim if n is None else (n, model.input_dim)
    w = rng.standard_normal(shape)
    return push_forward(model, w, steps, method)


def push_forward(model, w, steps=DEFAULT_SAMPLE_STEPS, method=Method.MIDPOINT):
    return integrate(as_vector_field(model), w, SolverConfig(method, steps, Direction.FORWARD))


def invert_latent(model: ConditionedRegressor, z, steps=DEFAULT_INVERT_STEPS,
                  method=Method.MIDPOINT):
    """Reverse-integrate a latent code from t=1 back to its Gaussian preimage."""
    return integrate(as_vector_field(model), np.asarray(z, dtype=np.float64),
                     SolverConfig(method, steps, Direction.REVERSE))
