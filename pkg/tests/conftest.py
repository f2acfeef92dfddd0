import numpy as np
import pytest

from lediflow.core import seeded_rng


def central_diff(f, x, h=1e-5):
    """Central finite-difference gradient of scalar ``f`` at array ``x`` (float64)."""
    x = np.array(x, dtype=np.float64)
    g = np.zeros_like(x)
    flat = x.reshape(-1)
    gflat = g.reshape(-1)
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + h
        up = f(x)
        flat[i] = orig - h
        down = f(x)
        flat[i] = orig
        gflat[i] = (up - down) / (2 * h)
    return g


def max_rel_err(analytic, numeric, floor=1e-8):
    analytic = np.asarray(analytic, dtype=np.float64)
    numeric = np.asarray(numeric, dtype=np.float64)
    scale = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), floor)
    return float(np.max(np.abs(analytic - numeric) / scale))


@pytest.fixture
def rng():
    return seeded_rng(1234)


@pytest.fixture(scope="session")
def small_models():
    """A quickly trained TwoMoons stack: (data, aux, fm, lat). Small widths keep it ~seconds."""
    from lediflow.auxprior import AuxModel, train_auxiliary
    from lediflow.core import ConditionedRegressor, TrainConfig
    from lediflow.data import make_2d
    from lediflow.flowmatch import LearnedPrior, train_flow
    from lediflow.latentflow import train_latent_sampler

    data = make_2d("two_moons", 1024, 0.05, seed=0)
    aux, _ = train_auxiliary(AuxModel.create(2, 4, width=32, depth=2, seed=0), data,
                             TrainConfig(steps=1500, batch_size=128, seed=0))
    fm, _ = train_flow(ConditionedRegressor(2, 2, cond_dim=4, width=32, depth=2, seed=1),
                       LearnedPrior(aux), data, TrainConfig(steps=600, batch_size=128, seed=1))
    lat, _ = train_latent_sampler(ConditionedRegressor(4, 4, width=32, depth=2, seed=2), aux, data,
                                  TrainConfig(steps=600, batch_size=128, seed=2, ema_decay=0.99))
    return data, aux, fm, lat
