"""Flow matching with a learned per-dimension Gaussian prior."""

from .auxprior import AuxModel, train_auxiliary
from .core import ConditionedRegressor, DiagonalGaussian, TrainConfig
from .flowmatch import GaussianPrior, LearnedPrior, train_flow
from .kernels import BACKEND
from .latentflow import invert_latent, sample_latent, train_latent_sampler
from .ode import Direction, Method, SolverConfig, integrate
from .pipeline import GenerationConfig, generate, inpaint, preset

__version__ = "0.1.0"

__all__ = [
    "AuxModel", "BACKEND", "ConditionedRegressor", "DiagonalGaussian", "Direction",
    "GaussianPrior", "GenerationConfig", "LearnedPrior", "Method", "SolverConfig",
    "TrainConfig", "generate", "inpaint", "integrate", "invert_latent", "preset",
    "sample_latent", "train_auxiliary", "train_flow", "train_latent_sampler",
]
