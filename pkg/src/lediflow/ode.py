"""Fixed-step explicit Runge-Kutta integration on t in [0, 1]."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np


class Method(str, enum.Enum):
    EULER = "euler"
    MIDPOINT = "midpoint"
    HEUN3 = "heun3"


class Direction(str, enum.Enum):
    FORWARD = "forward"
    REVERSE = "reverse"


class IntegrationError(FloatingPointError):
    def __init__(self, step, message="non-finite state"):
        self.step = step
        super().__init__(f"{message} at step {step}")


# (nodes, lower-triangular stage coefficients, weights)
TABLEAUS = {
    Method.EULER: ((0.0,), ((),), (1.0,)),
    Method.MIDPOINT: ((0.0, 0.5), ((), (0.5,)), (0.0, 1.0)),
    Method.HEUN3: (
        (0.0, 1.0 / 3.0, 2.0 / 3.0),
        ((), (1.0 / 3.0,), (0.0, 2.0 / 3.0)),
        (0.25, 0.0, 0.75),
    ),
}


@dataclass(frozen=True)
class SolverConfig:
    method: Method = Method.MIDPOINT
    steps: int = 8
    direction: Direction = Direction.FORWARD

    def __post_init__(self):
        object.__setattr__(self, "method", Method(self.method))
        object.__setattr__(self, "direction", Direction(self.direction))
        if int(self.steps) != self.steps or self.steps < 1:
            raise ValueError(f"steps must be a positive integer, got {self.steps}")

    @property
    def nfe(self) -> int:
        return self.steps * len(TABLEAUS[self.method][0])


def rk_step(field, t, x, h, method):
    nodes, coeffs, weights = TABLEAUS[method]
    ks = []
    for c, row in zip(nodes, coeffs):
        xs = x
        for a, k in zip(row, ks):
            if a:
                xs = xs + (h * a) * k
        ks.append(np.asarray(field(t + c * h, xs)))
    out = x
    for b, k in zip(weights, ks):
        if b:
            out = out + (h * b) * k
    return out


def integrate(field, x0, config: SolverConfig, return_trajectory=False):
    """Integrate ``dx/dt = field(t, x)`` over [0, 1] with uniform steps.

    Forward runs t: 0 -> 1 starting from ``x0``; Reverse runs t: 1 -> 0.
    With ``return_trajectory`` the states at every step boundary are
    returned as a second value, stacked along a new leading axis.
    """
    x = np.array(x0, copy=True)
    if not np.all(np.isfinite(x)):
        raise IntegrationError(0, "non-finite initial state")
    n = config.steps
    reverse = config.direction is Direction.REVERSE
    h = -1.0 / n if reverse else 1.0 / n
    traj = [x.copy()] if return_trajectory else None
    for i in range(n):
        t = 1.0 - i / n if reverse else i / n
        x_new = rk_step(field, t, x, h, config.method)
        if x_new.shape != x.shape:
            raise ValueError(f"field returned shape {x_new.shape} for state shape {x.shape}")
        if not np.all(np.isfinite(x_new)):
            raise IntegrationError(i + 1)
        x = x_new.astype(x.dtype, copy=False)
        if traj is not None:
            traj.append(x.copy())
    if return_trajectory:
        return x, np.stack(traj)
    return x


def reverse_map(field, x1, steps, method=Method.MIDPOINT):
    """Map a t=1 state back to t=0 by integrating with negative time steps."""
    return integrate(field, x1, SolverConfig(method, steps, Direction.REVERSE))
