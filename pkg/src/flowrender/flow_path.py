"""Straight-line probability path between noise and data, and its velocity."""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, ShapeError
from .numerics import sample_standard_normal

DEFAULT_SIGMA = 1e-4


@dataclass(frozen=True)
class PathConfig:
    sigma: float = DEFAULT_SIGMA

    def __post_init__(self):
        if not 0.0 <= self.sigma < 1.0:
            raise ConfigError(f"sigma must lie in [0, 1), got {self.sigma}")


@dataclass
class FlowState:
    x: np.ndarray
    t: float

    def __post_init__(self):
        if not 0.0 <= self.t <= 1.0:
            raise ValueError(f"t must lie in [0, 1], got {self.t}")


def _same_shape(x0, x1):
    x0 = np.asarray(x0, dtype=np.float64)
    x1 = np.asarray(x1, dtype=np.float64)
    if x0.shape != x1.shape:
        raise ShapeError(f"x0 {x0.shape} and x1 {x1.shape} differ")
    return x0, x1


def phi_ot(x0, x1, t, cfg=PathConfig()):
    """Point at time ``t`` on the path: (1 - (1 - sigma) t) x0 + t x1."""
    x0, x1 = _same_shape(x0, x1)
    return (1.0 - (1.0 - cfg.sigma) * t) * x0 + t * x1


def target_field(x0, x1, cfg=PathConfig()):
    """Velocity of the path, x1 - (1 - sigma) x0. Constant in time."""
    x0, x1 = _same_shape(x0, x1)
    return x1 - (1.0 - cfg.sigma) * x0


def sample_training_point(x1, rng, cfg=PathConfig()):
    """Draw t ~ U[0, 1] and x0 ~ N(0, I); return the path state and its target."""
    x1 = np.asarray(x1, dtype=np.float64)
    t = float(rng.uniform())
    x0 = sample_standard_normal(rng, *x1.shape)
    state = FlowState(phi_ot(x0, x1, t, cfg), t)
    return state, target_field(x0, x1, cfg)
