"""Deterministic parameter initialization on top of the counter RNG."""

import numpy as np

from ..errors import ConfigError
from .rng import Stream


def zeros(shape):
    return np.zeros(shape, dtype=np.float64)


def uniform(shape, lo, hi, seed):
    """Uniform on [lo, hi), deterministic for a given (shape, lo, hi, seed)."""
    n = int(np.prod(shape)) if shape else 1
    u = Stream(seed).uniforms(n)
    return (lo + (hi - lo) * u).reshape(shape)


def glorot_uniform(shape, seed):
    """Uniform on [-b, b] with b = sqrt(6 / (fan_in + fan_out)).

    fan_in is the first axis, fan_out the last; for 1-D shapes both are
    the single axis length.
    """
    fan_in = shape[0]
    fan_out = shape[-1]
    bound = np.sqrt(6.0 / (fan_in + fan_out))
    return uniform(shape, -bound, bound, seed)


def init(shape, scheme, seed=0, lo=0.0, hi=1.0):
    """Dispatch by scheme name: glorot_uniform, uniform (uses lo/hi), zeros."""
    if scheme == "zeros":
        return zeros(shape)
    if scheme == "uniform":
        return uniform(shape, lo, hi, seed)
    if scheme == "glorot_uniform":
        return glorot_uniform(shape, seed)
    raise ConfigError(f"unknown init scheme {scheme!r}")
