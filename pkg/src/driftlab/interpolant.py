"""Stochastic interpolant core.

The interpolant bridges two boundary laws rho0 and rho1 through

    x_t = (1 - t) * x0 + t * x1 + gamma(t) * z,        z ~ N(0, I),

where gamma vanishes at both endpoints so the boundary laws are hit exactly.
Only gamma and the derivative of gamma^2 are ever exposed: gamma'(t) itself
diverges at the endpoints for the square-root families used here, while
gamma * gamma' = 0.5 * d(gamma^2)/dt stays finite on all of [0, 1].
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .batch import BatchMeta, SampleBatch
from .errors import ConfigurationError, DomainError, ShapeError
from .rng import rng_stream


class GammaFamily:
    """Base class for latent-noise scale families gamma(t)."""

    def gamma_sq(self, t):
        raise NotImplementedError

    def gamma_sq_dot(self, t):
        raise NotImplementedError

    def label(self) -> str:
        raise NotImplementedError


@dataclass(frozen=True)
class BridgeScale(GammaFamily):
    """gamma(t) = sqrt(a * t * (1 - t)), the Brownian-bridge-like scale.

    a = 2 recovers the scale under which the interpolant with a Gaussian
    source reduces to a variance-preserving diffusion path.
    """

    a: float = 2.0

    def __post_init__(self):
        if not (self.a > 0) or not np.isfinite(self.a):
            raise ConfigurationError(f"BridgeScale amplitude must be positive, got {self.a}")

    def gamma_sq(self, t):
        return self.a * t * (1.0 - t)

    def gamma_sq_dot(self, t):
        return self.a * (1.0 - 2.0 * t)

    def label(self) -> str:
        return f"bridge(a={self.a:g})"


@dataclass(frozen=True)
class AsymmetricScale(GammaFamily):
    """gamma^2(t) = (1 - t)^2 * t, vanishing faster at t = 1 than at t = 0."""

    def gamma_sq(self, t):
        return (1.0 - t) ** 2 * t

    def gamma_sq_dot(self, t):
        # d/dt [(1-t)^2 t] = (1-t)^2 - 2(1-t)t = (1-t)(1-3t)
        return (1.0 - t) * (1.0 - 3.0 * t)

    def label(self) -> str:
        return "asymmetric"


def gamma_eval(gamma: GammaFamily, t):
    """Evaluate (gamma(t), d(gamma^2)/dt) with domain checking.

    Accepts scalars or arrays; t must lie in [0, 1]. Returns a pair of
    floats for scalar input, a pair of arrays otherwise.
    """
    t_arr = np.asarray(t, dtype=np.float64)
    if np.any(t_arr < 0.0) or np.any(t_arr > 1.0):
        raise DomainError(f"t must lie in [0, 1], got {t!r}")
    gsq = gamma.gamma_sq(t_arr)
    # Guard tiny negative values from rounding at the endpoints.
    g = np.sqrt(np.maximum(gsq, 0.0))
    gdot = gamma.gamma_sq_dot(t_arr)
    if t_arr.ndim == 0:
        return float(g), float(gdot)
    return g, gdot


def gamma_gamma_dot(gamma: GammaFamily, t):
    """gamma(t) * gamma'(t) = 0.5 * d(gamma^2)/dt, finite on all of [0, 1]."""
    _, gdot = gamma_eval(gamma, t)
    return 0.5 * gdot


class Coupling:
    """Base class for joint laws of the endpoint pair (x0, x1)."""

    dimension: int

    def sample_pairs(self, n: int, rng: np.random.Generator):
        """Draw n pairs; returns (x0, x1), each of shape (n, d)."""
        raise NotImplementedError


class IndependentProduct(Coupling):
    """Product coupling: x0 ~ rho0 and x1 ~ rho1 drawn independently.

    The factors just need `.dimension` and `.sample(n, rng)`; the Gaussian
    mixtures in :mod:`driftlab.gmm` and the dataset samplers both qualify.
    """

    def __init__(self, rho0, rho1):
        if rho0.dimension != rho1.dimension:
            raise ShapeError(
                f"boundary laws disagree on dimension: {rho0.dimension} vs {rho1.dimension}"
            )
        self.rho0 = rho0
        self.rho1 = rho1
        self.dimension = rho0.dimension

    def sample_pairs(self, n, rng):
        return self.rho0.sample(n, rng), self.rho1.sample(n, rng)


class PairedEmpirical(Coupling):
    """Empirical coupling over stored pairs, resampled uniformly with replacement."""

    def __init__(self, x0: np.ndarray, x1: np.ndarray):
        x0 = np.asarray(x0, dtype=np.float64)
        x1 = np.asarray(x1, dtype=np.float64)
        if x0.ndim != 2 or x1.ndim != 2 or x0.shape != x1.shape:
            raise ShapeError(
                f"paired coupling needs matching (m, d) arrays, got {x0.shape} and {x1.shape}"
            )
        if x0.shape[0] == 0:
            raise ShapeError("paired coupling needs at least one stored pair")
        self.x0 = x0
        self.x1 = x1
        self.dimension = x0.shape[1]

    def sample_pairs(self, n, rng):
        idx = rng.integers(0, self.x0.shape[0], size=n)
        return self.x0[idx], self.x1[idx]


@dataclass(frozen=True)
class InterpolantConfig:
    """Everything the stochastic dynamics depend on besides the data itself.

    epsilon is the sampling-noise level of the forward SDE; t0 and t_end
    clip the working time interval away from the exact endpoints, where the
    score diverges for compactly supported data.
    """

    gamma: GammaFamily
    dimension: int
    epsilon: float = 1.0
    t0: float = 0.001
    t_end: float = 0.999

    def __post_init__(self):
        if int(self.dimension) < 1:
            raise ConfigurationError(f"dimension must be >= 1, got {self.dimension}")
        if not (self.epsilon >= 0.0):
            raise ConfigurationError(f"epsilon must be >= 0, got {self.epsilon}")
        if not (0.0 < self.t0 < self.t_end < 1.0):
            raise ConfigurationError(
                f"time window must satisfy 0 < t0 < t_end < 1, got ({self.t0}, {self.t_end})"
            )


def interpolate(x0: np.ndarray, x1: np.ndarray, z: np.ndarray, gamma: GammaFamily, t):
    """Evaluate x_t = (1 - t) x0 + t x1 + gamma(t) z.

    t may be a scalar or an (n,) array aligned with the rows of x0/x1/z.
    """
    x0 = np.asarray(x0, dtype=np.float64)
    x1 = np.asarray(x1, dtype=np.float64)
    z = np.asarray(z, dtype=np.float64)
    if x0.shape != x1.shape or x0.shape != z.shape:
        raise ShapeError(
            f"x0, x1, z must share a shape, got {x0.shape}, {x1.shape}, {z.shape}"
        )
    g, _ = gamma_eval(gamma, t)
    t_arr = np.asarray(t, dtype=np.float64)
    if t_arr.ndim == 1 and x0.ndim == 2:
        if t_arr.shape[0] != x0.shape[0]:
            raise ShapeError(f"per-row t has length {t_arr.shape[0]}, batch has {x0.shape[0]} rows")
        t_arr = t_arr[:, None]
        g = np.asarray(g)[:, None]
    return (1.0 - t_arr) * x0 + t_arr * x1 + g * z


def interpolant_time_derivative(x0: np.ndarray, x1: np.ndarray):
    """Time derivative of the deterministic part: d/dt [(1-t)x0 + t x1] = x1 - x0."""
    return np.asarray(x1, dtype=np.float64) - np.asarray(x0, dtype=np.float64)


def sample_interpolant(
    config: InterpolantConfig,
    coupling: Coupling,
    t: float,
    n: int,
    rng_seed: int,
) -> SampleBatch:
    """Draw n samples of x_t at a fixed time t.

    Pairs come from the coupling, z from an independent standard normal;
    both streams are derived from the seed so the batch is reproducible
    bit-for-bit.
    """
    if coupling.dimension != config.dimension:
        raise ShapeError(
            f"coupling dimension {coupling.dimension} != config dimension {config.dimension}"
        )
    if n < 1:
        raise ShapeError(f"need n >= 1 samples, got {n}")
    t = float(t)
    if not (0.0 <= t <= 1.0):
        raise DomainError(f"t must lie in [0, 1], got {t}")
    x0, x1 = coupling.sample_pairs(n, rng_stream(rng_seed, "interpolant", "pairs"))
    z = rng_stream(rng_seed, "interpolant", "latent").standard_normal((n, config.dimension))
    xt = interpolate(x0, x1, z, config.gamma, t)
    return SampleBatch(data=xt, meta=BatchMeta(seed=rng_seed, t=t))


def sample_interpolant_rows(
    config: InterpolantConfig,
    coupling: Coupling,
    t: np.ndarray,
    rng: np.random.Generator,
):
    """Draw one interpolant tuple per row of t; keeps (x0, x1, z) for training.

    Returns (x0, x1, z, xt), each of shape (n, d) with n = len(t).
    """
    t = np.asarray(t, dtype=np.float64)
    if t.ndim != 1:
        raise ShapeError(f"t must be a 1-D array of per-row times, got shape {t.shape}")
    x0, x1 = coupling.sample_pairs(t.shape[0], rng)
    z = rng.standard_normal((t.shape[0], config.dimension))
    xt = interpolate(x0, x1, z, config.gamma, t)
    return x0, x1, z, xt
