"""Drift estimation by regression on interpolant draws.

A single two-head network maps (x, t) to (v_hat, s_hat). The heads are fit
with the quadratic objectives

    L_b = E[ 0.5 |b_hat|^2 - (x1 - x0 + gamma' z) . b_hat ],
    L_s = E[ 0.5 |s_hat|^2 + (z / gamma) . s_hat ],

whose unique minimizers are the velocity-with-noise drift b and the score s.
The b-field is assembled from the heads as b_hat = v_hat - gamma gamma' s_hat,
so at the optimum the v-head is the velocity and the s-head the score; the
sampler consumes b_hat_F = v_hat + (epsilon - gamma gamma') s_hat. The
gamma' z term is evaluated as (0.5 d(gamma^2)/dt / gamma) z, which stays
finite on (0, 1).

Training times are importance-sampled with density proportional to
1 / gamma^2(t) on [t0, t_end], which balances the loss contributions of the
near-endpoint regions where the score target blows up.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, DomainError, ShapeError
from .interpolant import (
    AsymmetricScale,
    BridgeScale,
    GammaFamily,
    InterpolantConfig,
    Coupling,
    gamma_eval,
    gamma_gamma_dot,
    sample_interpolant_rows,
)
from .mlp import Adam, Mlp, adam_step
from .rng import rng_stream
from .sampler import DriftField


@dataclass(frozen=True)
class TrainConfig:
    hidden: tuple[int, ...] = (256, 256, 256)
    steps: int = 20000
    batch_size: int = 512
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    seed: int = 0
    weight_b: float = 1.0
    weight_s: float = 1.0

    def __post_init__(self):
        if self.steps < 1 or self.batch_size < 1:
            raise ConfigurationError(
                f"steps and batch_size must be positive, got {self.steps}, {self.batch_size}"
            )
        if self.weight_b < 0 or self.weight_s < 0 or self.weight_b + self.weight_s == 0:
            raise ConfigurationError(
                f"loss weights must be nonnegative and not both zero, "
                f"got ({self.weight_b}, {self.weight_s})"
            )


def _logit(p):
    return np.log(p) - np.log1p(-p)


def _asymmetric_time_cdf_raw(t):
    # Antiderivative of 1 / ((1-t)^2 t): log(t / (1-t)) + 1 / (1-t).
    return np.log(t) - np.log1p(-t) + 1.0 / (1.0 - t)


def sample_training_time(
    config: InterpolantConfig, n: int, rng: np.random.Generator
) -> np.ndarray:
    """Draw n times on [t0, t_end] with density proportional to gamma^{-2}.

    BridgeScale inverts its CDF in closed form through the logit map;
    AsymmetricScale inverts the closed-form antiderivative numerically
    (vectorized bisection, monotone integrand).
    """
    u = rng.uniform(0.0, 1.0, size=n)
    t0, t_end = config.t0, config.t_end
    gamma = config.gamma
    if isinstance(gamma, BridgeScale):
        # 1/gamma^2 ~ 1/(t(1-t)); antiderivative is logit(t).
        lo, hi = _logit(t0), _logit(t_end)
        return 1.0 / (1.0 + np.exp(-(lo + u * (hi - lo))))
    if isinstance(gamma, AsymmetricScale):
        lo, hi = _asymmetric_time_cdf_raw(t0), _asymmetric_time_cdf_raw(t_end)
        target = lo + u * (hi - lo)
        a = np.full(n, t0)
        b = np.full(n, t_end)
        for _ in range(80):
            mid = 0.5 * (a + b)
            below = _asymmetric_time_cdf_raw(mid) < target
            a = np.where(below, mid, a)
            b = np.where(below, b, mid)
        return 0.5 * (a + b)
    raise ConfigurationError(
        f"no gamma^-2 time sampler for gamma family {type(gamma).__name__}"
    )


def _check_interior(t: np.ndarray):
    if np.any(t <= 0.0) or np.any(t >= 1.0):
        raise DomainError("losses are defined on t in (0, 1) only (gamma vanishes at endpoints)")


def loss_b(b_hat, x0, x1, z, gamma: GammaFamily, t) -> float:
    """Empirical L_b; minimized over functions by b(t, x) = E[x1 - x0 + gamma' z | x_t = x]."""
    b_hat = np.asarray(b_hat, dtype=np.float64)
    t = np.atleast_1d(np.asarray(t, dtype=np.float64))
    _check_interior(t)
    g, gdot = gamma_eval(gamma, t)
    target = (np.asarray(x1) - np.asarray(x0)) + (0.5 * gdot / g)[:, None] * np.asarray(z)
    if target.shape != b_hat.shape:
        raise ShapeError(f"b_hat shape {b_hat.shape} does not match target {target.shape}")
    per_sample = 0.5 * np.sum(b_hat * b_hat, axis=1) - np.sum(target * b_hat, axis=1)
    return float(np.mean(per_sample))


def loss_s(s_hat, z, gamma: GammaFamily, t) -> float:
    """Empirical L_s; minimized over functions by the score s = -E[z | x_t] / gamma."""
    s_hat = np.asarray(s_hat, dtype=np.float64)
    t = np.atleast_1d(np.asarray(t, dtype=np.float64))
    _check_interior(t)
    g, _ = gamma_eval(gamma, t)
    z = np.asarray(z, dtype=np.float64)
    if z.shape != s_hat.shape:
        raise ShapeError(f"s_hat shape {s_hat.shape} does not match z {z.shape}")
    per_sample = 0.5 * np.sum(s_hat * s_hat, axis=1) + np.sum(
        (z / g[:, None]) * s_hat, axis=1
    )
    return float(np.mean(per_sample))


def _net_heads(net: Mlp, x: np.ndarray, t, d: int, want_cache: bool = False):
    x = np.asarray(x, dtype=np.float64)
    t_col = np.broadcast_to(np.asarray(t, dtype=np.float64), (x.shape[0],))[:, None]
    inp = np.concatenate([x, t_col], axis=1)
    if want_cache:
        out, cache = net.forward(inp, want_cache=True)
    else:
        out, cache = net.forward(inp), None
    return out[:, :d], out[:, d:], cache


def learned_drift_field(net: Mlp, config: InterpolantConfig, label: str = "") -> DriftField:
    """Wrap a trained two-head net as the sampling drift b_hat_F."""
    d = config.dimension
    if net.in_dim != d + 1 or net.out_dim != 2 * d:
        raise ShapeError(
            f"net has in_dim={net.in_dim}, out_dim={net.out_dim}; "
            f"drift in dimension {d} needs in_dim={d + 1}, out_dim={2 * d}"
        )

    def fn(t, x):
        v_hat, s_hat, _ = _net_heads(net, x, t, d)
        c = gamma_gamma_dot(config.gamma, float(t))
        return v_hat + (config.epsilon - c) * s_hat

    drift_id = label or f"learned-mlp(hidden={net.hidden},seed={net.seed})"
    return DriftField(fn=fn, drift_id=drift_id, meta={"net": net})


@dataclass
class TrainResult:
    net: Mlp
    loss_trace: np.ndarray
    drift_field: DriftField
    config: TrainConfig
    interpolant: InterpolantConfig = field(repr=False, default=None)


def drift_loss_and_grads(
    net: Mlp,
    config: InterpolantConfig,
    train_config: TrainConfig,
    t: np.ndarray,
    x0: np.ndarray,
    x1: np.ndarray,
    z: np.ndarray,
    xt: np.ndarray,
):
    """Joint loss w_b L_b + w_s L_s and its parameter gradients on one batch."""
    d = config.dimension
    n = t.shape[0]
    _check_interior(t)
    g, gdot = gamma_eval(config.gamma, t)
    c = (0.5 * gdot)[:, None]  # gamma gamma', per sample
    v_hat, s_hat, cache = _net_heads(net, xt, t, d, want_cache=True)
    b_hat = v_hat - c * s_hat
    y_b = (x1 - x0) + (0.5 * gdot / g)[:, None] * z
    y_s = -z / g[:, None]
    resid_b = b_hat - y_b
    resid_s = s_hat - y_s
    wb, ws = train_config.weight_b, train_config.weight_s
    loss = wb * float(
        np.mean(0.5 * np.sum(b_hat * b_hat, axis=1) - np.sum(y_b * b_hat, axis=1))
    ) + ws * float(np.mean(0.5 * np.sum(s_hat * s_hat, axis=1) - np.sum(y_s * s_hat, axis=1)))
    grad_v = wb * resid_b / n
    grad_s = -c * (wb * resid_b / n) + ws * resid_s / n
    grad_out = np.concatenate([grad_v, grad_s], axis=1)
    grad_w, grad_b_ = net.backward(cache, grad_out)
    return loss, grad_w, grad_b_


def train(
    config: InterpolantConfig, coupling: Coupling, train_config: TrainConfig = TrainConfig()
) -> TrainResult:
    """Fit the two-head drift net on interpolant draws from the coupling.

    Deterministic in train_config.seed: step k draws its times, pairs, and
    latents from the stream (seed, "train", k).
    """
    if coupling.dimension != config.dimension:
        raise ShapeError(
            f"coupling dimension {coupling.dimension} != config dimension {config.dimension}"
        )
    d = config.dimension
    net = Mlp(d + 1, train_config.hidden, 2 * d, seed=train_config.seed)
    opt = Adam(lr=train_config.lr, beta1=train_config.beta1, beta2=train_config.beta2)
    trace = np.empty(train_config.steps)
    for k in range(train_config.steps):
        rng = rng_stream(train_config.seed, "train", k)
        t = sample_training_time(config, train_config.batch_size, rng)
        x0, x1, z, xt = sample_interpolant_rows(config, coupling, t, rng)
        loss, grad_w, grad_b_ = drift_loss_and_grads(
            net, config, train_config, t, x0, x1, z, xt
        )
        adam_step(opt, net, grad_w, grad_b_)
        trace[k] = loss
    field_label = (
        f"learned-mlp(hidden={net.hidden},steps={train_config.steps},seed={train_config.seed})"
    )
    return TrainResult(
        net=net,
        loss_trace=trace,
        drift_field=learned_drift_field(net, config, label=field_label),
        config=train_config,
        interpolant=config,
    )
