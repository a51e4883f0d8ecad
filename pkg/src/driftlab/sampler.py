"""Discrete-time SDE integration along a drift field.

The update is plain Euler-Maruyama with the drift frozen at the left
endpoint of each step:

    X_{k+1} = X_k + h_k * b(t_k, X_k) + sqrt(2 * epsilon * h_k) * w_k,

with w_k standard normal. Noise for step k is drawn from a stream keyed by
(seed, k), so a trajectory is reproducible regardless of how the work is
chunked or which checkpoints are recorded.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .batch import BatchMeta, SampleBatch
from .errors import ConfigurationError, NumericalBlowupError, ShapeError
from .gmm import GaussianMixture, TimeMarginal, drift
from .interpolant import Coupling, InterpolantConfig, sample_interpolant
from .rng import rng_stream
from .schedules import TimeGrid

BLOWUP_THRESHOLD = 1e9


@dataclass
class DriftField:
    """A named drift function: fn(t, X) -> (n, d) array for X of shape (n, d)."""

    fn: Callable[[float, np.ndarray], np.ndarray]
    drift_id: str
    meta: dict = field(default_factory=dict)

    def __call__(self, t: float, x: np.ndarray) -> np.ndarray:
        return self.fn(t, x)


def gmm_drift_field(
    rho0: GaussianMixture, rho1: GaussianMixture, config: InterpolantConfig
) -> DriftField:
    """Analytic forward drift for mixture endpoints under independent coupling."""

    def fn(t, x):
        return drift(rho0, rho1, config, t, x)

    label = (
        f"gmm-analytic(k0={rho0.n_components},k1={rho1.n_components},"
        f"gamma={config.gamma.label()},eps={config.epsilon:g})"
    )
    return DriftField(fn=fn, drift_id=label)


def initial_batch(
    config: InterpolantConfig,
    source: Coupling | GaussianMixture | TimeMarginal,
    n: int,
    rng_seed: int,
) -> SampleBatch:
    """Draw the sampler's starting batch at t0.

    Two supported initializations: an exact mixture for the t0 marginal
    (analytic runs), or a coupling which gets pushed through the interpolant
    at t0 (data-driven runs).
    """
    if isinstance(source, TimeMarginal):
        if abs(source.t - config.t0) > 1e-12:
            raise ConfigurationError(
                f"marginal was built at t={source.t}, config starts at t0={config.t0}"
            )
        source = source.mixture
    if isinstance(source, GaussianMixture):
        if source.dimension != config.dimension:
            raise ShapeError(
                f"marginal dimension {source.dimension} != config dimension {config.dimension}"
            )
        data = source.sample(n, rng_stream(rng_seed, "init-marginal"))
        return SampleBatch(data=data, meta=BatchMeta(seed=rng_seed, t=config.t0))
    if isinstance(source, Coupling):
        batch = sample_interpolant(config, source, config.t0, n, rng_seed)
        return batch
    raise ConfigurationError(
        f"initial batch source must be a mixture, marginal, or coupling, got {type(source).__name__}"
    )


def euler_maruyama(
    drift_field: DriftField,
    grid: TimeGrid,
    epsilon: float,
    init: SampleBatch,
    rng_seed: int,
    record_trajectory: bool = False,
    max_checkpoints: int = 16,
) -> SampleBatch | tuple[SampleBatch, list[SampleBatch]]:
    """Integrate the batch from grid.t0 to grid.t_end.

    With record_trajectory=True a list of at most max_checkpoints
    intermediate batches (evenly spaced in step index, always including the
    start) is returned alongside the final batch. Any non-finite drift value
    or a coordinate exceeding 1e9 raises NumericalBlowupError identifying
    the step, time, and first offending sample.
    """
    if not (epsilon >= 0.0):
        raise ConfigurationError(f"epsilon must be >= 0, got {epsilon}")
    if init.meta.t is None or abs(init.meta.t - grid.t0) > 1e-12:
        raise ConfigurationError(
            f"initial batch is at t={init.meta.t}, grid starts at t0={grid.t0}"
        )
    if max_checkpoints < 1:
        raise ConfigurationError(f"max_checkpoints must be >= 1, got {max_checkpoints}")

    x = init.data.copy()
    n, d = x.shape
    pts = grid.points
    n_steps = grid.n_steps

    checkpoint_steps: set[int] = set()
    trajectory: list[SampleBatch] = []
    if record_trajectory:
        n_checkpoints = min(max_checkpoints, n_steps + 1)
        idx = np.unique(np.round(np.linspace(0, n_steps, n_checkpoints)).astype(int))
        checkpoint_steps = set(int(i) for i in idx)

    def checkpoint(k: int):
        if record_trajectory and k in checkpoint_steps:
            trajectory.append(
                SampleBatch(
                    data=x.copy(),
                    meta=BatchMeta(
                        seed=rng_seed,
                        t=float(pts[k]),
                        grid_label=grid.label,
                        drift_id=drift_field.drift_id,
                        extra={"step": k},
                    ),
                )
            )

    checkpoint(0)
    for k in range(n_steps):
        t_k = float(pts[k])
        h_k = float(pts[k + 1] - pts[k])
        b = np.asarray(drift_field(t_k, x), dtype=np.float64)
        if b.shape != (n, d):
            raise ShapeError(
                f"drift '{drift_field.drift_id}' returned shape {b.shape}, expected {(n, d)}"
            )
        bad = ~np.isfinite(b)
        if np.any(bad):
            raise NumericalBlowupError(
                step=k,
                t=t_k,
                sample_index=int(np.argwhere(bad.any(axis=1))[0, 0]),
                message=f"drift produced non-finite values at step {k} (t={t_k:.6g})",
            )
        x = x + h_k * b
        if epsilon > 0.0:
            w = rng_stream(rng_seed, "em-step", k).standard_normal((n, d))
            x += np.sqrt(2.0 * epsilon * h_k) * w
        over = np.abs(x) > BLOWUP_THRESHOLD
        if np.any(over):
            first = int(np.argwhere(over.any(axis=1))[0, 0])
            raise NumericalBlowupError(step=k, t=t_k, sample_index=first)
        checkpoint(k + 1)

    final = SampleBatch(
        data=x,
        meta=BatchMeta(
            seed=rng_seed,
            t=grid.t_end,
            grid_label=grid.label,
            drift_id=drift_field.drift_id,
        ),
    )
    if record_trajectory:
        return final, trajectory
    return final
