"""Toy 2-D datasets and mixture benchmark instances.

The 2-D generators (checkerboard, spiral, blocks) exist to exercise the
learned-drift path on laws with no tractable density; the mixture builders
feed the analytic path. Geometry constants are module-level so tests and
experiments agree on the layouts.
"""

from __future__ import annotations

import numpy as np

from .batch import BatchMeta, SampleBatch
from .errors import ConfigurationError, ShapeError
from .interpolant import PairedEmpirical
from .gmm import GaussianMixture
from .rng import rng_stream

DATASET_NAMES = ("checkerboard", "spiral", "blocks-a", "blocks-b", "blocks-target", "gmm-benchmark")

# Checkerboard: unit squares tiling [-2, 2]^2, keeping the 8 squares whose
# lower-left corner (i, j) has i + j even.
CHECKER_CORNERS = [(i, j) for i in range(-2, 2) for j in range(-2, 2) if (i + j) % 2 == 0]

SPIRAL_THETA_MIN = 0.5
SPIRAL_THETA_MAX = 3.0 * np.pi
SPIRAL_RADIUS_SLOPE = 1.0 / 3.0
SPIRAL_NOISE = 0.1

# Blocks: four unit squares stacked vertically (y in [j, j+1], j = -2..1).
# The target column sits at x in [0, 1]; the "A" source column is close to
# it, the "B" source column far, which is the whole point of the pair.
BLOCK_ROWS = (-2, -1, 0, 1)
BLOCK_X_LEFT = {"blocks-a": -1.5, "blocks-b": -5.0, "blocks-target": 0.0}


def checkerboard_samples(n: int, rng: np.random.Generator) -> np.ndarray:
    corners = np.asarray(CHECKER_CORNERS, dtype=np.float64)
    which = rng.integers(0, len(corners), size=n)
    return corners[which] + rng.uniform(0.0, 1.0, size=(n, 2))


def spiral_angles(n: int, rng: np.random.Generator) -> np.ndarray:
    return rng.uniform(SPIRAL_THETA_MIN, SPIRAL_THETA_MAX, size=n)


def spiral_base(theta: np.ndarray) -> np.ndarray:
    r = SPIRAL_RADIUS_SLOPE * theta
    return np.stack([r * np.cos(theta), r * np.sin(theta)], axis=1)


def block_samples(name: str, n: int, rng: np.random.Generator) -> np.ndarray:
    x_left = BLOCK_X_LEFT[name]
    rows = rng.integers(0, len(BLOCK_ROWS), size=n)
    u = rng.uniform(0.0, 1.0, size=(n, 2))
    out = np.empty((n, 2))
    out[:, 0] = x_left + u[:, 0]
    out[:, 1] = np.asarray(BLOCK_ROWS, dtype=np.float64)[rows] + u[:, 1]
    return out


def sample_dataset(
    name: str, n: int, rng_seed: int, d: int = 2, components: int = 2
) -> SampleBatch:
    """Draw n samples of the named dataset; deterministic in rng_seed."""
    if n < 1:
        raise ShapeError(f"need n >= 1 samples, got {n}")
    if name not in DATASET_NAMES:
        raise ConfigurationError(f"unknown dataset {name!r}; choose from {DATASET_NAMES}")
    rng = rng_stream(rng_seed, "dataset", name)
    if name == "checkerboard":
        data = checkerboard_samples(n, rng)
    elif name == "spiral":
        theta = spiral_angles(n, rng)
        data = spiral_base(theta) + SPIRAL_NOISE * rng.standard_normal((n, 2))
    elif name in BLOCK_X_LEFT:
        data = block_samples(name, n, rng)
    else:
        _, rho1 = dimension_benchmark(d, components)
        data = rho1.sample(n, rng)
    return SampleBatch(data=data, meta=BatchMeta(seed=rng_seed, extra={"dataset": name}))


def paired_coupling(source: str, target: str, n: int, rng_seed: int) -> PairedEmpirical:
    """Block-matched empirical coupling: both marginals of each pair share a
    vertical block index, so the joint block histogram is exactly diagonal."""
    for name in (source, target):
        if name not in BLOCK_X_LEFT:
            raise ConfigurationError(
                f"paired coupling is defined for block datasets, got {name!r}"
            )
    rng = rng_stream(rng_seed, "paired-coupling", source, target)
    rows = rng.integers(0, len(BLOCK_ROWS), size=n)
    y_base = np.asarray(BLOCK_ROWS, dtype=np.float64)[rows]
    u0 = rng.uniform(0.0, 1.0, size=(n, 2))
    u1 = rng.uniform(0.0, 1.0, size=(n, 2))
    x0 = np.stack([BLOCK_X_LEFT[source] + u0[:, 0], y_base + u0[:, 1]], axis=1)
    x1 = np.stack([BLOCK_X_LEFT[target] + u1[:, 0], y_base + u1[:, 1]], axis=1)
    return PairedEmpirical(x0=x0, x1=x1)


def schedule_benchmark() -> tuple[GaussianMixture, GaussianMixture]:
    """The 2-D mixture pair used for schedule comparisons: two well-separated
    modes on each side, arranged crosswise so every pair transport is long."""
    rho0 = GaussianMixture(
        weights=[0.5, 0.5],
        means=[[-3.0, 0.0], [3.0, 0.0]],
        covariances=[np.eye(2) * 0.3, np.eye(2) * 0.3],
    )
    rho1 = GaussianMixture(
        weights=[0.5, 0.5],
        means=[[0.0, -3.0], [0.0, 3.0]],
        covariances=[np.eye(2) * 0.3, np.eye(2) * 0.3],
    )
    return rho0, rho1


def dimension_benchmark(d: int, components: int = 2) -> tuple[GaussianMixture, GaussianMixture]:
    """Mixture pair with structure in every coordinate, for dimension sweeps.

    The source is standard normal; the target splits into `components` modes
    along the first axis and contracts the variance of every coordinate, so
    the per-dimension work of the transport does not vanish as d grows.
    """
    if d < 1:
        raise ConfigurationError(f"dimension must be >= 1, got {d}")
    if components < 1:
        raise ConfigurationError(f"need >= 1 components, got {components}")
    rho0 = GaussianMixture(
        weights=[1.0], means=np.zeros((1, d)), covariances=np.eye(d)[None, :, :]
    )
    offsets = np.linspace(-3.0, 3.0, components) if components > 1 else np.zeros(1)
    means = np.zeros((components, d))
    means[:, 0] = offsets
    covs = np.repeat(np.eye(d)[None, :, :] * 0.25, components, axis=0)
    rho1 = GaussianMixture(
        weights=np.full(components, 1.0 / components), means=means, covariances=covs
    )
    return rho0, rho1


def distance_benchmark(
    far: bool,
) -> tuple[GaussianMixture, GaussianMixture]:
    """Source/target pair for the coupling-distance effect.

    The target is fixed; the source is a unit Gaussian either near the
    target's modes (far=False) or shifted well away (far=True), inflating
    E|x0 - x1|^4 by far more than the 4x the comparison calls for.
    """
    rho1 = GaussianMixture(
        weights=[0.5, 0.5],
        means=[[0.0, -2.0], [0.0, 2.0]],
        covariances=[np.eye(2) * 0.3, np.eye(2) * 0.3],
    )
    shift = -8.0 if far else -1.0
    rho0 = GaussianMixture(
        weights=[1.0], means=[[shift, 0.0]], covariances=[np.eye(2)]
    )
    return rho0, rho1
