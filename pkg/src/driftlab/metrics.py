"""Distribution-distance estimators for sample batches.

The workhorse is the k-nearest-neighbor KL estimator of Wang, Kulkarni and
Verdu (2009): with r_i the distance from p-sample i to its k-th nearest
neighbor among the other p-samples and s_i the k-th nearest among the
q-samples,

    KL(p || q) ~= (d / n) * sum_i log(s_i / r_i) + log(m / (n - 1)).

It is consistent but noisy and slightly biased at finite n, so closed-form
Gaussian KL and first/second-moment gaps are provided as calibration aids.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .errors import ConfigurationError, DegeneracyError, ShapeError, UnreliableEstimateWarning

# Above this dimension a KD-tree degrades toward linear scans; go straight
# to the chunked brute-force path instead.
TREE_DIMENSION_LIMIT = 10


@dataclass(frozen=True)
class KnnConfig:
    k: int = 5
    min_distance: float = 1e-12

    def __post_init__(self):
        if self.k < 1:
            raise ConfigurationError(f"k must be >= 1, got {self.k}")
        if not (self.min_distance > 0.0):
            raise ConfigurationError(f"min_distance must be positive, got {self.min_distance}")


def _as_points(x, name: str) -> np.ndarray:
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] < 1:
        raise ShapeError(f"{name} must be a non-empty (n, d) array, got shape {arr.shape}")
    if not np.isfinite(arr).all():
        raise ShapeError(f"{name} contains non-finite entries")
    return arr


def _kth_distances_tree(queries: np.ndarray, points: np.ndarray, k: int, exclude_self: bool):
    tree = cKDTree(points)
    kk = k + 1 if exclude_self else k
    dist, _ = tree.query(queries, k=kk, workers=-1)
    dist = np.atleast_2d(dist)
    return dist[:, -1]

def _kth_distances_brute(queries: np.ndarray, points: np.ndarray, k: int, exclude_self: bool):
    kk = k + 1 if exclude_self else k
    out = np.empty(queries.shape[0])
    chunk = max(1, int(2e7) // max(points.shape[0], 1))
    for start in range(0, queries.shape[0], chunk):
        q = queries[start : start + chunk]
        sq = (
            np.sum(q * q, axis=1)[:, None]
            - 2.0 * q @ points.T
            + np.sum(points * points, axis=1)[None, :]
        )
        np.maximum(sq, 0.0, out=sq)
        part = np.partition(sq, kk - 1, axis=1)[:, kk - 1]
        out[start : start + chunk] = np.sqrt(part)
    return out


def kth_neighbor_distances(
    queries: np.ndarray, points: np.ndarray, k: int, exclude_self: bool = False
) -> np.ndarray:
    """Distance from each query to its k-th nearest neighbor among points.

    With exclude_self=True the queries are assumed to be the same array as
    points and the zero self-distance is skipped. Search is exact: a KD-tree
    up to dimension 10, chunked brute force beyond.
    """
    queries = _as_points(queries, "queries")
    points = _as_points(points, "points")
    if queries.shape[1] != points.shape[1]:
        raise ShapeError(
            f"dimension mismatch: queries {queries.shape[1]}, points {points.shape[1]}"
        )
    kk = k + 1 if exclude_self else k
    if kk > points.shape[0]:
        raise ShapeError(
            f"need at least {kk} reference points for k={k} "
            f"(exclude_self={exclude_self}), got {points.shape[0]}"
        )
    if points.shape[1] > TREE_DIMENSION_LIMIT:
        return _kth_distances_brute(queries, points, k, exclude_self)
    return _kth_distances_tree(queries, points, k, exclude_self)


def knn_kl(p_samples, q_samples, config: KnnConfig = KnnConfig()) -> float:
    """k-NN estimate of KL(p || q) from samples of each law.

    Distances are floored at config.min_distance; if any distance actually
    hits the floor (duplicate points), the estimate is still returned but an
    UnreliableEstimateWarning is emitted.
    """
    p = _as_points(p_samples, "p_samples")
    q = _as_points(q_samples, "q_samples")
    if p.shape[1] != q.shape[1]:
        raise ShapeError(f"dimension mismatch: p has d={p.shape[1]}, q has d={q.shape[1]}")
    n, d = p.shape
    m = q.shape[0]
    if n < config.k + 1:
        raise ShapeError(f"need at least k+1={config.k + 1} p-samples, got {n}")
    if m < config.k:
        raise ShapeError(f"need at least k={config.k} q-samples, got {m}")

    r = kth_neighbor_distances(p, p, config.k, exclude_self=True)
    s = kth_neighbor_distances(p, q, config.k, exclude_self=False)
    floored = int(np.sum(r < config.min_distance) + np.sum(s < config.min_distance))
    if floored:
        warnings.warn(
            f"{floored} neighbor distances hit the {config.min_distance:g} floor "
            "(duplicate points?); KL estimate may be unreliable",
            UnreliableEstimateWarning,
            stacklevel=2,
        )
    r = np.maximum(r, config.min_distance)
    s = np.maximum(s, config.min_distance)
    return float(d * np.mean(np.log(s) - np.log(r)) + np.log(m / (n - 1.0)))


def gaussian_kl(mean_p, cov_p, mean_q, cov_q) -> float:
    """Closed-form KL(N(mean_p, cov_p) || N(mean_q, cov_q))."""
    mean_p = np.atleast_1d(np.asarray(mean_p, dtype=np.float64))
    mean_q = np.atleast_1d(np.asarray(mean_q, dtype=np.float64))
    cov_p = np.atleast_2d(np.asarray(cov_p, dtype=np.float64))
    cov_q = np.atleast_2d(np.asarray(cov_q, dtype=np.float64))
    d = mean_p.shape[0]
    if mean_q.shape != (d,) or cov_p.shape != (d, d) or cov_q.shape != (d, d):
        raise ShapeError(
            f"inconsistent shapes: means {mean_p.shape}/{mean_q.shape}, "
            f"covs {cov_p.shape}/{cov_q.shape}"
        )
    try:
        chol_q = np.linalg.cholesky(cov_q)
        chol_p = np.linalg.cholesky(cov_p)
    except np.linalg.LinAlgError as exc:
        raise DegeneracyError(f"covariance is not positive definite: {exc}") from exc
    solved = np.linalg.solve(cov_q, cov_p)
    diff = mean_q - mean_p
    maha = diff @ np.linalg.solve(cov_q, diff)
    logdet_q = 2.0 * np.sum(np.log(np.diag(chol_q)))
    logdet_p = 2.0 * np.sum(np.log(np.diag(chol_p)))
    return float(0.5 * (np.trace(solved) + maha - d + logdet_q - logdet_p))


def moment_distance(p_samples, q_samples) -> dict[str, float]:
    """First/second-moment gaps between two sample sets.

    Returns {"mean_gap": |mean_p - mean_q|_2,
             "cov_gap": |cov_p - cov_q|_Frobenius}.
    """
    p = _as_points(p_samples, "p_samples")
    q = _as_points(q_samples, "q_samples")
    if p.shape[1] != q.shape[1]:
        raise ShapeError(f"dimension mismatch: p has d={p.shape[1]}, q has d={q.shape[1]}")
    mean_gap = float(np.linalg.norm(p.mean(axis=0) - q.mean(axis=0)))
    cov_p = np.cov(p, rowvar=False).reshape(p.shape[1], p.shape[1])
    cov_q = np.cov(q, rowvar=False).reshape(q.shape[1], q.shape[1])
    cov_gap = float(np.linalg.norm(cov_p - cov_q, ord="fro"))
    return {"mean_gap": mean_gap, "cov_gap": cov_gap}
