"""Exact drift algebra for Gaussian-mixture boundary laws.

When both endpoints are Gaussian mixtures and the coupling is the
independent product, the law of x_t = (1-t) x0 + t x1 + gamma(t) z is again
a Gaussian mixture with one component per (i, j) pair:

    weight      w0_i * w1_j
    mean        m_ij = (1-t) mu0_i + t mu1_j
    covariance  C_ij = (1-t)^2 S0_i + t^2 S1_j + gamma^2(t) I

Everything downstream (log-density, score, conditional-mean velocity, the
sampling drift) reduces to responsibilities and solves against the C_ij,
which are done through cached Cholesky factors; no matrix is ever inverted
explicitly.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.linalg import solve_triangular
from scipy.special import logsumexp

from .errors import DegeneracyError, DomainError, ShapeError, UnreliableEstimateWarning
from .interpolant import (
    Coupling,
    GammaFamily,
    InterpolantConfig,
    gamma_eval,
    interpolate,
)
from .rng import rng_stream

_LOG_2PI = float(np.log(2.0 * np.pi))


@dataclass
class GaussianMixture:
    """A finite Gaussian mixture with cached Cholesky factors.

    weights: (K,), nonnegative, summing to 1.
    means: (K, d).
    covariances: (K, d, d), each symmetric positive definite.
    """

    weights: np.ndarray
    means: np.ndarray
    covariances: np.ndarray
    _chols: np.ndarray = field(init=False, repr=False)
    _log_norms: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64).ravel()
        mu = np.atleast_2d(np.asarray(self.means, dtype=np.float64))
        cov = np.asarray(self.covariances, dtype=np.float64)
        if cov.ndim == 2:
            cov = cov[None, :, :]
        k, d = mu.shape
        if w.shape != (k,) or cov.shape != (k, d, d):
            raise ShapeError(
                f"inconsistent mixture shapes: weights {w.shape}, means {mu.shape}, covs {cov.shape}"
            )
        if np.any(w < 0) or not np.isfinite(w).all():
            raise DegeneracyError("mixture weights must be finite and nonnegative")
        total = w.sum()
        if abs(total - 1.0) > 1e-9:
            raise DegeneracyError(f"mixture weights must sum to 1, got {total!r}")
        asym = np.abs(cov - np.transpose(cov, (0, 2, 1))).max()
        if asym > 1e-9 * (1.0 + np.abs(cov).max()):
            raise DegeneracyError(f"covariances must be symmetric (max asymmetry {asym:g})")
        cov = 0.5 * (cov + np.transpose(cov, (0, 2, 1)))
        try:
            chols = np.linalg.cholesky(cov)
        except np.linalg.LinAlgError as exc:
            raise DegeneracyError(f"covariance is not positive definite: {exc}") from exc
        self.weights = w
        self.means = mu
        self.covariances = cov
        self._chols = chols
        # log of the Gaussian normalizer: -d/2 log(2 pi) - sum log diag L
        self._log_norms = -0.5 * d * _LOG_2PI - np.sum(
            np.log(np.diagonal(chols, axis1=1, axis2=2)), axis=1
        )

    @property
    def n_components(self) -> int:
        return self.weights.shape[0]

    @property
    def dimension(self) -> int:
        return self.means.shape[1]

    def component_logpdfs(self, x: np.ndarray) -> np.ndarray:
        """Per-component Gaussian log-densities at the rows of x; shape (n, K)."""
        x = _as_batch(x, self.dimension)
        out = np.empty((x.shape[0], self.n_components))
        for k in range(self.n_components):
            u = x - self.means[k]
            # Solve L y = u^T; the Mahalanobis term is |y|^2.
            y = solve_triangular(self._chols[k], u.T, lower=True, check_finite=False)
            out[:, k] = self._log_norms[k] - 0.5 * np.sum(y * y, axis=0)
        return out

    def logpdf(self, x: np.ndarray) -> np.ndarray | float:
        x_arr = np.asarray(x, dtype=np.float64)
        comp = self.component_logpdfs(x_arr)
        with np.errstate(divide="ignore"):
            log_w = np.log(self.weights)
        vals = logsumexp(comp + log_w[None, :], axis=1)
        return float(vals[0]) if x_arr.ndim == 1 else vals

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        if n < 1:
            raise ShapeError(f"need n >= 1 samples, got {n}")
        comps = rng.choice(self.n_components, size=n, p=self.weights)
        eps = rng.standard_normal((n, self.dimension))
        out = np.empty_like(eps)
        for k in range(self.n_components):
            mask = comps == k
            if np.any(mask):
                out[mask] = self.means[k] + eps[mask] @ self._chols[k].T
        return out

    def mean(self) -> np.ndarray:
        return self.weights @ self.means

    def covariance(self) -> np.ndarray:
        m = self.mean()
        second = np.zeros((self.dimension, self.dimension))
        for k in range(self.n_components):
            mu = self.means[k]
            second += self.weights[k] * (self.covariances[k] + np.outer(mu, mu))
        return second - np.outer(m, m)

    def to_json_dict(self) -> dict:
        return {
            "weights": self.weights.tolist(),
            "means": self.means.tolist(),
            "covariances": self.covariances.tolist(),
        }

    @classmethod
    def from_json_dict(cls, doc: dict) -> "GaussianMixture":
        missing = {"weights", "means", "covariances"} - set(doc)
        if missing:
            raise ShapeError(f"mixture document missing keys: {sorted(missing)}")
        return cls(
            weights=np.asarray(doc["weights"], dtype=np.float64),
            means=np.asarray(doc["means"], dtype=np.float64),
            covariances=np.asarray(doc["covariances"], dtype=np.float64),
        )


def save_mixture(mixture: GaussianMixture, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(mixture.to_json_dict(), fh, indent=2)
        fh.write("\n")
    return path


def load_mixture(path: str | Path) -> GaussianMixture:
    with open(path) as fh:
        return GaussianMixture.from_json_dict(json.load(fh))


@dataclass
class TimeMarginal:
    """The law of x_t for mixture endpoints under the independent coupling.

    Wraps the pair-component mixture together with the time and noise scale
    it was built at, plus index maps back into the endpoint mixtures (pair
    component k corresponds to source component i_index[k] and target
    component j_index[k]).
    """

    t: float
    gamma_sq: float
    mixture: GaussianMixture
    i_index: np.ndarray
    j_index: np.ndarray

    @property
    def pair_weights(self) -> np.ndarray:
        return self.mixture.weights

    @property
    def pair_means(self) -> np.ndarray:
        return self.mixture.means

    @property
    def pair_covariances(self) -> np.ndarray:
        return self.mixture.covariances


def time_marginal(
    rho0: GaussianMixture, rho1: GaussianMixture, gamma: GammaFamily, t: float
) -> TimeMarginal:
    """Build the exact Gaussian-mixture law of x_t."""
    if rho0.dimension != rho1.dimension:
        raise ShapeError(
            f"endpoint mixtures disagree on dimension: {rho0.dimension} vs {rho1.dimension}"
        )
    t = float(t)
    if not (0.0 <= t <= 1.0):
        raise DomainError(f"t must lie in [0, 1], got {t}")
    g, _ = gamma_eval(gamma, t)
    gsq = g * g
    d = rho0.dimension
    k0, k1 = rho0.n_components, rho1.n_components
    i_idx, j_idx = np.divmod(np.arange(k0 * k1), k1)
    w = (rho0.weights[i_idx] * rho1.weights[j_idx]).astype(np.float64)
    w = w / w.sum()  # kill accumulated rounding so pair weights sum to 1 exactly
    means = (1.0 - t) * rho0.means[i_idx] + t * rho1.means[j_idx]
    covs = (
        (1.0 - t) ** 2 * rho0.covariances[i_idx]
        + t**2 * rho1.covariances[j_idx]
        + gsq * np.eye(d)[None, :, :]
    )
    mixture = GaussianMixture(weights=w, means=means, covariances=covs)
    return TimeMarginal(t=t, gamma_sq=gsq, mixture=mixture, i_index=i_idx, j_index=j_idx)


def log_density(marginal: TimeMarginal, x: np.ndarray):
    """log rho(t, x) under the pair-component mixture."""
    return marginal.mixture.logpdf(x)


def responsibilities(marginal: TimeMarginal, x: np.ndarray) -> np.ndarray:
    """Posterior pair-component probabilities r_ij(x); rows sum to 1."""
    resp, _ = _posterior(marginal.mixture, _as_batch(x, marginal.mixture.dimension))
    return resp


def score(marginal: TimeMarginal, x: np.ndarray):
    """del_x log rho(t, x) = - sum_ij r_ij(x) C_ij^{-1} (x - m_ij)."""
    x_arr = np.asarray(x, dtype=np.float64)
    batch = _as_batch(x_arr, marginal.mixture.dimension)
    resp, cinv_u = _posterior(marginal.mixture, batch)
    out = -np.einsum("nk,knd->nd", resp, cinv_u)
    return out[0] if x_arr.ndim == 1 else out


def velocity(
    rho0: GaussianMixture,
    rho1: GaussianMixture,
    gamma: GammaFamily,
    t: float,
    x: np.ndarray,
):
    """E[x1 - x0 | x_t = x], the velocity field of the interpolant.

    Per pair component the conditional means follow from joint-Gaussian
    conditioning of (x0, x1) on x_t:

        E[x0 | ij, x] = mu0_i + (1-t) S0_i C_ij^{-1} (x - m_ij)
        E[x1 | ij, x] = mu1_j +     t S1_j C_ij^{-1} (x - m_ij)

    and the field mixes the differences with the responsibilities.
    """
    marginal = time_marginal(rho0, rho1, gamma, t)
    x_arr = np.asarray(x, dtype=np.float64)
    batch = _as_batch(x_arr, marginal.mixture.dimension)
    resp, cinv_u = _posterior(marginal.mixture, batch)
    out = _mix_velocity(marginal, rho0, rho1, resp, cinv_u)
    return out[0] if x_arr.ndim == 1 else out


def drift(
    rho0: GaussianMixture,
    rho1: GaussianMixture,
    config: InterpolantConfig,
    t: float,
    x: np.ndarray,
):
    """Forward sampling drift v + (epsilon - gamma gamma') * score at time t.

    Shares one responsibility/solve pass between the velocity and score
    terms, so the identity drift = velocity + (epsilon - gamma gamma') score
    holds to machine precision by construction.
    """
    marginal = time_marginal(rho0, rho1, config.gamma, t)
    x_arr = np.asarray(x, dtype=np.float64)
    batch = _as_batch(x_arr, marginal.mixture.dimension)
    resp, cinv_u = _posterior(marginal.mixture, batch)
    v = _mix_velocity(marginal, rho0, rho1, resp, cinv_u)
    s = -np.einsum("nk,knd->nd", resp, cinv_u)
    _, gdot = gamma_eval(config.gamma, t)
    out = v + (config.epsilon - 0.5 * gdot) * s
    return out[0] if x_arr.ndim == 1 else out


@dataclass
class McEstimate:
    """Self-normalized importance-sampling estimate with diagnostics."""

    value: np.ndarray
    ess: float
    standard_error: np.ndarray
    n_draws: int


def mc_conditional_expectation(
    coupling: Coupling,
    gamma: GammaFamily,
    t: float,
    x: np.ndarray,
    f,
    n: int,
    rng_seed: int,
    ess_floor: float = 100.0,
) -> McEstimate:
    """Monte Carlo estimate of E[f(x0, x1, z) | x_t = x].

    Draws pairs from the coupling, treats the latent as determined by
    z = (x - I(t, x0, x1)) / gamma(t), and reweights by the Gaussian kernel

        w propto exp(-|x - I(t, x0, x1)|^2 / (2 gamma^2(t))),

    normalized in log space. Works for any coupling, which is what makes it
    an independent check on the closed-form mixture algebra above. Returns
    the estimate with an effective-sample-size diagnostic and a delta-method
    standard error; a low ESS warns but does not fail.
    """
    t = float(t)
    if not (0.0 < t < 1.0):
        raise DomainError(f"conditioning requires t in (0, 1), got {t}")
    if n < 2:
        raise ShapeError(f"need n >= 2 draws, got {n}")
    g, _ = gamma_eval(gamma, t)
    if g <= 0.0:
        raise DomainError(f"gamma(t) must be positive for conditioning, got {g} at t={t}")
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (coupling.dimension,):
        raise ShapeError(f"x must have shape ({coupling.dimension},), got {x.shape}")
    rng = rng_stream(rng_seed, "mc-conditional")
    x0, x1 = coupling.sample_pairs(n, rng)
    mean_part = interpolate(x0, x1, np.zeros_like(x0), gamma, t)
    resid = x[None, :] - mean_part
    z_implied = resid / g
    log_w = -0.5 * np.sum(resid * resid, axis=1) / (g * g)
    log_w -= logsumexp(log_w)
    w = np.exp(log_w)
    ess = 1.0 / np.sum(w * w)
    if ess < ess_floor:
        warnings.warn(
            f"conditional-expectation ESS {ess:.1f} below floor {ess_floor:g} "
            f"(t={t}, n={n}); estimate may be unreliable",
            UnreliableEstimateWarning,
            stacklevel=2,
        )
    values = np.asarray(f(x0, x1, z_implied), dtype=np.float64)
    if values.ndim == 1:
        values = values[:, None]
    if values.shape[0] != n:
        raise ShapeError(f"f must return one row per draw, got shape {values.shape}")
    est = w @ values
    # Delta-method variance of a self-normalized importance-sampling ratio.
    se = np.sqrt(np.sum((w[:, None] * (values - est[None, :])) ** 2, axis=0))
    return McEstimate(value=est, ess=float(ess), standard_error=se, n_draws=n)


def _as_batch(x: np.ndarray, d: int) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        x = x[None, :]
    if x.ndim != 2 or x.shape[1] != d:
        raise ShapeError(f"points must have shape (n, {d}) or ({d},), got {x.shape}")
    return x


def _posterior(mixture: GaussianMixture, x: np.ndarray):
    """Responsibilities and C_k^{-1}(x - m_k) for every component, shared
    by the score/velocity/drift evaluations. x is (n, d); returns
    (resp (n, K), cinv_u (K, n, d))."""
    n, d = x.shape
    k_comps = mixture.n_components
    log_comp = np.empty((n, k_comps))
    cinv_u = np.empty((k_comps, n, d))
    for k in range(k_comps):
        u = (x - mixture.means[k]).T  # (d, n)
        chol = mixture._chols[k]
        y = solve_triangular(chol, u, lower=True, check_finite=False)
        log_comp[:, k] = mixture._log_norms[k] - 0.5 * np.sum(y * y, axis=0)
        cinv_u[k] = solve_triangular(chol.T, y, lower=False, check_finite=False).T
    with np.errstate(divide="ignore"):
        log_post = log_comp + np.log(mixture.weights)[None, :]
    log_post -= logsumexp(log_post, axis=1, keepdims=True)
    return np.exp(log_post), cinv_u


def _mix_velocity(marginal, rho0, rho1, resp, cinv_u):
    t = marginal.t
    k_comps = marginal.mixture.n_components
    n, d = cinv_u.shape[1], cinv_u.shape[2]
    out = np.zeros((n, d))
    for k in range(k_comps):
        i, j = marginal.i_index[k], marginal.j_index[k]
        dmu = rho1.means[j] - rho0.means[i]
        # t S1_j - (1-t) S0_i, the covariance gap steering the conditional means.
        a_mat = t * rho1.covariances[j] - (1.0 - t) * rho0.covariances[i]
        out += resp[:, k : k + 1] * (dmu[None, :] + cinv_u[k] @ a_mat.T)
    return out
