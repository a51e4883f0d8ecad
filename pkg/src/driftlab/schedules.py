"""Time grids for the discrete-time sampler.

Three constructions:

* uniform_grid: N equal steps on [t0, t_end].
* exp_decay_grid: steps sized h_k = h * min(t_{k+1}, 1 - t_k), realized in
  closed form by anchoring the grid at 1/2 and letting the points decay
  geometrically toward both endpoints:

      t_k = 0.5 (1-h)^{M-k}          for k <= M,
      t_k = 1 - 0.5 (1-h)^{k-M}      for k >= M,

  with M the smallest integer such that 0.5 (1-h)^M <= t0. The outermost
  points are clamped onto t0 and t_end, which only shrinks the outer steps.
  The step count grows like h^{-1} log(1 / (t0 (1 - t_end))).
* asymmetric_grid: for noise scales that vanish quadratically at t = 1 and
  linearly at t = 0. Below 1/2 the points follow t_k = (1 - hA) t_{k+1}
  (i.e. h_k = hA * t_{k+1}); above 1/2 the steps are h_k = hB (1 - t_k)^{3/2},
  so the upper count grows like hB^{-1} (1 - t_end)^{-1/2}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError


@dataclass(frozen=True)
class TimeGrid:
    """Strictly increasing integration times inside (0, 1)."""

    points: np.ndarray
    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim != 1 or pts.shape[0] < 2:
            raise ConfigurationError(f"a grid needs at least 2 points, got shape {pts.shape}")
        if pts[0] <= 0.0 or pts[-1] >= 1.0:
            raise ConfigurationError(
                f"grid must stay inside (0, 1), got endpoints ({pts[0]}, {pts[-1]})"
            )
        if np.any(np.diff(pts) <= 0.0):
            raise ConfigurationError("grid points must be strictly increasing")
        object.__setattr__(self, "points", pts)

    @property
    def t0(self) -> float:
        return float(self.points[0])

    @property
    def t_end(self) -> float:
        return float(self.points[-1])

    @property
    def n_steps(self) -> int:
        return self.points.shape[0] - 1

    @property
    def steps(self) -> np.ndarray:
        return np.diff(self.points)

    @property
    def label(self) -> str:
        if not self.params:
            return self.kind
        inner = ",".join(f"{k}={v:g}" for k, v in sorted(self.params.items()))
        return f"{self.kind}({inner})"


def _check_window(t0: float, t_end: float):
    if not (0.0 < t0 < 0.5 < t_end < 1.0):
        raise ConfigurationError(
            f"time window must satisfy 0 < t0 < 0.5 < t_end < 1, got ({t0}, {t_end})"
        )


def uniform_grid(t0: float, t_end: float, n_steps: int) -> TimeGrid:
    """N equal steps from t0 to t_end."""
    if not (0.0 < t0 < t_end < 1.0):
        raise ConfigurationError(f"need 0 < t0 < t_end < 1, got ({t0}, {t_end})")
    if n_steps < 1:
        raise ConfigurationError(f"need at least one step, got {n_steps}")
    pts = np.linspace(t0, t_end, n_steps + 1)
    return TimeGrid(points=pts, kind="uniform", params={"n": n_steps})


def _geometric_tail_count(target: float, h: float) -> int:
    """Smallest M with 0.5 (1-h)^M <= target, at least 1."""
    return max(math.ceil(math.log(2.0 * target) / math.log1p(-h)), 1)


def exp_decay_grid(t0: float, t_end: float, h: float) -> TimeGrid:
    """Geometric refinement toward both endpoints with rate h in (0, 1).

    Every interior step satisfies h_k <= h * min(t_{k+1}, 1 - t_k), with
    equality away from the clamped outermost steps.
    """
    _check_window(t0, t_end)
    if not (0.0 < h < 1.0):
        raise ConfigurationError(f"decay rate h must lie in (0, 1), got {h}")
    m_lower = _geometric_tail_count(t0, h)
    p_upper = _geometric_tail_count(1.0 - t_end, h)
    lower = 0.5 * (1.0 - h) ** np.arange(m_lower, 0, -1)
    upper = 1.0 - 0.5 * (1.0 - h) ** np.arange(1, p_upper + 1)
    pts = np.concatenate([lower, [0.5], upper])
    pts[0] = t0
    pts[-1] = t_end
    return TimeGrid(points=pts, kind="exp-decay", params={"h": h})


def asymmetric_grid(t0: float, t_end: float, h_lower: float, h_upper: float) -> TimeGrid:
    """Two-regime grid: geometric below 1/2, power-law clustered above.

    Lower segment (built backward from 1/2): t_k = (1 - h_lower) t_{k+1},
    clamped onto t0. Upper segment (built forward from 1/2): steps
    h_k = h_upper (1 - t_k)^{3/2}, clamped onto t_end.
    """
    _check_window(t0, t_end)
    if not (0.0 < h_lower < 0.5):
        raise ConfigurationError(f"lower rate must lie in (0, 0.5), got {h_lower}")
    if not (0.0 < h_upper < 1.0):
        raise ConfigurationError(f"upper rate must lie in (0, 1), got {h_upper}")
    n_lower = _geometric_tail_count(t0, h_lower)
    lower = 0.5 * (1.0 - h_lower) ** np.arange(n_lower, 0, -1)
    lower[0] = t0
    upper = [0.5]
    while upper[-1] < t_end:
        t_k = upper[-1]
        upper.append(t_k + h_upper * (1.0 - t_k) ** 1.5)
    upper[-1] = t_end
    pts = np.concatenate([lower, np.asarray(upper)])
    return TimeGrid(
        points=pts, kind="asymmetric", params={"hA": h_lower, "hB": h_upper}
    )


def _bisect_rate(count_of_rate, target: int, lo: float, hi: float, what: str) -> float:
    """Find a rate whose (decreasing, integer-valued) step count hits target."""
    if count_of_rate(lo) < target:
        raise ConfigurationError(f"{what}: even rate {lo} gives fewer than {target} steps")
    if count_of_rate(hi) > target:
        raise ConfigurationError(f"{what}: even rate {hi} gives more than {target} steps")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if count_of_rate(mid) > target:
            lo = mid
        else:
            hi = mid
    if count_of_rate(hi) != target:
        raise ConfigurationError(
            f"{what}: no rate reaches exactly {target} steps "
            f"(closest achievable is {count_of_rate(hi)})"
        )
    return hi


def exp_decay_grid_for_steps(t0: float, t_end: float, n_steps: int) -> TimeGrid:
    """Exp-decay grid with exactly n_steps steps, found by bisecting h.

    The step count is a decreasing step function of h; symmetric windows
    (t0 = 1 - t_end) only realize even counts.
    """
    _check_window(t0, t_end)
    if n_steps < 2:
        raise ConfigurationError(f"exp-decay grids have at least 2 steps, got {n_steps}")

    def count(h: float) -> int:
        return _geometric_tail_count(t0, h) + _geometric_tail_count(1.0 - t_end, h)

    h = _bisect_rate(count, n_steps, 1e-9, 1.0 - 1e-9, "exp-decay grid")
    grid = exp_decay_grid(t0, t_end, h)
    assert grid.n_steps == n_steps
    return grid


def asymmetric_grid_for_steps(t0: float, t_end: float, n_steps: int) -> TimeGrid:
    """Asymmetric grid with exactly n_steps steps, split between the segments.

    The split starts from an even division but respects each segment's
    feasible minimum (the geometric lower segment cannot reach t0 in fewer
    than ceil(log(2 t0) / log(0.5)) steps; the upper segment's largest legal
    step is bounded too). Each segment's rate is then bisected independently.
    """
    _check_window(t0, t_end)

    def lower_count(h_a: float) -> int:
        return _geometric_tail_count(t0, h_a)

    def upper_count(h_b: float, cap: int) -> int:
        t = 0.5
        k = 0
        while t < t_end:
            t += h_b * (1.0 - t) ** 1.5
            k += 1
            if k > cap:
                return k
        return k

    lower_min = lower_count(0.5 - 1e-12)
    upper_min = upper_count(1.0 - 1e-12, n_steps + 1)
    if lower_min + upper_min > n_steps:
        raise ConfigurationError(
            f"asymmetric grid on ({t0}, {t_end}) needs at least "
            f"{lower_min + upper_min} steps ({lower_min} lower + {upper_min} upper), "
            f"got {n_steps}"
        )
    n_lower = max(n_steps // 2, lower_min)
    n_upper = n_steps - n_lower
    if n_upper < upper_min:
        n_upper = upper_min
        n_lower = n_steps - n_upper

    h_a = _bisect_rate(lower_count, n_lower, 1e-9, 0.5 - 1e-9, "asymmetric lower segment")
    h_b = _bisect_rate(
        lambda hb: upper_count(hb, n_upper + 1), n_upper, 1e-9, 1.0 - 1e-9,
        "asymmetric upper segment",
    )
    grid = asymmetric_grid(t0, t_end, h_a, h_b)
    assert grid.n_steps == n_steps
    return grid
