"""Minimal dense ReLU network with manual backprop, plus Adam.

Everything is float64 numpy. No autodiff: the backward pass is written out
layer by layer, which keeps the whole training stack dependency-free and
easy to check against finite differences.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigurationError, ShapeError
from .rng import rng_stream


class Mlp:
    """Fully connected net: in_dim -> hidden[0] -> ... -> out_dim, ReLU inside."""

    def __init__(self, in_dim: int, hidden: tuple[int, ...], out_dim: int, seed: int = 0):
        if in_dim < 1 or out_dim < 1 or any(h < 1 for h in hidden):
            raise ConfigurationError(
                f"layer sizes must be positive, got {in_dim}, {tuple(hidden)}, {out_dim}"
            )
        self.in_dim = int(in_dim)
        self.hidden = tuple(int(h) for h in hidden)
        self.out_dim = int(out_dim)
        self.seed = int(seed)
        sizes = [self.in_dim, *self.hidden, self.out_dim]
        rng = rng_stream(seed, "mlp-init")
        self.weights: list[np.ndarray] = []
        self.biases: list[np.ndarray] = []
        for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
            # He scaling for the ReLU layers.
            scale = np.sqrt(2.0 / fan_in)
            self.weights.append(scale * rng.standard_normal((fan_in, fan_out)))
            self.biases.append(np.zeros(fan_out))

    @property
    def layer_sizes(self) -> list[int]:
        return [self.in_dim, *self.hidden, self.out_dim]

    def forward(self, x: np.ndarray, want_cache: bool = False):
        x = np.asarray(x, dtype=np.float64)
        if x.ndim != 2 or x.shape[1] != self.in_dim:
            raise ShapeError(f"input must be (n, {self.in_dim}), got {x.shape}")
        activations = [x]
        a = x
        last = len(self.weights) - 1
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            z = a @ w + b
            a = z if i == last else np.maximum(z, 0.0)
            activations.append(a)
        if want_cache:
            return a, activations
        return a

    def backward(self, activations: list[np.ndarray], grad_out: np.ndarray):
        """Gradients of a scalar loss given d loss / d output.

        activations is the list returned by forward(want_cache=True);
        returns (weight_grads, bias_grads) aligned with self.weights/biases.
        """
        grad_w = [np.empty_like(w) for w in self.weights]
        grad_b = [np.empty_like(b) for b in self.biases]
        delta = np.asarray(grad_out, dtype=np.float64)
        for i in range(len(self.weights) - 1, -1, -1):
            a_prev = activations[i]
            grad_w[i] = a_prev.T @ delta
            grad_b[i] = delta.sum(axis=0)
            if i > 0:
                delta = delta @ self.weights[i].T
                # ReLU mask: activations[i] is post-ReLU for hidden layers.
                delta = delta * (activations[i] > 0.0)
        return grad_w, grad_b

    def get_flat_params(self) -> np.ndarray:
        parts = []
        for w, b in zip(self.weights, self.biases):
            parts.append(w.ravel())
            parts.append(b.ravel())
        return np.concatenate(parts)

    def set_flat_params(self, flat: np.ndarray):
        flat = np.asarray(flat, dtype=np.float64).ravel()
        expected = sum(w.size + b.size for w, b in zip(self.weights, self.biases))
        if flat.size != expected:
            raise ShapeError(f"expected {expected} parameters, got {flat.size}")
        ofs = 0
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            self.weights[i] = flat[ofs : ofs + w.size].reshape(w.shape).copy()
            ofs += w.size
            self.biases[i] = flat[ofs : ofs + b.size].copy()
            ofs += b.size


class Adam:
    """Standard Adam with bias-corrected moments."""

    def __init__(self, lr: float = 1e-3, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        if not (lr > 0):
            raise ConfigurationError(f"learning rate must be positive, got {lr}")
        if not (0.0 <= beta1 < 1.0 and 0.0 <= beta2 < 1.0):
            raise ConfigurationError(f"betas must lie in [0, 1), got {beta1}, {beta2}")
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self._m: list[np.ndarray] | None = None
        self._v: list[np.ndarray] | None = None

    def step(self, params: list[np.ndarray], grads: list[np.ndarray]):
        """Update params in place from their gradients."""
        if self._m is None:
            self._m = [np.zeros_like(p) for p in params]
            self._v = [np.zeros_like(p) for p in params]
        if len(params) != len(self._m):
            raise ShapeError("parameter list changed length between Adam steps")
        self.t += 1
        bc1 = 1.0 - self.beta1**self.t
        bc2 = 1.0 - self.beta2**self.t
        for p, g, m, v in zip(params, grads, self._m, self._v):
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            p -= self.lr * (m / bc1) / (np.sqrt(v / bc2) + self.eps)


def adam_step(optimizer: Adam, net: Mlp, grad_w: list[np.ndarray], grad_b: list[np.ndarray]):
    """One in-place optimizer step over the net's full parameter list."""
    params = [*net.weights, *net.biases]
    grads = [*grad_w, *grad_b]
    optimizer.step(params, grads)


@dataclass(frozen=True)
class CheckpointPaths:
    manifest: Path
    params: Path


def checkpoint_paths(prefix: str | Path) -> CheckpointPaths:
    prefix = Path(prefix)
    return CheckpointPaths(
        manifest=prefix.with_suffix(".json"), params=prefix.with_suffix(".bin")
    )


def save_checkpoint(net: Mlp, prefix: str | Path, extra: dict | None = None) -> CheckpointPaths:
    """Write a JSON manifest plus flat little-endian float64 parameters."""
    paths = checkpoint_paths(prefix)
    paths.manifest.parent.mkdir(parents=True, exist_ok=True)
    flat = net.get_flat_params()
    manifest = {
        "layer_sizes": net.layer_sizes,
        "seed": net.seed,
        "param_count": int(flat.size),
        "dtype": "float64",
        "byte_order": "little",
        "param_order": "W0,b0,W1,b1,...",
        "params_file": paths.params.name,
    }
    if extra:
        manifest["extra"] = extra
    with open(paths.manifest, "w") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")
    flat.astype("<f8").tofile(paths.params)
    return paths


def load_checkpoint(prefix: str | Path) -> tuple[Mlp, dict]:
    """Rebuild the net saved by save_checkpoint; returns (net, manifest)."""
    paths = checkpoint_paths(prefix)
    if not paths.manifest.exists():
        raise ConfigurationError(f"checkpoint manifest not found: {paths.manifest}")
    with open(paths.manifest) as fh:
        manifest = json.load(fh)
    sizes = manifest.get("layer_sizes")
    if not sizes or len(sizes) < 2:
        raise ConfigurationError(f"manifest {paths.manifest} has no usable layer_sizes")
    params_file = paths.manifest.parent / manifest.get("params_file", paths.params.name)
    if not params_file.exists():
        raise ConfigurationError(f"checkpoint parameter file not found: {params_file}")
    flat = np.fromfile(params_file, dtype="<f8")
    if flat.size != manifest.get("param_count"):
        raise ConfigurationError(
            f"parameter file {params_file} holds {flat.size} values, "
            f"manifest promises {manifest.get('param_count')}"
        )
    net = Mlp(sizes[0], tuple(sizes[1:-1]), sizes[-1], seed=int(manifest.get("seed", 0)))
    net.set_flat_params(flat)
    return net, manifest
