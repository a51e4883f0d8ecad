"""Sample batches and their on-disk format.

A batch is an (n, d) float64 array plus provenance metadata. Batches are
written as a CSV of samples (header row ``x0,...,x{d-1}``, one sample per
row, full float precision) with the metadata in a JSON sidecar next to it.
"""

from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .errors import ShapeError


@dataclass
class BatchMeta:
    """Provenance for a batch: where the samples came from."""

    seed: int | None = None
    t: float | None = None
    grid_label: str | None = None
    drift_id: str | None = None
    extra: dict = field(default_factory=dict)


@dataclass
class SampleBatch:
    data: np.ndarray
    meta: BatchMeta = field(default_factory=BatchMeta)

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=np.float64)
        if arr.ndim != 2:
            raise ShapeError(f"batch data must be 2-D (n, d), got shape {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ShapeError(f"batch must be non-empty, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ShapeError("batch data contains non-finite entries")
        self.data = arr

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def dimension(self) -> int:
        return self.data.shape[1]


def _sidecar_path(csv_path: Path) -> Path:
    return csv_path.with_suffix(csv_path.suffix + ".meta.json")


def save_batch(batch: SampleBatch, path: str | Path) -> Path:
    """Write samples as CSV plus a JSON metadata sidecar; returns the CSV path."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    d = batch.dimension
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"x{j}" for j in range(d)])
        for row in batch.data:
            writer.writerow([repr(float(v)) for v in row])
    with open(_sidecar_path(path), "w") as fh:
        json.dump(asdict(batch.meta), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def load_batch(path: str | Path) -> SampleBatch:
    """Read a batch written by :func:`save_batch` (sidecar optional)."""
    path = Path(path)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [[float(v) for v in row] for row in reader if row]
    data = np.asarray(rows, dtype=np.float64)
    if data.ndim != 2 or data.shape[1] != len(header):
        raise ShapeError(f"CSV at {path} does not parse as a sample batch")
    meta = BatchMeta()
    sidecar = _sidecar_path(path)
    if sidecar.exists():
        with open(sidecar) as fh:
            raw = json.load(fh)
        meta = BatchMeta(
            seed=raw.get("seed"),
            t=raw.get("t"),
            grid_label=raw.get("grid_label"),
            drift_id=raw.get("drift_id"),
            extra=raw.get("extra", {}),
        )
    return SampleBatch(data=data, meta=meta)
