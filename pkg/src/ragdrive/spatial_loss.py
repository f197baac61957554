"""Composite spatial-perception training objective as a pure function.

Per-sample terms: cross-entropy over object classes, mean squared error
over the three size dimensions, and squared error on object distance, each
gated by a 0/1 task-presence flag. All three penalties contribute
positively and the batch loss is their sample mean.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import EmptyBatchError, InvalidProbabilityError

_PROB_TOL = 1e-6
_LOG_CLAMP = 1e-12


@dataclass(frozen=True)
class SpatialSample:
    lambda1: int  # class-recognition term present
    lambda2: int  # size-estimation term present
    lambda3: int  # distance-estimation term present
    y: tuple[float, ...]        # one-hot class label
    p: tuple[float, ...]        # predicted class distribution
    z: tuple[float, float, float]       # predicted size, meters
    z_star: tuple[float, float, float]  # ground-truth size, meters
    x: float        # predicted distance, meters
    x_star: float   # ground-truth distance, meters

    def __post_init__(self):
        for name in ("lambda1", "lambda2", "lambda3"):
            if getattr(self, name) not in (0, 1):
                raise InvalidProbabilityError(f"{name} must be 0 or 1")
        if len(self.y) != len(self.p):
            raise InvalidProbabilityError("y and p must have equal length")
        ones = [v for v in self.y if v == 1.0]
        if len(ones) != 1 or any(v not in (0.0, 1.0) for v in self.y):
            raise InvalidProbabilityError("y must be one-hot")
        if len(self.z) != 3 or len(self.z_star) != 3:
            raise InvalidProbabilityError("z and z_star must have 3 components")
        p = np.asarray(self.p, dtype=np.float64)
        if np.any(p < 0) or abs(float(p.sum()) - 1.0) > _PROB_TOL:
            raise InvalidProbabilityError(
                f"p must be a distribution (sum={float(p.sum())!r})"
            )


def sample_loss(s: SpatialSample) -> float:
    """Loss contribution of one sample (before batch averaging)."""
    total = 0.0
    if s.lambda1:
        p = np.clip(np.asarray(s.p, dtype=np.float64), _LOG_CLAMP, None)
        y = np.asarray(s.y, dtype=np.float64)
        total += float(-(y * np.log(p)).sum())
    if s.lambda2:
        z = np.asarray(s.z, dtype=np.float64)
        zs = np.asarray(s.z_star, dtype=np.float64)
        total += float(((z - zs) ** 2).mean())
    if s.lambda3:
        total += (s.x - s.x_star) ** 2
    return total


def batch_loss(samples: Sequence[SpatialSample]) -> float:
    """Mean per-sample loss over a non-empty batch."""
    if not samples:
        raise EmptyBatchError("batch is empty")
    return sum(sample_loss(s) for s in samples) / len(samples)


def sample_from_dict(data: dict) -> SpatialSample:
    return SpatialSample(
        lambda1=int(data["lambda1"]),
        lambda2=int(data["lambda2"]),
        lambda3=int(data["lambda3"]),
        y=tuple(float(v) for v in data["y"]),
        p=tuple(float(v) for v in data["p"]),
        z=tuple(float(v) for v in data["z"]),
        z_star=tuple(float(v) for v in data["z_star"]),
        x=float(data["x"]),
        x_star=float(data["x_star"]),
    )


def load_samples(path: str | Path) -> list[SpatialSample]:
    """Read samples from JSON Lines, one sample object per line."""
    out: list[SpatialSample] = []
    for raw in Path(path).read_text(encoding="utf-8").splitlines():
        line = raw.strip()
        if line:
            out.append(sample_from_dict(json.loads(line)))
    return out
