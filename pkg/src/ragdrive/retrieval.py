"""Exact nearest-scene search over the embedding store.

Per-record cosine similarity is computed separately for the front-view and
BEV sub-vectors (recovered by length decomposition) and blended by
similarity = (1 - omega) * sim_fv + omega * sim_bev. The scan is exact:
every record is scored, no approximate index.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatchError,
    EmptyStoreError,
    OmegaRangeError,
    ZeroVectorError,
)
from .store import EmbeddingStore


@dataclass(frozen=True)
class RetrievalConfig:
    omega: float = 0.5  # 0 = front view only, 1 = BEV only
    k: int = 1

    def __post_init__(self):
        if not 0.0 <= self.omega <= 1.0:
            raise OmegaRangeError(f"omega {self.omega} outside [0, 1]")
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")


@dataclass(frozen=True)
class RetrievalHit:
    scene_id: str
    sim_fv: float
    sim_bev: float
    sim_overall: float
    rank: int  # 1-based


def cosine(v1: np.ndarray, v2: np.ndarray) -> float:
    """Cosine similarity of two nonzero vectors, clamped to [-1, 1]."""
    v1 = np.asarray(v1, dtype=np.float64)
    v2 = np.asarray(v2, dtype=np.float64)
    if v1.shape != v2.shape or v1.ndim != 1:
        raise DimensionMismatchError(f"shapes {v1.shape} and {v2.shape} differ")
    n1 = float(np.linalg.norm(v1))
    n2 = float(np.linalg.norm(v2))
    if n1 == 0.0 or n2 == 0.0:
        raise ZeroVectorError("cosine undefined for zero vector")
    return float(np.clip(float(v1 @ v2) / (n1 * n2), -1.0, 1.0))


def blended_similarity(sim_fv: float, sim_bev: float, omega: float) -> float:
    """Affine blend of the two view similarities."""
    if not 0.0 <= omega <= 1.0:
        raise OmegaRangeError(f"omega {omega} outside [0, 1]")
    return (1.0 - omega) * sim_fv + omega * sim_bev


def top_k(
    query_fv: np.ndarray,
    query_bev: np.ndarray,
    store: EmbeddingStore,
    cfg: RetrievalConfig | None = None,
) -> list[RetrievalHit]:
    """Exact scan returning the k best hits, ties broken by ascending scene_id."""
    cfg = cfg or RetrievalConfig()
    if len(store) == 0:
        raise EmptyStoreError("cannot retrieve from an empty store")
    q_fv = np.asarray(query_fv, dtype=np.float64)
    q_bev = np.asarray(query_bev, dtype=np.float64)
    if q_fv.shape != (store.d_fv,) or q_bev.shape != (store.d_bev,):
        raise DimensionMismatchError(
            f"query dims ({q_fv.shape}, {q_bev.shape}) != "
            f"store dims (({store.d_fv},), ({store.d_bev},))"
        )
    qn_fv = float(np.linalg.norm(q_fv))
    qn_bev = float(np.linalg.norm(q_bev))
    if qn_fv == 0.0 or qn_bev == 0.0:
        raise ZeroVectorError("query sub-vector has zero norm")

    # Store invariants forbid all-zero sub-vectors, so norms are positive.
    views = store.views()
    sims_fv = np.clip((views.m_fv @ q_fv) / (views.norms_fv * qn_fv), -1.0, 1.0)
    sims_bev = np.clip((views.m_bev @ q_bev) / (views.norms_bev * qn_bev), -1.0, 1.0)
    overall = (1.0 - cfg.omega) * sims_fv + cfg.omega * sims_bev

    ids = views.ids
    n = len(ids)
    k = min(cfg.k, n)
    if k < n:
        # narrow to every record tied with or above the k-th best score
        part = np.argpartition(-overall, k - 1)[:k]
        threshold = overall[part].min()
        candidates = np.nonzero(overall >= threshold)[0].tolist()
    else:
        candidates = range(n)
    order = sorted(candidates, key=lambda i: (-overall[i], ids[i]))
    return [
        RetrievalHit(
            scene_id=ids[i],
            sim_fv=float(sims_fv[i]),
            sim_bev=float(sims_bev[i]),
            sim_overall=float(overall[i]),
            rank=rank,
        )
        for rank, i in enumerate(order[:k], start=1)
    ]
