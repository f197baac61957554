from __future__ import annotations

import math

import numpy as np
import pytest

from ragdrive.errors import (
    DimensionMismatchError,
    EmptyStoreError,
    OmegaRangeError,
    ZeroVectorError,
)
from ragdrive.retrieval import RetrievalConfig, blended_similarity, cosine, top_k
from ragdrive.store import EmbeddingRecord, EmbeddingStore


def brute_force_ranking(query_fv, query_bev, store, omega):
    """Independent O(n) oracle: pure-Python cosines, then sort."""

    def cos(u, v):
        dot = sum(float(a) * float(b) for a, b in zip(u, v))
        nu = math.sqrt(sum(float(a) ** 2 for a in u))
        nv = math.sqrt(sum(float(b) ** 2 for b in v))
        return dot / (nu * nv)

    scored = []
    for record in store.scan():
        s_fv = cos(query_fv, record.v_fv)
        s_bev = cos(query_bev, record.v_bev)
        scored.append((record.scene_id, (1 - omega) * s_fv + omega * s_bev))
    scored.sort(key=lambda kv: (-kv[1], kv[0]))
    return [sid for sid, _ in scored]


def fill_store(rng, n, d_fv=8, d_bev=8) -> EmbeddingStore:
    store = EmbeddingStore()
    for i in range(n):
        store.put(
            EmbeddingRecord(
                scene_id=f"s{i:04d}",
                v_fv=rng.standard_normal(d_fv).astype(np.float32),
                v_bev=rng.standard_normal(d_bev).astype(np.float32),
            )
        )
    return store


def test_cosine_self_similarity(rng_seed):
    rng = np.random.default_rng(rng_seed)
    for _ in range(20):
        v = rng.standard_normal(int(rng.integers(1, 50)))
        if not np.any(v):
            continue
        assert cosine(v, v) == pytest.approx(1.0, abs=1e-12)


def test_cosine_orthogonal_and_diagonal():
    assert cosine(np.array([1.0, 0.0]), np.array([0.0, 1.0])) == 0.0
    assert cosine(np.array([1.0, 1.0]), np.array([1.0, 0.0])) == pytest.approx(
        1.0 / math.sqrt(2.0), abs=1e-6
    )


def test_cosine_errors():
    with pytest.raises(ZeroVectorError):
        cosine(np.zeros(3), np.ones(3))
    with pytest.raises(DimensionMismatchError):
        cosine(np.ones(3), np.ones(4))


def test_cosine_scale_invariance(rng_seed):
    rng = np.random.default_rng(rng_seed)
    for _ in range(50):
        u = rng.standard_normal(16)
        v = rng.standard_normal(16)
        c = float(rng.uniform(0.01, 100.0))
        assert cosine(c * u, v) == pytest.approx(cosine(u, v), abs=1e-12)


def test_blend_examples():
    assert blended_similarity(0.8, 0.6, 0.5) == pytest.approx(0.7, abs=1e-12)
    assert blended_similarity(0.31, -0.9, 0.0) == 0.31
    assert blended_similarity(-0.4, 0.77, 1.0) == 0.77
    with pytest.raises(OmegaRangeError):
        blended_similarity(0.5, 0.5, 1.5)


def test_self_retrieval_rank_one(rng_seed):
    rng = np.random.default_rng(rng_seed)
    store = fill_store(rng, 30)
    target = store.get("s0011")
    hits = top_k(target.v_fv, target.v_bev, store, RetrievalConfig(omega=0.5, k=3))
    assert hits[0].scene_id == "s0011"
    assert hits[0].rank == 1
    assert hits[0].sim_overall == pytest.approx(1.0, abs=1e-9)


def test_matches_brute_force_oracle(rng_seed):
    rng = np.random.default_rng(rng_seed + 1)
    for trial in range(25):
        n = int(rng.integers(2, 60))
        store = fill_store(rng, n, d_fv=int(rng.integers(2, 16)),
                           d_bev=int(rng.integers(2, 16)))
        q_fv = rng.standard_normal(store.d_fv)
        q_bev = rng.standard_normal(store.d_bev)
        for omega in (0.0, 0.25, 0.5, 0.75, 1.0):
            hits = top_k(q_fv, q_bev, store, RetrievalConfig(omega=omega, k=n))
            assert [h.scene_id for h in hits] == brute_force_ranking(
                q_fv, q_bev, store, omega
            ), f"trial {trial} omega {omega}"


def test_hit_fields_satisfy_blend(rng_seed):
    rng = np.random.default_rng(rng_seed + 2)
    store = fill_store(rng, 10)
    hits = top_k(rng.standard_normal(8), rng.standard_normal(8), store,
                 RetrievalConfig(omega=0.25, k=10))
    for hit in hits:
        assert hit.sim_overall == pytest.approx(
            blended_similarity(hit.sim_fv, hit.sim_bev, 0.25), abs=1e-12
        )
    assert [h.rank for h in hits] == list(range(1, 11))
    sims = [h.sim_overall for h in hits]
    assert sims == sorted(sims, reverse=True)


def _unit2(angle: float) -> np.ndarray:
    return np.array([math.cos(angle), math.sin(angle)], dtype=np.float32)


def test_omega_crossover_hand_computed():
    # record A: sim_fv 0.9, sim_bev 0.2; record B: sim_fv 0.5, sim_bev 0.8.
    # (1-w)*0.9 + w*0.2 = (1-w)*0.5 + w*0.8  =>  0.4*(1-w) = 0.6*w  =>  w = 0.4
    store = EmbeddingStore()
    store.put(EmbeddingRecord("A", _unit2(math.acos(0.9)), _unit2(math.acos(0.2))))
    store.put(EmbeddingRecord("B", _unit2(math.acos(0.5)), _unit2(math.acos(0.8))))
    q = np.array([1.0, 0.0])

    def first(omega):
        return top_k(q, q, store, RetrievalConfig(omega=omega, k=1))[0].scene_id

    assert first(0.0) == "A"
    assert first(0.3) == "A"
    assert first(0.5) == "B"
    assert first(1.0) == "B"


def test_exact_tie_breaks_by_ascending_scene_id():
    store = EmbeddingStore()
    v = np.array([0.5, 0.25], dtype=np.float32)
    for sid in ("zzz", "aaa", "mmm"):
        store.put(EmbeddingRecord(sid, v, v))
    hits = top_k(v, v, store, RetrievalConfig(omega=0.5, k=3))
    assert [h.scene_id for h in hits] == ["aaa", "mmm", "zzz"]


def test_rank_monotone_in_similarity():
    # moving a record's vectors closer to the query never lowers its rank
    store = EmbeddingStore()
    angles = [0.9, 0.5, 1.2, 0.2]
    for i, a in enumerate(angles):
        store.put(EmbeddingRecord(f"r{i}", _unit2(a), _unit2(a)))
    q = np.array([1.0, 0.0])

    def rank_of(store, rid):
        hits = top_k(q, q, store, RetrievalConfig(omega=0.5, k=4))
        return next(h.rank for h in hits if h.scene_id == rid)

    base_rank = rank_of(store, "r2")
    improved = EmbeddingStore()
    for i, a in enumerate(angles):
        a2 = 0.6 if i == 2 else a  # r2 gets closer to the query
        improved.put(EmbeddingRecord(f"r{i}", _unit2(a2), _unit2(a2)))
    assert rank_of(improved, "r2") <= base_rank


def test_per_record_rescaling_does_not_change_ranking(rng_seed):
    rng = np.random.default_rng(rng_seed + 3)
    store = fill_store(rng, 25)
    q_fv, q_bev = rng.standard_normal(8), rng.standard_normal(8)
    base = [h.scene_id for h in top_k(q_fv, q_bev, store, RetrievalConfig(k=25))]

    scaled = EmbeddingStore()
    for record in store.scan():
        c1 = float(rng.uniform(0.05, 20.0))
        c2 = float(rng.uniform(0.05, 20.0))
        scaled.put(
            EmbeddingRecord(record.scene_id, record.v_fv * c1, record.v_bev * c2)
        )
    rescored = [h.scene_id for h in top_k(q_fv, q_bev, scaled, RetrievalConfig(k=25))]
    assert rescored == base


def test_retrieval_errors(rng_seed):
    rng = np.random.default_rng(rng_seed)
    with pytest.raises(EmptyStoreError):
        top_k(np.ones(4), np.ones(4), EmbeddingStore(d_fv=4, d_bev=4))
    store = fill_store(rng, 3)
    with pytest.raises(DimensionMismatchError):
        top_k(np.ones(5), np.ones(8), store)
    with pytest.raises(ZeroVectorError):
        top_k(np.zeros(8), np.ones(8), store)
    with pytest.raises(OmegaRangeError):
        RetrievalConfig(omega=-0.1)
