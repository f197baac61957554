"""Persistent store of concatenated front-view / BEV embedding vectors.

File format (`*.radstore`, little-endian throughout):

    magic      8 bytes  b"RADSTOR\\x01"
    version    u32
    endian     u16      0xFEFF marker
    d_fv       u32
    d_bev      u32
    count      u64
    records    count * ( id_len u16, id utf-8, v_cat float32[d_fv+d_bev] )
    checksum   32 bytes sha256 over everything before it

Vectors are held as float32; persist/open round-trips are bit-exact over
those float32 values. Scan order is insertion order.
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator

import numpy as np

from .errors import (
    CorruptStoreError,
    DimensionMismatchError,
    DuplicateIdError,
    RecordNotFoundError,
    VersionMismatchError,
)

MAGIC = b"RADSTOR\x01"
FORMAT_VERSION = 1
_ENDIAN_MARK = 0xFEFF
_HEADER = struct.Struct("<8sIHIIQ")


def concat(v_fv: np.ndarray, v_bev: np.ndarray) -> np.ndarray:
    """Juxtapose the two view vectors: result = v_fv then v_bev."""
    v_fv = np.asarray(v_fv, dtype=np.float32)
    v_bev = np.asarray(v_bev, dtype=np.float32)
    if v_fv.ndim != 1 or v_bev.ndim != 1:
        raise DimensionMismatchError("concat expects 1-D vectors")
    return np.concatenate([v_fv, v_bev])


def decompose(v_cat: np.ndarray, d_fv: int, d_bev: int) -> tuple[np.ndarray, np.ndarray]:
    """Invert concat by length: first d_fv components, then d_bev."""
    v_cat = np.asarray(v_cat, dtype=np.float32)
    if v_cat.ndim != 1 or v_cat.shape[0] != d_fv + d_bev:
        raise DimensionMismatchError(
            f"expected length {d_fv + d_bev}, got {v_cat.shape}"
        )
    return v_cat[:d_fv].copy(), v_cat[d_fv:].copy()


def _validate_vector(name: str, v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=np.float32)
    if v.ndim != 1 or v.size == 0:
        raise DimensionMismatchError(f"{name} must be a non-empty 1-D vector")
    if not np.all(np.isfinite(v)):
        raise DimensionMismatchError(f"{name} contains non-finite components")
    if not np.any(v):
        raise DimensionMismatchError(f"{name} is all-zero")
    return v


@dataclass(frozen=True)
class StoreViews:
    """Cached scan-ready matrices: one row per record, insertion order."""

    ids: list[str]
    m_fv: np.ndarray      # float64, count x d_fv
    m_bev: np.ndarray     # float64, count x d_bev
    norms_fv: np.ndarray  # float64, count
    norms_bev: np.ndarray


@dataclass(frozen=True)
class EmbeddingRecord:
    scene_id: str
    v_fv: np.ndarray
    v_bev: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "v_fv", _validate_vector("v_fv", self.v_fv))
        object.__setattr__(self, "v_bev", _validate_vector("v_bev", self.v_bev))

    @property
    def v_cat(self) -> np.ndarray:
        return concat(self.v_fv, self.v_bev)


class EmbeddingStore:
    """Indexed, persistable collection of EmbeddingRecords.

    Single writer during ingestion; once opened (or no longer mutated) the
    store serves unrestricted concurrent reads. Dimensions are fixed by the
    first insert.
    """

    def __init__(self, d_fv: int | None = None, d_bev: int | None = None):
        self.d_fv = d_fv
        self.d_bev = d_bev
        self._by_id: dict[str, np.ndarray] = {}  # scene_id -> v_cat (float32)
        self._matrix_cache: np.ndarray | None = None
        self._views_cache: StoreViews | None = None

    def __len__(self) -> int:
        return len(self._by_id)

    @property
    def count(self) -> int:
        return len(self._by_id)

    def put(self, record: EmbeddingRecord) -> None:
        if self.d_fv is None:
            self.d_fv = int(record.v_fv.shape[0])
            self.d_bev = int(record.v_bev.shape[0])
        elif (record.v_fv.shape[0] != self.d_fv
              or record.v_bev.shape[0] != self.d_bev):
            raise DimensionMismatchError(
                f"record dims ({record.v_fv.shape[0]}, {record.v_bev.shape[0]}) "
                f"!= store dims ({self.d_fv}, {self.d_bev})"
            )
        if record.scene_id in self._by_id:
            raise DuplicateIdError(f"scene_id {record.scene_id!r} already stored")
        self._by_id[record.scene_id] = record.v_cat
        self._matrix_cache = None
        self._views_cache = None

    def get(self, scene_id: str) -> EmbeddingRecord:
        v_cat = self._by_id.get(scene_id)
        if v_cat is None:
            raise RecordNotFoundError(f"no record for scene_id {scene_id!r}")
        v_fv, v_bev = decompose(v_cat, self.d_fv, self.d_bev)
        return EmbeddingRecord(scene_id=scene_id, v_fv=v_fv, v_bev=v_bev)

    def scan(self) -> Iterator[EmbeddingRecord]:
        for scene_id in self._by_id:
            yield self.get(scene_id)

    def ids(self) -> list[str]:
        return list(self._by_id)

    def matrix(self) -> tuple[list[str], np.ndarray]:
        """Contiguous (ids, [count x (d_fv+d_bev)] float32) view for scanning."""
        if self._matrix_cache is None:
            if not self._by_id:
                self._matrix_cache = np.empty((0, (self.d_fv or 0) + (self.d_bev or 0)),
                                              dtype=np.float32)
            else:
                self._matrix_cache = np.stack(list(self._by_id.values()))
        return list(self._by_id), self._matrix_cache

    def views(self) -> "StoreViews":
        """Per-view float64 matrices and norms, cached for repeated scans."""
        if self._views_cache is None:
            ids, mat = self.matrix()
            m_fv = np.ascontiguousarray(mat[:, : self.d_fv], dtype=np.float64)
            m_bev = np.ascontiguousarray(mat[:, self.d_fv :], dtype=np.float64)
            self._views_cache = StoreViews(
                ids=ids,
                m_fv=m_fv,
                m_bev=m_bev,
                norms_fv=np.linalg.norm(m_fv, axis=1),
                norms_bev=np.linalg.norm(m_bev, axis=1),
            )
        return self._views_cache

    # --- persistence ---------------------------------------------------------

    def persist(self, path: str | Path) -> None:
        if self.d_fv is None or self.d_bev is None:
            raise DimensionMismatchError("cannot persist a store with no records")
        chunks: list[bytes] = [
            _HEADER.pack(MAGIC, FORMAT_VERSION, _ENDIAN_MARK,
                         self.d_fv, self.d_bev, len(self._by_id))
        ]
        for scene_id, v_cat in self._by_id.items():
            sid = scene_id.encode("utf-8")
            if len(sid) > 0xFFFF:
                raise DimensionMismatchError(f"scene_id too long: {scene_id[:32]!r}...")
            chunks.append(struct.pack("<H", len(sid)))
            chunks.append(sid)
            chunks.append(v_cat.astype("<f4", copy=False).tobytes())
        payload = b"".join(chunks)
        digest = hashlib.sha256(payload).digest()
        Path(path).write_bytes(payload + digest)

    @classmethod
    def open(cls, path: str | Path) -> "EmbeddingStore":
        blob = Path(path).read_bytes()
        if len(blob) < _HEADER.size + 32:
            raise CorruptStoreError(f"{path}: file too short")
        payload, digest = blob[:-32], blob[-32:]
        if hashlib.sha256(payload).digest() != digest:
            raise CorruptStoreError(f"{path}: checksum mismatch")
        magic, version, endian, d_fv, d_bev, count = _HEADER.unpack_from(payload, 0)
        if magic != MAGIC:
            raise CorruptStoreError(f"{path}: bad magic {magic!r}")
        if version != FORMAT_VERSION:
            raise VersionMismatchError(f"{path}: format version {version}")
        if endian != _ENDIAN_MARK:
            raise CorruptStoreError(f"{path}: bad endianness marker {endian:#x}")
        store = cls(d_fv=d_fv, d_bev=d_bev)
        dim = d_fv + d_bev
        offset = _HEADER.size
        for _ in range(count):
            if offset + 2 > len(payload):
                raise CorruptStoreError(f"{path}: truncated record header")
            (id_len,) = struct.unpack_from("<H", payload, offset)
            offset += 2
            end = offset + id_len + dim * 4
            if end > len(payload):
                raise CorruptStoreError(f"{path}: truncated record body")
            scene_id = payload[offset : offset + id_len].decode("utf-8")
            offset += id_len
            v_cat = np.frombuffer(payload, dtype="<f4", count=dim, offset=offset).copy()
            offset += dim * 4
            if scene_id in store._by_id:
                raise CorruptStoreError(f"{path}: duplicate scene_id {scene_id!r}")
            store._by_id[scene_id] = v_cat
        if offset != len(payload):
            raise CorruptStoreError(f"{path}: trailing bytes after records")
        return store
