"""Adapter configuration from environment variables and CLI flags."""

from __future__ import annotations

import os
from dataclasses import dataclass

ENV_PREFIX = "RAGDRIVE_ADAPTER_"


@dataclass(frozen=True)
class AdapterConfig:
    embed_model: str = "hash-v1"   # or a sentence-transformers model id
    chat_model: str = "echo-v1"    # or a transformers image-text model id
    device: str = "cpu"
    embed_dim: int = 256           # hash backend only; real models advertise theirs
    max_image_bytes: int = 8 * 1024 * 1024
    workers: int = 4               # request-level parallelism bound

    @classmethod
    def from_env(cls) -> "AdapterConfig":
        def get(name: str, default):
            raw = os.environ.get(ENV_PREFIX + name)
            if raw is None:
                return default
            return type(default)(raw)

        return cls(
            embed_model=get("EMBED_MODEL", cls.embed_model),
            chat_model=get("CHAT_MODEL", cls.chat_model),
            device=get("DEVICE", cls.device),
            embed_dim=get("EMBED_DIM", cls.embed_dim),
            max_image_bytes=get("MAX_IMAGE_BYTES", cls.max_image_bytes),
            workers=get("WORKERS", cls.workers),
        )
