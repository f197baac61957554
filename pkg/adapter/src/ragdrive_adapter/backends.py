"""Embedding and chat backends.

Two families: deterministic weight-free backends (hash-v1 embeddings,
echo-v1 chat) used for contract tests and offline development, and lazy
transformer-based backends for operator-supplied checkpoints. Every
backend reports a fixed embedding dimension for the process lifetime.
"""

from __future__ import annotations

import hashlib
import io
import threading

import numpy as np


class BackendNotReady(Exception):
    """Model still loading; callers should retry (HTTP 503)."""


class EmbedBackend:
    dim: int

    def embed(self, image: bytes, kind: str) -> np.ndarray:
        raise NotImplementedError


class ChatBackend:
    def generate(self, system: str, parts: list[dict], temperature: float,
                 max_tokens: int) -> str:
        raise NotImplementedError


class HashEmbedBackend(EmbedBackend):
    """Unit vector derived from a digest of the image bytes and kind.

    No weights, fully deterministic, equal inputs give equal vectors.
    """

    def __init__(self, dim: int = 256):
        self.dim = dim

    def embed(self, image: bytes, kind: str) -> np.ndarray:
        digest = hashlib.sha256(kind.encode("utf-8") + b"\x1f" + image).digest()
        rng = np.random.default_rng(int.from_bytes(digest[:16], "big"))
        v = rng.standard_normal(self.dim)
        return (v / np.linalg.norm(v)).astype(np.float32)


class EchoChatBackend(ChatBackend):
    """Deterministic reply summarizing the request; no model involved."""

    def generate(self, system, parts, temperature, max_tokens):
        texts = [p["text"] for p in parts if p.get("type") == "text"]
        n_images = sum(1 for p in parts if p.get("type") == "image")
        joined = " ".join(texts)
        return (
            f"echo: {n_images} image(s), {len(texts)} text part(s); "
            f"first words: {joined[:120]}"
        )


class SentenceTransformerEmbedBackend(EmbedBackend):
    """Image embeddings via a sentence-transformers checkpoint (e.g. CLIP)."""

    def __init__(self, model_id: str, device: str = "cpu"):
        self.model_id = model_id
        self.device = device
        self._model = None
        self._lock = threading.Lock()
        self.dim = -1  # discovered on first load

    def _load(self):
        if self._model is None:
            with self._lock:
                if self._model is None:
                    try:
                        from sentence_transformers import SentenceTransformer
                    except ImportError as exc:
                        raise BackendNotReady(
                            "sentence-transformers not installed"
                        ) from exc
                    self._model = SentenceTransformer(self.model_id,
                                                      device=self.device)
                    self.dim = int(
                        self._model.get_sentence_embedding_dimension() or -1
                    )
        return self._model

    def embed(self, image: bytes, kind: str) -> np.ndarray:
        from PIL import Image

        model = self._load()
        pil = Image.open(io.BytesIO(image)).convert("RGB")
        vec = np.asarray(model.encode([pil])[0], dtype=np.float32)
        if self.dim <= 0:
            self.dim = int(vec.shape[0])
        return vec


class TransformersChatBackend(ChatBackend):
    """Image-text generation via a transformers checkpoint."""

    def __init__(self, model_id: str, device: str = "cpu"):
        self.model_id = model_id
        self.device = device
        self._pipe = None
        self._lock = threading.Lock()

    def _load(self):
        if self._pipe is None:
            with self._lock:
                if self._pipe is None:
                    try:
                        from transformers import pipeline
                    except ImportError as exc:
                        raise BackendNotReady("transformers not installed") from exc
                    self._pipe = pipeline(
                        "image-text-to-text", model=self.model_id,
                        device=self.device,
                    )
        return self._pipe

    def generate(self, system, parts, temperature, max_tokens):
        import base64

        pipe = self._load()
        content = []
        for part in parts:
            if part.get("type") == "text":
                content.append({"type": "text", "text": part["text"]})
            else:
                content.append({
                    "type": "image",
                    "base64": part["image"] if isinstance(part["image"], str)
                    else base64.b64encode(part["image"]).decode("ascii"),
                })
        messages = [
            {"role": "system", "content": [{"type": "text", "text": system}]},
            {"role": "user", "content": content},
        ]
        out = pipe(
            text=messages,
            max_new_tokens=max_tokens,
            do_sample=temperature > 0,
            temperature=temperature if temperature > 0 else None,
        )
        return out[0]["generated_text"][-1]["content"]


def make_embed_backend(model_id: str, device: str, dim: int) -> EmbedBackend:
    if model_id == "hash-v1":
        return HashEmbedBackend(dim=dim)
    return SentenceTransformerEmbedBackend(model_id, device=device)


def make_chat_backend(model_id: str, device: str) -> ChatBackend:
    if model_id == "echo-v1":
        return EchoChatBackend()
    return TransformersChatBackend(model_id, device=device)
