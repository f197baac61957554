"""FastAPI application implementing the engine wire protocol.

POST /v1/embed   {"image": <base64>, "kind": "front_view"|"bev"}
              -> {"vector": [float..], "dim": int}
POST /v1/chat    {"system": str, "messages": [part..],
                  "temperature": float, "max_tokens": int}
              -> {"text": str}
GET  /healthz  -> {"status": "ok", "embed_model": .., "chat_model": ..,
                   "embed_dim": int}

Schema violations return 400, oversized images 413, a backend still
loading 503, anything else 500 with an error body. A chat request whose
system text equals the reserved diagnostic string is answered with the
ordered sha256 hex digests of its image parts, one per line, before any
model is consulted; this lets clients verify part ordering end to end.
"""

from __future__ import annotations

import base64
import binascii
import hashlib
import threading
from typing import Literal

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .backends import BackendNotReady, make_chat_backend, make_embed_backend
from .config import AdapterConfig

ECHO_IMAGE_ORDER_SYSTEM = "__diagnostic_echo_image_digests__"


class EmbedRequest(BaseModel):
    image: str
    kind: Literal["front_view", "bev"]


class TextPart(BaseModel):
    type: Literal["text"]
    text: str


class ImagePart(BaseModel):
    type: Literal["image"]
    image: str


class ChatRequestBody(BaseModel):
    system: str = ""
    messages: list[TextPart | ImagePart] = Field(min_length=1)
    temperature: float = Field(default=0.0, ge=0.0)
    max_tokens: int = Field(default=256, ge=1)


def _error(status: int, message: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"error": message})


def create_app(cfg: AdapterConfig | None = None) -> FastAPI:
    cfg = cfg or AdapterConfig.from_env()
    embed_backend = make_embed_backend(cfg.embed_model, cfg.device, cfg.embed_dim)
    chat_backend = make_chat_backend(cfg.chat_model, cfg.device)
    gate = threading.Semaphore(cfg.workers)
    # dim advertised must not move for the process lifetime
    dim_seen: dict[str, int] = {}
    dim_lock = threading.Lock()

    app = FastAPI(title="ragdrive model adapter", version="0.1.0")

    @app.exception_handler(RequestValidationError)
    async def validation_handler(request: Request, exc: RequestValidationError):
        return _error(400, f"schema violation: {exc.errors()[:3]}")

    @app.get("/healthz")
    def healthz():
        return {
            "status": "ok",
            "embed_model": cfg.embed_model,
            "chat_model": cfg.chat_model,
            "embed_dim": embed_backend.dim,
        }

    @app.post("/v1/embed")
    def embed(body: EmbedRequest):
        try:
            image = base64.b64decode(body.image, validate=True)
        except (binascii.Error, ValueError):
            return _error(400, "image is not valid base64")
        if not image:
            return _error(400, "image is empty")
        if len(image) > cfg.max_image_bytes:
            return _error(413, "image exceeds max size")
        try:
            with gate:
                vector = embed_backend.embed(image, body.kind)
        except BackendNotReady as exc:
            return _error(503, str(exc))
        except Exception as exc:  # noqa: BLE001 - boundary
            return _error(500, f"{type(exc).__name__}: {exc}")
        dim = int(vector.shape[0])
        with dim_lock:
            prior = dim_seen.setdefault("dim", dim)
        if prior != dim:
            return _error(500, f"embed dim drifted {prior} -> {dim}")
        return {"vector": [float(v) for v in vector], "dim": dim}

    @app.post("/v1/chat")
    def chat(body: ChatRequestBody):
        images: list[bytes] = []
        parts: list[dict] = []
        for part in body.messages:
            if isinstance(part, ImagePart):
                try:
                    raw = base64.b64decode(part.image, validate=True)
                except (binascii.Error, ValueError):
                    return _error(400, "image part is not valid base64")
                if len(raw) > cfg.max_image_bytes:
                    return _error(413, "image exceeds max size")
                images.append(raw)
                parts.append({"type": "image", "image": raw})
            else:
                parts.append({"type": "text", "text": part.text})
        if body.system == ECHO_IMAGE_ORDER_SYSTEM:
            return {"text": "\n".join(
                hashlib.sha256(img).hexdigest() for img in images
            )}
        try:
            with gate:
                text = chat_backend.generate(
                    body.system, parts, body.temperature, body.max_tokens
                )
        except BackendNotReady as exc:
            return _error(503, str(exc))
        except Exception as exc:  # noqa: BLE001 - boundary
            return _error(500, f"{type(exc).__name__}: {exc}")
        return {"text": text}

    return app
