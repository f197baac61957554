"""Clients for the external embedding and vision-language services.

One wire protocol serves real adapters and the offline mocks:

    POST {base}/v1/embed   {"image": <base64>, "kind": "front_view"|"bev"}
                        -> {"vector": [..], "dim": <int>}
    POST {base}/v1/chat    {"system": str, "messages": [part..],
                            "temperature": float, "max_tokens": int}
                        -> {"text": str}

A message part is {"type": "text", "text": str} or
{"type": "image", "image": <base64>}; part order is preserved end to end.
HTTP clients retry transient transport failures up to three attempts with
exponential backoff. The mocks are fully deterministic: the mock embedder
derives a seeded unit vector from a hash of the image bytes, and the mock
chat client answers from a fingerprint script or a fixed policy.
"""

from __future__ import annotations

import base64
import hashlib
import json
import re
import threading
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np
import requests

from .errors import (
    BadResponseError,
    ContextTooLargeError,
    DimDriftError,
    TransportError,
)
from .taxonomy import parse_meta_action

EMBED_KINDS = ("front_view", "bev")
EMBED_PATH = "/v1/embed"
CHAT_PATH = "/v1/chat"

# Reserved diagnostic: a chat service receiving exactly this system text
# replies with the ordered sha256 hex digests of the image parts, one per
# line. Lets contract tests prove image ordering survives the transport.
ECHO_IMAGE_ORDER_SYSTEM = "__diagnostic_echo_image_digests__"

DEFAULT_TIMEOUT = 60.0
DEFAULT_MAX_ATTEMPTS = 3
DEFAULT_MAX_IN_FLIGHT = 8


@dataclass(frozen=True)
class MessagePart:
    """One ordered prompt part: text, or raw image bytes."""
    text: str | None = None
    image: bytes | None = None

    def __post_init__(self):
        if (self.text is None) == (self.image is None):
            raise ValueError("part must hold exactly one of text / image")

    def to_wire(self) -> dict:
        if self.text is not None:
            return {"type": "text", "text": self.text}
        return {"type": "image", "image": base64.b64encode(self.image).decode("ascii")}


@dataclass(frozen=True)
class ChatRequest:
    system: str
    messages: tuple[MessagePart, ...]
    temperature: float = 0.0
    max_tokens: int = 256

    def __post_init__(self):
        if not self.messages:
            raise ValueError("chat request needs at least one message part")
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")

    def to_wire(self) -> dict:
        return {
            "system": self.system,
            "messages": [p.to_wire() for p in self.messages],
            "temperature": self.temperature,
            "max_tokens": self.max_tokens,
        }

    def image_parts(self) -> list[bytes]:
        return [p.image for p in self.messages if p.image is not None]

    def text_parts(self) -> list[str]:
        return [p.text for p in self.messages if p.text is not None]


def call_with_retries(
    fn: Callable[[], object],
    max_attempts: int = DEFAULT_MAX_ATTEMPTS,
    base_delay: float = 0.5,
    sleep: Callable[[float], None] = time.sleep,
):
    """Run fn, retrying TransportError with exponential backoff."""
    last: TransportError | None = None
    for attempt in range(max_attempts):
        try:
            return fn()
        except TransportError as exc:
            last = exc
            if attempt + 1 < max_attempts:
                sleep(base_delay * (2.0**attempt))
    raise TransportError(f"failed after {max_attempts} attempts: {last}") from last


class _HttpBase:
    def __init__(
        self,
        base_url: str,
        timeout: float = DEFAULT_TIMEOUT,
        max_attempts: int = DEFAULT_MAX_ATTEMPTS,
        max_in_flight: int = DEFAULT_MAX_IN_FLIGHT,
        session: requests.Session | None = None,
        sleep: Callable[[float], None] = time.sleep,
        recorder: Callable[[bytes, bytes], None] | None = None,
    ):
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout
        self.max_attempts = max_attempts
        self._session = session or requests.Session()
        self._sleep = sleep
        self._gate = threading.Semaphore(max_in_flight)
        self._recorder = recorder

    def _post(self, path: str, payload: dict) -> dict:
        body = json.dumps(payload).encode("utf-8")

        def attempt() -> dict:
            with self._gate:
                try:
                    resp = self._session.post(
                        self.base_url + path,
                        data=body,
                        headers={"Content-Type": "application/json"},
                        timeout=self.timeout,
                    )
                except requests.RequestException as exc:
                    raise TransportError(f"POST {path}: {exc}") from exc
            if resp.status_code >= 500:
                raise TransportError(f"POST {path}: HTTP {resp.status_code}")
            if resp.status_code == 413:
                raise ContextTooLargeError(f"POST {path}: request too large")
            if resp.status_code != 200:
                raise BadResponseError(
                    f"POST {path}: HTTP {resp.status_code}: {resp.text[:200]}"
                )
            if self._recorder is not None:
                self._recorder(body, resp.content)
            try:
                data = resp.json()
            except ValueError as exc:
                raise BadResponseError(f"POST {path}: non-JSON body") from exc
            if isinstance(data, dict) and data.get("error") == "context_too_large":
                raise ContextTooLargeError(f"POST {path}: service context limit")
            return data

        return call_with_retries(
            attempt, max_attempts=self.max_attempts, sleep=self._sleep
        )


class HttpEmbedClient(_HttpBase):
    """Embedding-service client; tracks the advertised dim per kind."""

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self._dims: dict[str, int] = {}
        self._dim_lock = threading.Lock()

    def embed(self, image: bytes, kind: str) -> np.ndarray:
        if not image:
            raise ValueError("image bytes must be non-empty")
        if kind not in EMBED_KINDS:
            raise ValueError(f"kind must be one of {EMBED_KINDS}")
        data = self._post(
            EMBED_PATH,
            {"image": base64.b64encode(image).decode("ascii"), "kind": kind},
        )
        if not isinstance(data, dict) or "vector" not in data or "dim" not in data:
            raise BadResponseError(f"embed response missing fields: {data!r}")
        vec = np.asarray(data["vector"], dtype=np.float32)
        dim = int(data["dim"])
        if vec.ndim != 1 or vec.shape[0] != dim or not np.all(np.isfinite(vec)):
            raise BadResponseError(
                f"embed vector malformed (dim={dim}, shape={vec.shape})"
            )
        with self._dim_lock:
            prior = self._dims.setdefault(kind, dim)
        if prior != dim:
            raise DimDriftError(f"kind {kind!r}: dim changed {prior} -> {dim}")
        return vec


class HttpChatClient(_HttpBase):
    """Vision-language service client; returns the response text verbatim."""

    def chat(self, request: ChatRequest) -> str:
        data = self._post(CHAT_PATH, request.to_wire())
        if not isinstance(data, dict) or not isinstance(data.get("text"), str):
            raise BadResponseError(f"chat response missing text: {data!r}")
        return data["text"]


# --- deterministic offline mocks ----------------------------------------------


def _hash_rng(*parts: bytes) -> np.random.Generator:
    digest = hashlib.sha256(b"\x00".join(parts)).digest()
    return np.random.default_rng(int.from_bytes(digest[:16], "little"))


class MockEmbedder:
    """Seeded pseudo-random unit vectors keyed by a hash of the image bytes.

    Equal bytes give equal vectors; distinct bytes give distinct directions
    with overwhelming probability.
    """

    def __init__(self, dim_front: int = 64, dim_bev: int = 64, seed: int = 0):
        self._dims = {"front_view": dim_front, "bev": dim_bev}
        self.seed = seed
        self.calls = 0

    def embed(self, image: bytes, kind: str) -> np.ndarray:
        if not image:
            raise ValueError("image bytes must be non-empty")
        if kind not in EMBED_KINDS:
            raise ValueError(f"kind must be one of {EMBED_KINDS}")
        self.calls += 1
        rng = _hash_rng(str(self.seed).encode(), kind.encode(), image)
        v = rng.standard_normal(self._dims[kind])
        v = (v / np.linalg.norm(v)).astype(np.float32)
        return v


def chat_fingerprint(request: ChatRequest) -> str:
    """Stable hex fingerprint of the ordered image parts of a request."""
    h = hashlib.sha256()
    for img in request.image_parts():
        h.update(hashlib.sha256(img).digest())
    return h.hexdigest()


_QUOTED_RE = re.compile(r'"([^"]+)"')


class MockChatClient:
    """Deterministic chat stand-in.

    Resolution order: the image-order diagnostic, then the fingerprint
    script, then the exemplar-echo policy (answer with the first quoted
    phrase in the request text that parses as a meta-action), then the
    fixed default text. fail_times injects that many leading
    TransportErrors for retry tests.
    """

    def __init__(
        self,
        script: dict[str, str] | None = None,
        default_text: str = "go straight constantly",
        echo_exemplar: bool = True,
        fail_times: int = 0,
    ):
        self.script = dict(script or {})
        self.default_text = default_text
        self.echo_exemplar = echo_exemplar
        self.fail_times = fail_times
        self.calls = 0
        self.requests: list[ChatRequest] = []

    def chat(self, request: ChatRequest) -> str:
        self.calls += 1
        if self.fail_times > 0:
            self.fail_times -= 1
            raise TransportError("injected failure")
        self.requests.append(request)
        if request.system == ECHO_IMAGE_ORDER_SYSTEM:
            return "\n".join(
                hashlib.sha256(img).hexdigest() for img in request.image_parts()
            )
        fp = chat_fingerprint(request)
        if fp in self.script:
            return self.script[fp]
        if self.echo_exemplar:
            for text in request.text_parts():
                for quoted in _QUOTED_RE.findall(text):
                    try:
                        parse_meta_action(quoted)
                    except Exception:
                        continue
                    return quoted
        return self.default_text
