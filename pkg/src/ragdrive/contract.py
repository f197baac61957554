"""Contract checks any service behind the wire protocol must satisfy.

Run against a live base URL; used to qualify real adapters before
pointing the engine at them. Checks: embed schema conformance, embed-dim
stability across repeated calls, chat schema conformance, multi-image
order preservation via the reserved diagnostic system text, and rejection
of malformed bodies.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass

import requests

from .errors import BadResponseError
from .gateway import (
    CHAT_PATH,
    ECHO_IMAGE_ORDER_SYSTEM,
    ChatRequest,
    HttpChatClient,
    HttpEmbedClient,
    MessagePart,
)


@dataclass(frozen=True)
class ContractCheck:
    name: str
    passed: bool
    detail: str = ""


def _image_bytes(i: int) -> bytes:
    return b"contract-image-" + str(i).encode() + bytes([i % 251]) * 32


def run_contract_checks(
    base_url: str, embed_calls: int = 100, timeout: float = 30.0
) -> list[ContractCheck]:
    checks: list[ContractCheck] = []
    embed = HttpEmbedClient(base_url, timeout=timeout)
    chat = HttpChatClient(base_url, timeout=timeout)

    # embed schema + finite vector
    try:
        vec = embed.embed(_image_bytes(0), "front_view")
        checks.append(ContractCheck("embed_schema", True, f"dim={vec.shape[0]}"))
    except Exception as exc:
        checks.append(ContractCheck("embed_schema", False, str(exc)))
        return checks

    # dim stability per kind over many calls with varying payloads
    for kind in ("front_view", "bev"):
        try:
            dims = {
                embed.embed(_image_bytes(i), kind).shape[0]
                for i in range(embed_calls)
            }
            checks.append(
                ContractCheck(
                    f"embed_dim_stability_{kind}",
                    len(dims) == 1,
                    f"dims seen: {sorted(dims)} over {embed_calls} calls",
                )
            )
        except Exception as exc:
            checks.append(ContractCheck(f"embed_dim_stability_{kind}", False, str(exc)))

    # chat schema
    try:
        text = chat.chat(
            ChatRequest(system="contract probe", messages=(MessagePart(text="reply"),))
        )
        checks.append(ContractCheck("chat_schema", isinstance(text, str), ""))
    except Exception as exc:
        checks.append(ContractCheck("chat_schema", False, str(exc)))

    # ordered multi-image echo
    images = [_image_bytes(100 + i) for i in range(4)]
    expected = [hashlib.sha256(img).hexdigest() for img in images]
    try:
        reply = chat.chat(
            ChatRequest(
                system=ECHO_IMAGE_ORDER_SYSTEM,
                messages=tuple(MessagePart(image=img) for img in images),
            )
        )
        got = [line.strip() for line in reply.splitlines() if line.strip()]
        checks.append(
            ContractCheck(
                "chat_image_order",
                got == expected,
                f"expected {len(expected)} digests in order, got {len(got)}",
            )
        )
    except Exception as exc:
        checks.append(ContractCheck("chat_image_order", False, str(exc)))

    # malformed body rejected with a client error, not accepted or 5xx
    try:
        resp = requests.post(
            base_url.rstrip("/") + CHAT_PATH,
            data=json.dumps({"messages": "not-a-list"}),
            headers={"Content-Type": "application/json"},
            timeout=timeout,
        )
        checks.append(
            ContractCheck(
                "rejects_malformed",
                400 <= resp.status_code < 500,
                f"HTTP {resp.status_code}",
            )
        )
    except requests.RequestException as exc:
        checks.append(ContractCheck("rejects_malformed", False, str(exc)))

    return checks


def assert_contract(base_url: str, embed_calls: int = 100) -> None:
    """Raise BadResponseError listing every failed check."""
    checks = run_contract_checks(base_url, embed_calls=embed_calls)
    failed = [c for c in checks if not c.passed]
    if failed:
        lines = "; ".join(f"{c.name}: {c.detail}" for c in failed)
        raise BadResponseError(f"contract violations: {lines}")
