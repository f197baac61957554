"""The online decision flow: retrieve an exemplar, prompt the model, parse.

For a query scene the pipeline embeds both views, retrieves the most
similar stored scene, assembles the system / retrieval-context / closing
instruction texts around the four images (query front, query BEV,
retrieved front, retrieved BEV), invokes the chat service, and parses the
reply into one meta-action. A reply that fails to parse gets one retry
with a clarification appended; a second failure is recorded as a
parse-failure, which evaluation scores as wrong.

Prompt texts come from versioned template files shipped as package data.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping

from .errors import EngineError, MissingGtActionError, MissingImageError
from .gateway import ChatRequest, MessagePart
from .retrieval import RetrievalConfig, RetrievalHit, top_k
from .scenes import SceneRecord, resolve_image
from .store import EmbeddingStore
from .taxonomy import CANONICAL_PHRASES, ALL_ACTIONS, MetaAction, parse_meta_action

TEMPLATE_VERSION = "v1"


def _template(name: str) -> str:
    ref = resources.files("ragdrive").joinpath(f"templates/{TEMPLATE_VERSION}/{name}")
    return ref.read_text(encoding="utf-8").strip()


@dataclass(frozen=True)
class PromptBundle:
    system: str
    rag_context: str
    image_parts: tuple[bytes, ...]  # query front, query BEV, retrieved front, retrieved BEV
    instruction: str

    def to_chat_request(self, temperature: float = 0.0, max_tokens: int = 64) -> ChatRequest:
        parts: list[MessagePart] = [MessagePart(text=self.rag_context)]
        parts.extend(MessagePart(image=img) for img in self.image_parts)
        parts.append(MessagePart(text=self.instruction))
        return ChatRequest(
            system=self.system,
            messages=tuple(parts),
            temperature=temperature,
            max_tokens=max_tokens,
        )


@dataclass(frozen=True)
class DecisionTrace:
    scene_id: str
    retrieved_id: str | None
    sim_fv: float | None
    sim_bev: float | None
    sim_overall: float | None
    raw_model_text: str | None
    parsed_action: MetaAction | None  # None <=> parse failed or errored
    parse_failed: bool
    latency_ms: float
    error: str | None = None

    def to_dict(self) -> dict:
        return {
            "scene_id": self.scene_id,
            "retrieved_id": self.retrieved_id,
            "sim_fv": self.sim_fv,
            "sim_bev": self.sim_bev,
            "sim_overall": self.sim_overall,
            "raw_model_text": self.raw_model_text,
            "parsed_action": self.parsed_action.value if self.parsed_action else None,
            "parse_failed": self.parse_failed,
            "latency_ms": self.latency_ms,
            "error": self.error,
        }


def phrase_list() -> str:
    return "\n".join(f"- {CANONICAL_PHRASES[a]}" for a in ALL_ACTIONS)


def build_prompts(
    query: SceneRecord,
    retrieved: SceneRecord,
    hit: RetrievalHit,
    query_images: tuple[bytes, bytes],
    retrieved_images: tuple[bytes, bytes],
) -> PromptBundle:
    """Fill the versioned templates; deterministic for identical inputs."""
    if retrieved.gt_action is None:
        raise MissingGtActionError(
            f"retrieved scene {retrieved.scene_id!r} has no gt_action"
        )
    nav_line = f" Navigation hint for the current scene: {query.nav_hint}" if query.nav_hint else ""
    rag_context = _template("rag_context.txt").format(
        sim_fv=hit.sim_fv,
        sim_bev=hit.sim_bev,
        sim_overall=hit.sim_overall,
        gt_phrase=CANONICAL_PHRASES[retrieved.gt_action],
        nav_line=nav_line,
    )
    instruction = _template("instruction.txt").format(phrase_list=phrase_list())
    return PromptBundle(
        system=_template("system.txt"),
        rag_context=rag_context,
        image_parts=(*query_images, *retrieved_images),
        instruction=instruction,
    )


@dataclass(frozen=True)
class DecisionConfig:
    retrieval: RetrievalConfig = RetrievalConfig()
    temperature: float = 0.0
    max_tokens: int = 64
    include_surround: bool = False  # attach the six surround views after the BEV
    max_in_flight: int = 8


def _read_image(base: Path, path: str | None, scene_id: str, what: str) -> bytes:
    if not path:
        raise MissingImageError(f"scene {scene_id!r}: no {what} image")
    p = resolve_image(base, path)
    if not p.exists():
        raise MissingImageError(f"scene {scene_id!r}: {what} image missing: {p}")
    return p.read_bytes()


def decide(
    query: SceneRecord,
    scenes_by_id: Mapping[str, SceneRecord],
    store: EmbeddingStore,
    embedder,
    chat,
    cfg: DecisionConfig | None = None,
    image_base: str | Path = ".",
) -> DecisionTrace:
    """Run the full per-scene pipeline and return its audit trace.

    Gateway and retrieval errors propagate after being recorded; use
    decide_batch to collect error traces instead of raising.
    """
    cfg = cfg or DecisionConfig()
    base = Path(image_base)
    started = time.perf_counter()

    def _trace(**kw) -> DecisionTrace:
        latency = (time.perf_counter() - started) * 1000.0
        defaults = dict(
            scene_id=query.scene_id, retrieved_id=None, sim_fv=None, sim_bev=None,
            sim_overall=None, raw_model_text=None, parsed_action=None,
            parse_failed=False, latency_ms=latency, error=None,
        )
        defaults.update(kw)
        return DecisionTrace(**defaults)

    try:
        front = _read_image(base, query.front_image, query.scene_id, "front")
        bev = _read_image(base, query.bev_image, query.scene_id, "BEV")
        q_fv = embedder.embed(front, "front_view")
        q_bev = embedder.embed(bev, "bev")
        hit = top_k(q_fv, q_bev, store, RetrievalConfig(omega=cfg.retrieval.omega, k=1))[0]
        retrieved = scenes_by_id[hit.scene_id]
        r_front = _read_image(base, retrieved.front_image, retrieved.scene_id, "front")
        r_bev = _read_image(base, retrieved.bev_image, retrieved.scene_id, "BEV")
        bundle = build_prompts(query, retrieved, hit, (front, bev), (r_front, r_bev))
        if cfg.include_surround and query.surround_images:
            extra = tuple(
                _read_image(base, p, query.scene_id, "surround")
                for p in query.surround_images
            )
            # surround views ride along after the four main images
            bundle = PromptBundle(
                system=bundle.system,
                rag_context=bundle.rag_context,
                image_parts=bundle.image_parts + extra,
                instruction=bundle.instruction,
            )
        request = bundle.to_chat_request(cfg.temperature, cfg.max_tokens)
    except (EngineError, KeyError) as exc:
        raise type(exc)(f"scene {query.scene_id!r}: {exc}") from exc

    text = chat.chat(request)
    try:
        action = parse_meta_action(text)
    except EngineError:
        retry_request = ChatRequest(
            system=request.system,
            messages=request.messages + (MessagePart(text=_template("retry.txt")),),
            temperature=request.temperature,
            max_tokens=request.max_tokens,
        )
        text = chat.chat(retry_request)
        try:
            action = parse_meta_action(text)
        except EngineError:
            return _trace(
                retrieved_id=hit.scene_id, sim_fv=hit.sim_fv, sim_bev=hit.sim_bev,
                sim_overall=hit.sim_overall, raw_model_text=text, parse_failed=True,
            )
    return _trace(
        retrieved_id=hit.scene_id, sim_fv=hit.sim_fv, sim_bev=hit.sim_bev,
        sim_overall=hit.sim_overall, raw_model_text=text, parsed_action=action,
    )


def decide_batch(
    queries: Iterable[SceneRecord],
    scenes_by_id: Mapping[str, SceneRecord],
    store: EmbeddingStore,
    embedder,
    chat,
    cfg: DecisionConfig | None = None,
    image_base: str | Path = ".",
) -> list[DecisionTrace]:
    """Decide many scenes with bounded parallelism, preserving input order.

    Per-scene failures become error traces (scored as parse-failures)
    instead of aborting the batch.
    """
    cfg = cfg or DecisionConfig()
    queries = list(queries)

    def one(q: SceneRecord) -> DecisionTrace:
        started = time.perf_counter()
        try:
            return decide(q, scenes_by_id, store, embedder, chat, cfg, image_base)
        except (EngineError, KeyError) as exc:
            return DecisionTrace(
                scene_id=q.scene_id, retrieved_id=None, sim_fv=None, sim_bev=None,
                sim_overall=None, raw_model_text=None, parsed_action=None,
                parse_failed=True,
                latency_ms=(time.perf_counter() - started) * 1000.0,
                error=f"{type(exc).__name__}: {exc}",
            )

    with ThreadPoolExecutor(max_workers=cfg.max_in_flight) as pool:
        return list(pool.map(one, queries))
