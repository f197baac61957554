"""Spatial-perception question/answer generation from scene annotations.

Four task kinds: class-at-coordinate recognition, position estimation,
inter-object distance estimation, and size estimation. Every emitted pair
refers to exactly one object: coordinates must fall inside exactly one
footprint and qualifier+class referents must be unique in the scene;
ambiguous candidates are skipped, never disambiguated. Coordinates and
distances are formatted to exactly one decimal place, ties rounded half-up.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from .bev import MOVING_SPEED, BevConfig, legend_text
from .scenes import ObjectAnnotation, SceneRecord

TASK_KINDS = (
    "class_recognition",
    "position_estimation",
    "distance_estimation",
    "size_estimation",
)

SECTORS = (
    "front", "left-front", "left", "left-rear",
    "rear", "right-rear", "right", "right-front",
)

CLASS_PHRASES = {
    "vehicle": "vehicle",
    "pedestrian": "pedestrian",
    "static_obstacle": "static obstacle",
}
_PHRASE_TO_CLASS = {v: k for k, v in CLASS_PHRASES.items()}

_DECIMAL_INSTRUCTION = "Give the result to one decimal place."


def round1(value: float) -> float:
    """Round to one decimal, ties half-up on the shortest decimal form."""
    return float(Decimal(repr(value)).quantize(Decimal("0.1"), rounding=ROUND_HALF_UP))


def fmt1(value: float) -> str:
    return f"{round1(value):.1f}"


def fmt_coord(x: float, y: float) -> str:
    return f"[{fmt1(x)},{fmt1(y)}]"


def sector_of(x: float, y: float) -> str:
    """Eight 45-degree compass sectors; x forward, y left."""
    theta = math.degrees(math.atan2(y, x))
    k = int(math.floor((theta + 22.5) / 45.0)) % 8
    return SECTORS[k]


def footprint_axes(ann: ObjectAnnotation) -> tuple[float, float]:
    """Unit long-axis direction: along velocity when moving, else forward."""
    if ann.speed > MOVING_SPEED:
        return ann.velocity[0] / ann.speed, ann.velocity[1] / ann.speed
    return 1.0, 0.0


def footprint_contains(ann: ObjectAnnotation, x: float, y: float) -> bool:
    ux, uy = footprint_axes(ann)
    dx, dy = x - ann.center[0], y - ann.center[1]
    along = dx * ux + dy * uy
    across = -dx * uy + dy * ux
    return abs(along) <= ann.size[0] / 2 and abs(across) <= ann.size[1] / 2


@dataclass(frozen=True)
class VqaPair:
    scene_id: str
    question: str
    answer: str
    task_kind: str
    ground_truth: dict


def _render_answer(task_kind: str, gt: dict) -> str:
    if task_kind == "class_recognition":
        x, y = gt["coordinate"]
        return (
            f"There is a {CLASS_PHRASES[gt['label']]} located within "
            f"the coordinate {fmt_coord(x, y)}."
        )
    if task_kind == "position_estimation":
        x, y = gt["coordinate"]
        return (
            f"The central position coordinate of the {gt['referent']} "
            f"is {fmt_coord(x, y)}."
        )
    if task_kind == "distance_estimation":
        return (
            f"The distance from the {gt['referent_a']} to the "
            f"{gt['referent_b']} is {fmt1(gt['meters'])} m."
        )
    if task_kind == "size_estimation":
        l, w, h = gt["size"]
        return (
            f"The size of the {gt['referent']} is "
            f"[{fmt1(l)},{fmt1(w)},{fmt1(h)}] m."
        )
    raise ValueError(f"unknown task kind {task_kind!r}")


def _scene_rng(scene_id: str, seed: int) -> np.random.Generator:
    digest = hashlib.sha256(f"{seed}:{scene_id}".encode("utf-8")).digest()
    return np.random.default_rng(int.from_bytes(digest[:16], "little"))


def _unique_referents(scene: SceneRecord) -> dict[tuple[str, str], int]:
    """(sector, class) pairs that select exactly one annotation."""
    buckets: dict[tuple[str, str], list[int]] = {}
    for i, ann in enumerate(scene.annotations):
        key = (sector_of(*ann.center), ann.object_class)
        buckets.setdefault(key, []).append(i)
    return {key: idxs[0] for key, idxs in buckets.items() if len(idxs) == 1}


def _referent_phrase(sector: str, object_class: str) -> str:
    return f"{sector} {CLASS_PHRASES[object_class]}"


def gen_vqa_pairs(
    scene: SceneRecord, seed: int = 0, max_pairs: int = 12
) -> list[VqaPair]:
    """Generate unique-referent question/answer pairs for one scene.

    Deterministic for a fixed (scene, seed). Kinds are interleaved
    round-robin before capping so small caps keep task diversity.
    """
    rng = _scene_rng(scene.scene_id, seed)
    anns = scene.annotations
    by_kind: dict[str, list[VqaPair]] = {k: [] for k in TASK_KINDS}

    # class recognition: a rounded coordinate inside exactly one footprint
    for ann in anns:
        ux, uy = footprint_axes(ann)
        for _ in range(4):
            along = float(rng.uniform(-0.4, 0.4)) * ann.size[0]
            across = float(rng.uniform(-0.4, 0.4)) * ann.size[1]
            x = round1(ann.center[0] + along * ux - across * uy)
            y = round1(ann.center[1] + along * uy + across * ux)
            containing = [a for a in anns if footprint_contains(a, x, y)]
            if len(containing) == 1:
                gt = {"label": containing[0].object_class, "coordinate": [x, y]}
                by_kind["class_recognition"].append(
                    VqaPair(
                        scene_id=scene.scene_id,
                        question=(
                            "What kind of object is located within the "
                            f"coordinate {fmt_coord(x, y)} in this image?"
                        ),
                        answer=_render_answer("class_recognition", gt),
                        task_kind="class_recognition",
                        ground_truth=gt,
                    )
                )
                break

    refs = _unique_referents(scene)
    ordered_refs = sorted(refs.items(), key=lambda kv: kv[1])

    for (sector, cls), idx in ordered_refs:
        phrase = _referent_phrase(sector, cls)
        cx, cy = anns[idx].center
        gt = {"referent": phrase, "coordinate": [round1(cx), round1(cy)]}
        by_kind["position_estimation"].append(
            VqaPair(
                scene_id=scene.scene_id,
                question=(
                    f"What is the central position coordinate of the {phrase} "
                    f"in this image? {_DECIMAL_INSTRUCTION}"
                ),
                answer=_render_answer("position_estimation", gt),
                task_kind="position_estimation",
                ground_truth=gt,
            )
        )
        l, w, h = anns[idx].size
        gt_size = {"referent": phrase, "size": [round1(l), round1(w), round1(h)]}
        by_kind["size_estimation"].append(
            VqaPair(
                scene_id=scene.scene_id,
                question=(
                    f"What are the length, width and height of the {phrase} "
                    f"in this image? {_DECIMAL_INSTRUCTION}"
                ),
                answer=_render_answer("size_estimation", gt_size),
                task_kind="size_estimation",
                ground_truth=gt_size,
            )
        )

    for a_pos in range(len(ordered_refs)):
        for b_pos in range(a_pos + 1, len(ordered_refs)):
            (sec_a, cls_a), ia = ordered_refs[a_pos]
            (sec_b, cls_b), ib = ordered_refs[b_pos]
            if ia == ib:
                continue
            pa, pb = anns[ia].center, anns[ib].center
            dist = math.hypot(pa[0] - pb[0], pa[1] - pb[1])
            ra = _referent_phrase(sec_a, cls_a)
            rb = _referent_phrase(sec_b, cls_b)
            gt = {"referent_a": ra, "referent_b": rb, "meters": round1(dist)}
            by_kind["distance_estimation"].append(
                VqaPair(
                    scene_id=scene.scene_id,
                    question=(
                        f"What is the distance from the {ra} to the {rb} "
                        f"in this image? {_DECIMAL_INSTRUCTION}"
                    ),
                    answer=_render_answer("distance_estimation", gt),
                    task_kind="distance_estimation",
                    ground_truth=gt,
                )
            )

    # round-robin across kinds, then cap
    out: list[VqaPair] = []
    queues = [list(by_kind[k]) for k in TASK_KINDS]
    while any(queues) and len(out) < max_pairs:
        for q in queues:
            if q and len(out) < max_pairs:
                out.append(q.pop(0))
    return out


def write_vqa_jsonl(
    pairs: Iterable[VqaPair],
    scenes_by_id: Mapping[str, SceneRecord],
    path: str | Path,
    bev_cfg: BevConfig | None = None,
) -> int:
    """Export pairs in the fine-tuning layout, one JSON object per line."""
    system = legend_text(bev_cfg or BevConfig())
    n = 0
    with Path(path).open("w", encoding="utf-8") as fh:
        for pair in pairs:
            scene = scenes_by_id[pair.scene_id]
            fh.write(
                json.dumps(
                    {
                        "scene_id": pair.scene_id,
                        "images": [scene.front_image, scene.bev_image],
                        "system": system,
                        "question": pair.question,
                        "answer": pair.answer,
                        "task_kind": pair.task_kind,
                    },
                    sort_keys=True,
                )
            )
            fh.write("\n")
            n += 1
    return n
