"""Scene records, the JSON Lines manifest format, and the dataset split.

A manifest holds one scene object per line. Image paths are resolved
relative to the manifest file's directory. All lengths are meters, angles
radians, time seconds, with the ego frame x forward / y left.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, Iterator

import numpy as np

from .errors import (
    DuplicateIdError,
    InsufficientScenesError,
    MissingImageError,
    ParseError,
)
from .taxonomy import MetaAction

OBJECT_CLASSES = ("vehicle", "pedestrian", "static_obstacle")
SPLITS = ("finetune", "database", "test")


@dataclass(frozen=True)
class EgoPose:
    t: float
    x: float
    y: float
    heading: float  # radians in (-pi, pi]
    speed: float    # m/s, >= 0


@dataclass(frozen=True)
class ObjectAnnotation:
    object_class: str          # one of OBJECT_CLASSES
    center: tuple[float, float]   # ego frame, meters
    size: tuple[float, float, float]  # length, width, height, > 0
    velocity: tuple[float, float]     # m/s, zero for static obstacles

    @property
    def speed(self) -> float:
        return math.hypot(self.velocity[0], self.velocity[1])


@dataclass(frozen=True)
class SceneRecord:
    scene_id: str
    front_image: str
    annotations: tuple[ObjectAnnotation, ...] = ()
    ego_history: tuple[EgoPose, ...] = ()
    nav_hint: str = ""
    surround_images: tuple[str, ...] | None = None
    bev_image: str | None = None
    split: str | None = None
    gt_action: MetaAction | None = None

    def with_label(self, action: MetaAction) -> "SceneRecord":
        return replace(self, gt_action=action)

    def with_split(self, split: str) -> "SceneRecord":
        return replace(self, split=split)

    def with_bev(self, bev_image: str) -> "SceneRecord":
        return replace(self, bev_image=bev_image)


def _require(cond: bool, scene_id: str, msg: str) -> None:
    if not cond:
        raise ParseError(f"scene {scene_id!r}: {msg}")


def _parse_annotation(scene_id: str, idx: int, obj: dict) -> ObjectAnnotation:
    where = f"annotations[{idx}]"
    _require(isinstance(obj, dict), scene_id, f"{where} must be an object")
    cls = obj.get("class")
    _require(cls in OBJECT_CLASSES, scene_id, f"{where}.class invalid: {cls!r}")
    center = obj.get("center")
    _require(
        isinstance(center, list) and len(center) == 2,
        scene_id, f"{where}.center must be [x, y]",
    )
    size = obj.get("size")
    _require(
        isinstance(size, list) and len(size) == 3,
        scene_id, f"{where}.size must be [l, w, h]",
    )
    _require(all(s > 0 for s in size), scene_id, f"{where}.size must be positive")
    velocity = obj.get("velocity", [0.0, 0.0])
    _require(
        isinstance(velocity, list) and len(velocity) == 2,
        scene_id, f"{where}.velocity must be [vx, vy]",
    )
    if cls == "static_obstacle":
        _require(
            velocity[0] == 0 and velocity[1] == 0,
            scene_id, f"{where}.velocity must be zero for static_obstacle",
        )
    return ObjectAnnotation(
        object_class=cls,
        center=(float(center[0]), float(center[1])),
        size=(float(size[0]), float(size[1]), float(size[2])),
        velocity=(float(velocity[0]), float(velocity[1])),
    )


def _parse_pose(scene_id: str, idx: int, obj: dict, prev_t: float | None) -> EgoPose:
    where = f"ego_history[{idx}]"
    _require(isinstance(obj, dict), scene_id, f"{where} must be an object")
    for key in ("t", "x", "y", "heading", "speed"):
        _require(key in obj, scene_id, f"{where}.{key} missing")
    t = float(obj["t"])
    if prev_t is not None:
        _require(t > prev_t, scene_id, f"{where}.t not strictly increasing")
    speed = float(obj["speed"])
    _require(speed >= 0, scene_id, f"{where}.speed must be >= 0")
    heading = float(obj["heading"])
    _require(-math.pi < heading <= math.pi + 1e-12, scene_id,
             f"{where}.heading out of (-pi, pi]")
    return EgoPose(t=t, x=float(obj["x"]), y=float(obj["y"]),
                   heading=heading, speed=speed)


def scene_from_dict(data: dict) -> SceneRecord:
    scene_id = data.get("scene_id")
    if not scene_id or not isinstance(scene_id, str):
        raise ParseError("scene_id missing or not a string")
    front = data.get("front_image")
    _require(isinstance(front, str) and bool(front), scene_id, "front_image missing")

    annotations = tuple(
        _parse_annotation(scene_id, i, o)
        for i, o in enumerate(data.get("annotations", []))
    )
    poses: list[EgoPose] = []
    prev_t: float | None = None
    for i, o in enumerate(data.get("ego_history", [])):
        pose = _parse_pose(scene_id, i, o, prev_t)
        poses.append(pose)
        prev_t = pose.t

    surround = data.get("surround_images")
    if surround is not None:
        _require(isinstance(surround, list) and len(surround) == 6,
                 scene_id, "surround_images must list 6 paths")
        surround = tuple(str(s) for s in surround)

    split = data.get("split")
    if split is not None:
        _require(split in SPLITS, scene_id, f"split invalid: {split!r}")

    gt = data.get("gt_action")
    gt_action = None
    if gt is not None:
        try:
            gt_action = MetaAction(gt)
        except ValueError:
            raise ParseError(f"scene {scene_id!r}: gt_action invalid: {gt!r}") from None

    return SceneRecord(
        scene_id=scene_id,
        front_image=front,
        annotations=annotations,
        ego_history=tuple(poses),
        nav_hint=str(data.get("nav_hint", "")),
        surround_images=surround,
        bev_image=data.get("bev_image"),
        split=split,
        gt_action=gt_action,
    )


def scene_to_dict(scene: SceneRecord) -> dict:
    data: dict = {
        "scene_id": scene.scene_id,
        "front_image": scene.front_image,
        "annotations": [
            {
                "class": a.object_class,
                "center": list(a.center),
                "size": list(a.size),
                "velocity": list(a.velocity),
            }
            for a in scene.annotations
        ],
        "ego_history": [
            {"t": p.t, "x": p.x, "y": p.y, "heading": p.heading, "speed": p.speed}
            for p in scene.ego_history
        ],
        "nav_hint": scene.nav_hint,
    }
    if scene.surround_images is not None:
        data["surround_images"] = list(scene.surround_images)
    if scene.bev_image is not None:
        data["bev_image"] = scene.bev_image
    if scene.split is not None:
        data["split"] = scene.split
    if scene.gt_action is not None:
        data["gt_action"] = scene.gt_action.value
    return data


def load_manifest(path: str | Path, check_images: bool = False) -> list[SceneRecord]:
    """Read a JSON Lines manifest, validating every record.

    With check_images, every referenced image path (resolved relative to the
    manifest directory) must exist on disk.
    """
    path = Path(path)
    records: list[SceneRecord] = []
    seen: set[str] = set()
    for lineno, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        try:
            data = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}:{lineno}: invalid JSON: {exc}") from None
        scene = scene_from_dict(data)
        if scene.scene_id in seen:
            raise DuplicateIdError(f"{path}:{lineno}: duplicate scene_id {scene.scene_id!r}")
        seen.add(scene.scene_id)
        if check_images:
            _check_scene_images(path.parent, scene)
        records.append(scene)
    return records


def _check_scene_images(base: Path, scene: SceneRecord) -> None:
    paths = [scene.front_image]
    if scene.surround_images:
        paths.extend(scene.surround_images)
    if scene.bev_image:
        paths.append(scene.bev_image)
    for p in paths:
        if not resolve_image(base, p).exists():
            raise MissingImageError(f"scene {scene.scene_id!r}: image not found: {p}")


def resolve_image(base: str | Path, image_path: str) -> Path:
    p = Path(image_path)
    return p if p.is_absolute() else Path(base) / p


def save_manifest(records: Iterable[SceneRecord], path: str | Path) -> None:
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        for scene in records:
            fh.write(json.dumps(scene_to_dict(scene), sort_keys=True))
            fh.write("\n")


def index_by_id(records: Iterable[SceneRecord]) -> dict[str, SceneRecord]:
    out: dict[str, SceneRecord] = {}
    for r in records:
        if r.scene_id in out:
            raise DuplicateIdError(f"duplicate scene_id {r.scene_id!r}")
        out[r.scene_id] = r
    return out


def assign_split(
    records: list[SceneRecord],
    seed: int,
    counts: tuple[int, int, int],
) -> list[SceneRecord]:
    """Deterministically partition records into finetune/database/test splits.

    Seeded shuffle then cut; records beyond the requested counts keep
    split=None. Output preserves the input record order.
    """
    n_finetune, n_database, n_test = counts
    total = n_finetune + n_database + n_test
    if total > len(records):
        raise InsufficientScenesError(
            f"need {total} scenes for splits, have {len(records)}"
        )
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(records))
    split_of: dict[int, str] = {}
    cursor = 0
    for name, count in (("finetune", n_finetune), ("database", n_database), ("test", n_test)):
        for idx in order[cursor : cursor + count]:
            split_of[int(idx)] = name
        cursor += count
    return [
        r.with_split(split_of[i]) if i in split_of else replace(r, split=None)
        for i, r in enumerate(records)
    ]


def iter_split(records: Iterable[SceneRecord], split: str) -> Iterator[SceneRecord]:
    return (r for r in records if r.split == split)
