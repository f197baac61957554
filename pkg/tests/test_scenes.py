from __future__ import annotations

import json

import pytest

from ragdrive.errors import (
    DuplicateIdError,
    InsufficientScenesError,
    MissingImageError,
    ParseError,
)
from ragdrive.scenes import (
    SceneRecord,
    assign_split,
    index_by_id,
    load_manifest,
    save_manifest,
    scene_from_dict,
)


def make_scene_dict(scene_id="s1", **overrides):
    data = {
        "scene_id": scene_id,
        "front_image": f"{scene_id}_front.png",
        "annotations": [
            {"class": "vehicle", "center": [7.6, 8.9], "size": [4.5, 2.0, 1.6],
             "velocity": [3.0, 0.0]},
            {"class": "static_obstacle", "center": [24.5, 17.2],
             "size": [0.8, 0.8, 1.0], "velocity": [0.0, 0.0]},
        ],
        "ego_history": [
            {"t": 0.0, "x": 0.0, "y": 0.0, "heading": 0.0, "speed": 8.0},
            {"t": 1.5, "x": 12.0, "y": 0.0, "heading": 0.0, "speed": 8.0},
            {"t": 3.0, "x": 24.0, "y": 0.0, "heading": 0.0, "speed": 8.0},
        ],
        "nav_hint": "continue on the main road",
    }
    data.update(overrides)
    return data


def write_manifest(path, dicts):
    path.write_text(
        "".join(json.dumps(d) + "\n" for d in dicts), encoding="utf-8"
    )


def test_load_counts_and_fields(tmp_path):
    path = tmp_path / "m.jsonl"
    write_manifest(path, [make_scene_dict(f"s{i}") for i in range(3)])
    records = load_manifest(path)
    assert len(records) == 3
    assert records[0].annotations[0].object_class == "vehicle"
    assert records[0].annotations[1].center == (24.5, 17.2)
    assert records[0].ego_history[0].speed == 8.0


def test_duplicate_id_rejected(tmp_path):
    path = tmp_path / "m.jsonl"
    write_manifest(path, [make_scene_dict("dup"), make_scene_dict("dup")])
    with pytest.raises(DuplicateIdError):
        load_manifest(path)


def test_negative_size_names_the_field():
    data = make_scene_dict()
    data["annotations"][0]["size"] = [4.5, -2.0, 1.6]
    with pytest.raises(ParseError, match=r"annotations\[0\].size"):
        scene_from_dict(data)


def test_static_obstacle_must_be_stationary():
    data = make_scene_dict()
    data["annotations"][1]["velocity"] = [1.0, 0.0]
    with pytest.raises(ParseError, match="velocity"):
        scene_from_dict(data)


def test_nonmonotone_timestamps_rejected():
    data = make_scene_dict()
    data["ego_history"][1]["t"] = 0.0
    with pytest.raises(ParseError, match="strictly increasing"):
        scene_from_dict(data)


def test_bad_json_line_is_parse_error(tmp_path):
    path = tmp_path / "m.jsonl"
    path.write_text('{"scene_id": "s1",\n', encoding="utf-8")
    with pytest.raises(ParseError):
        load_manifest(path)


def test_missing_image_reported_with_scene_id(tmp_path):
    path = tmp_path / "m.jsonl"
    write_manifest(path, [make_scene_dict("ghost")])
    with pytest.raises(MissingImageError, match="ghost"):
        load_manifest(path, check_images=True)


def test_check_images_passes_when_files_exist(tmp_path):
    path = tmp_path / "m.jsonl"
    write_manifest(path, [make_scene_dict("ok")])
    (tmp_path / "ok_front.png").write_bytes(b"png")
    assert len(load_manifest(path, check_images=True)) == 1


def test_round_trip_is_field_identical(tmp_path):
    src = tmp_path / "src.jsonl"
    dicts = [make_scene_dict(f"s{i}") for i in range(5)]
    dicts[2]["gt_action"] = "turn_left"
    dicts[3]["split"] = "test"
    dicts[4]["bev_image"] = "s4_bev.png"
    write_manifest(src, dicts)
    records = load_manifest(src)
    dst = tmp_path / "dst.jsonl"
    save_manifest(records, dst)
    assert load_manifest(dst) == records


def test_assign_split_sizes_and_partition(tmp_path):
    records = [scene_from_dict(make_scene_dict(f"s{i}")) for i in range(100)]
    out = assign_split(records, seed=7, counts=(20, 50, 10))
    sizes = {name: sum(1 for r in out if r.split == name)
             for name in ("finetune", "database", "test")}
    assert sizes == {"finetune": 20, "database": 50, "test": 10}
    assert sum(1 for r in out if r.split is None) == 20
    # no scene in two splits by construction; ids preserved in order
    assert [r.scene_id for r in out] == [r.scene_id for r in records]


def test_assign_split_deterministic():
    records = [scene_from_dict(make_scene_dict(f"s{i}")) for i in range(30)]
    a = assign_split(records, seed=3, counts=(10, 10, 5))
    b = assign_split(records, seed=3, counts=(10, 10, 5))
    assert [r.split for r in a] == [r.split for r in b]
    c = assign_split(records, seed=4, counts=(10, 10, 5))
    assert [r.split for r in a] != [r.split for r in c]


def test_assign_split_at_full_corpus_scale():
    records = [
        SceneRecord(scene_id=f"s{i}", front_image="f.png") for i in range(34000)
    ]
    out = assign_split(records, seed=0, counts=(10000, 20000, 4000))
    sizes = {name: sum(1 for r in out if r.split == name)
             for name in ("finetune", "database", "test")}
    assert sizes == {"finetune": 10000, "database": 20000, "test": 4000}


def test_assign_split_insufficient():
    records = [scene_from_dict(make_scene_dict(f"s{i}")) for i in range(10)]
    with pytest.raises(InsufficientScenesError):
        assign_split(records, seed=0, counts=(5, 5, 5))


def test_index_by_id_detects_duplicates():
    records = [scene_from_dict(make_scene_dict("x")),
               scene_from_dict(make_scene_dict("x"))]
    with pytest.raises(DuplicateIdError):
        index_by_id(records)
