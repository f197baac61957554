"""The full offline pipeline, scene manifest to evaluation report.

Runs every CLI stage in-process against deterministic mocks inside a
temporary directory: ingest/split -> label -> render-bev -> embed ->
decide -> evaluate.

Run: python demos/07_end_to_end_pipeline.py
"""

import json
import math
import tempfile
from pathlib import Path

from ragdrive.cli import run

root = Path(tempfile.mkdtemp(prefix="ragdrive-demo-"))
print(f"working in {root}")

# --- a tiny synthetic manifest: 12 scenes with varied maneuvers ---------------
rows = []
for i in range(12):
    turn = [0.0, 0.3, -0.3, 0.0][i % 4]
    speed = [8.0, 8.0, 8.0, 1.5][i % 4]
    poses, x, y, heading = [], 0.0, 0.0, 0.0
    for step in range(13):
        poses.append({"t": step * 0.25, "x": x, "y": y,
                      "heading": heading, "speed": speed})
        x += speed * math.cos(heading) * 0.25
        y += speed * math.sin(heading) * 0.25
        heading += turn * 0.25
    front = root / f"scene{i:02d}.bin"
    front.write_bytes(f"camera frame {i}".encode() * 8)
    rows.append({
        "scene_id": f"scene{i:02d}",
        "front_image": front.name,
        "annotations": [
            {"class": "vehicle", "center": [15.0 + i, 3.0], "size": [4.5, 2.0, 1.6],
             "velocity": [5.0, 0.0]},
        ],
        "ego_history": poses,
        "nav_hint": "",
    })
manifest = root / "scenes.jsonl"
manifest.write_text("".join(json.dumps(r) + "\n" for r in rows))

# --- the pipeline ---------------------------------------------------------------
steps = [
    ["--seed", "1", "ingest", "--manifest", str(manifest),
     "--split-counts", "2,8,2", "--out", str(root / "split.jsonl")],
    ["label", "--manifest", str(root / "split.jsonl"),
     "--out", str(root / "labeled.jsonl")],
    ["render-bev", "--manifest", str(root / "labeled.jsonl"),
     "--out-dir", str(root / "bev"), "--manifest-out", str(root / "ready.jsonl")],
    ["--seed", "1", "embed", "--manifest", str(root / "ready.jsonl"),
     "--store", str(root / "db.radstore"), "--split", "database", "--mock"],
    ["--seed", "1", "decide", "--manifest", str(root / "ready.jsonl"),
     "--store", str(root / "db.radstore"), "--out", str(root / "traces.jsonl"),
     "--split", "test", "--mock"],
    ["evaluate", "--traces", str(root / "traces.jsonl"),
     "--manifest", str(root / "ready.jsonl"),
     "--report", str(root / "report.json")],
]
for argv in steps:
    assert run(argv) == 0, argv

# --- what came out ----------------------------------------------------------------
print("\ndecision traces:")
for line in (root / "traces.jsonl").read_text().splitlines():
    t = json.loads(line)
    print(f"  {t['scene_id']}: retrieved {t['retrieved_id']} "
          f"(overall {t['sim_overall']:.3f}) -> {t['parsed_action']}")

report = json.loads((root / "report.json").read_text())
print("\nreport:")
for key in ("exact_match_accuracy", "macro_f1", "weighted_f1",
            "partial_match_score", "overall_score"):
    print(f"  {key:22s} {report[key]:.4f}")
