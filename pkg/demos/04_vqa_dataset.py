"""Generating the spatial-perception VQA dataset from annotations.

Run: python demos/04_vqa_dataset.py   (writes demo_vqa.jsonl)
"""

from ragdrive import ObjectAnnotation, SceneRecord, gen_vqa_pairs, write_vqa_jsonl

scene = SceneRecord(
    scene_id="demo",
    front_image="front.png",
    bev_image="demo_bev.png",
    annotations=(
        ObjectAnnotation("static_obstacle", (24.5, 17.2), (0.8, 0.8, 1.0), (0.0, 0.0)),
        ObjectAnnotation("vehicle", (7.6, 8.9), (4.5, 2.0, 1.6), (3.0, 0.0)),
        ObjectAnnotation("pedestrian", (10.0, -12.0), (0.7, 0.7, 1.8), (0.0, 0.0)),
        # a second vehicle in the same sector as the first: both become
        # ambiguous referents and are skipped for referent-based questions
        ObjectAnnotation("vehicle", (9.0, 11.0), (4.2, 1.9, 1.5), (0.0, 0.0)),
    ),
)

pairs = gen_vqa_pairs(scene, seed=0, max_pairs=12)
for pair in pairs:
    print(f"[{pair.task_kind}]")
    print(f"  Q: {pair.question}")
    print(f"  A: {pair.answer}")

n = write_vqa_jsonl(pairs, {scene.scene_id: scene}, "demo_vqa.jsonl")
print(f"\nwrote {n} pairs to demo_vqa.jsonl "
      "(scene_id, images, system, question, answer, task_kind per line)")
