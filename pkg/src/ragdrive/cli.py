"""Single entry point exposing every flow as a subcommand.

Subcommands: ingest, label, render-bev, gen-vqa, embed, retrieve, decide,
evaluate, loss-check, report. Exit codes: 0 success, 1 engine error (one
machine-parsable JSON line on stderr), 2 usage error. All randomness is
seeded from the config / --seed, so runs are reproducible; --mock swaps
the gateway for the deterministic offline mocks.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import bev as bev_mod
from . import vqa as vqa_mod
from .config import EngineConfig, load_config
from .decision import DecisionConfig, decide_batch
from .errors import EngineError, MissingImageError
from .evaluation import ScoreWeights, evaluate, pairs_from_traces
from .gateway import HttpChatClient, HttpEmbedClient, MockChatClient, MockEmbedder
from .labeling import extract_meta_action
from .retrieval import RetrievalConfig, top_k
from .scenes import (
    assign_split,
    index_by_id,
    load_manifest,
    resolve_image,
    save_manifest,
)
from .spatial_loss import batch_loss, load_samples
from .store import EmbeddingRecord, EmbeddingStore


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ragdrive",
        description="Retrieval-augmented meta-action decision engine",
    )
    parser.add_argument("--config", help="key=value config file")
    parser.add_argument("--seed", type=int, help="override config seed")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="validate a manifest, optionally assign splits")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", help="write the normalized manifest here")
    p.add_argument("--check-images", action="store_true")
    p.add_argument("--split-counts", help="finetune,database,test counts")

    p = sub.add_parser("label", help="extract gt_action from ego trajectories")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("render-bev", help="rasterize BEV images from annotations")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--manifest-out", help="write manifest with bev_image set")

    p = sub.add_parser("gen-vqa", help="generate the spatial-perception VQA dataset")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--max-per-scene", type=int, default=12)

    p = sub.add_parser("embed", help="build the embedding store from a manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--store", required=True)
    p.add_argument("--split", help="only embed scenes with this split tag")
    p.add_argument("--mock", action="store_true")

    p = sub.add_parser("retrieve", help="query the store with a front/BEV image pair")
    p.add_argument("--store", required=True)
    p.add_argument("--front", required=True)
    p.add_argument("--bev", required=True)
    p.add_argument("--omega", type=float)
    p.add_argument("--k", type=int)
    p.add_argument("--mock", action="store_true")

    p = sub.add_parser("decide", help="run the retrieval-augmented decision flow")
    p.add_argument("--manifest", required=True)
    p.add_argument("--store", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--split", help="only decide scenes with this split tag")
    p.add_argument("--omega", type=float)
    p.add_argument("--mock", action="store_true")

    p = sub.add_parser("evaluate", help="score traces against the labeled manifest")
    p.add_argument("--traces", required=True)
    p.add_argument("--manifest", required=True)
    p.add_argument("--weights", help="alpha,beta,gamma,delta")
    p.add_argument("--report", help="write the JSON report here")
    p.add_argument("--csv", help="write a flat CSV row here")

    p = sub.add_parser("loss-check", help="evaluate the composite loss on samples")
    p.add_argument("--samples", required=True)

    p = sub.add_parser("report", help="render a saved report as a CSV table row")
    p.add_argument("--report", required=True)
    p.add_argument("--label", default="")
    p.add_argument("--csv", help="write the row here instead of stdout")

    return parser


def _engine_config(args: argparse.Namespace) -> EngineConfig:
    cfg = load_config(args.config) if args.config else load_config()
    if args.seed is not None:
        cfg.seed = args.seed
    if getattr(args, "omega", None) is not None:
        cfg.omega = args.omega
    if getattr(args, "k", None) is not None:
        cfg.k = args.k
    if getattr(args, "weights", None):
        parts = [float(v) for v in args.weights.split(",")]
        if len(parts) != 4:
            raise EngineError("--weights expects alpha,beta,gamma,delta")
        cfg.weights = ScoreWeights(*parts)
    return cfg


def _embedder(args: argparse.Namespace, cfg: EngineConfig):
    if args.mock:
        return MockEmbedder(seed=cfg.seed)
    if not cfg.embed_endpoint:
        raise EngineError("no embed endpoint configured (use --mock or set one)")
    return HttpEmbedClient(cfg.embed_endpoint, timeout=cfg.timeout_s,
                           max_in_flight=cfg.parallelism)


def _chat(args: argparse.Namespace, cfg: EngineConfig):
    if args.mock:
        return MockChatClient()
    if not cfg.chat_endpoint:
        raise EngineError("no chat endpoint configured (use --mock or set one)")
    return HttpChatClient(cfg.chat_endpoint, timeout=cfg.timeout_s,
                          max_in_flight=cfg.parallelism)


def _cmd_ingest(args, cfg: EngineConfig) -> int:
    records = load_manifest(args.manifest, check_images=args.check_images)
    if args.split_counts:
        counts = tuple(int(v) for v in args.split_counts.split(","))
        if len(counts) != 3:
            raise EngineError("--split-counts expects finetune,database,test")
        records = assign_split(records, cfg.seed, counts)  # type: ignore[arg-type]
    if args.out:
        save_manifest(records, args.out)
    print(f"ingested {len(records)} scenes")
    return 0


def _cmd_label(args, cfg: EngineConfig) -> int:
    records = load_manifest(args.manifest)
    labeled = [r.with_label(extract_meta_action(r.ego_history, cfg.labeling))
               for r in records]
    save_manifest(labeled, args.out)
    print(f"labeled {len(labeled)} scenes")
    return 0


def _cmd_render_bev(args, cfg: EngineConfig) -> int:
    records = load_manifest(args.manifest)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest_dir = Path(args.manifest_out or args.manifest).resolve().parent
    updated = []
    for scene in records:
        path, _ = bev_mod.render_scene_to_file(scene, out_dir, cfg.bev)
        resolved = path.resolve()
        try:
            ref = str(resolved.relative_to(manifest_dir))
        except ValueError:
            ref = str(resolved)
        updated.append(scene.with_bev(ref))
    if args.manifest_out:
        save_manifest(updated, args.manifest_out)
    print(f"rendered {len(updated)} BEV images to {out_dir}")
    return 0


def _cmd_gen_vqa(args, cfg: EngineConfig) -> int:
    records = load_manifest(args.manifest)
    by_id = index_by_id(records)
    pairs = []
    for scene in records:
        pairs.extend(vqa_mod.gen_vqa_pairs(scene, seed=cfg.seed,
                                           max_pairs=args.max_per_scene))
    n = vqa_mod.write_vqa_jsonl(pairs, by_id, args.out, cfg.bev)
    print(f"wrote {n} VQA pairs")
    return 0


def _scene_image_bytes(base: Path, scene, what: str) -> bytes:
    path = scene.front_image if what == "front" else scene.bev_image
    if not path:
        raise MissingImageError(f"scene {scene.scene_id!r}: no {what} image")
    resolved = resolve_image(base, path)
    if not resolved.exists():
        raise MissingImageError(f"scene {scene.scene_id!r}: missing {what} image {resolved}")
    return resolved.read_bytes()


def _cmd_embed(args, cfg: EngineConfig) -> int:
    records = load_manifest(args.manifest)
    if args.split:
        records = [r for r in records if r.split == args.split]
    base = Path(args.manifest).parent
    embedder = _embedder(args, cfg)
    store = EmbeddingStore()
    for scene in records:
        v_fv = embedder.embed(_scene_image_bytes(base, scene, "front"), "front_view")
        v_bev = embedder.embed(_scene_image_bytes(base, scene, "bev"), "bev")
        store.put(EmbeddingRecord(scene_id=scene.scene_id, v_fv=v_fv, v_bev=v_bev))
    store.persist(args.store)
    print(f"embedded {len(store)} scenes into {args.store}")
    return 0


def _cmd_retrieve(args, cfg: EngineConfig) -> int:
    store = EmbeddingStore.open(args.store)
    embedder = _embedder(args, cfg)
    front = Path(args.front).read_bytes()
    bev = Path(args.bev).read_bytes()
    hits = top_k(
        embedder.embed(front, "front_view"),
        embedder.embed(bev, "bev"),
        store,
        RetrievalConfig(omega=cfg.omega, k=cfg.k),
    )
    print(json.dumps(
        [
            {
                "scene_id": h.scene_id, "rank": h.rank, "sim_fv": h.sim_fv,
                "sim_bev": h.sim_bev, "sim_overall": h.sim_overall,
            }
            for h in hits
        ],
        indent=2,
    ))
    return 0


def _cmd_decide(args, cfg: EngineConfig) -> int:
    records = load_manifest(args.manifest)
    by_id = index_by_id(records)
    queries = [r for r in records if r.split == args.split] if args.split else records
    store = EmbeddingStore.open(args.store)
    traces = decide_batch(
        queries, by_id, store,
        _embedder(args, cfg), _chat(args, cfg),
        DecisionConfig(retrieval=RetrievalConfig(omega=cfg.omega, k=1),
                       max_in_flight=cfg.parallelism),
        image_base=Path(args.manifest).parent,
    )
    with open(args.out, "w", encoding="utf-8") as fh:
        for trace in traces:
            fh.write(json.dumps(trace.to_dict(), sort_keys=True))
            fh.write("\n")
    failures = sum(1 for t in traces if t.parsed_action is None)
    print(f"decided {len(traces)} scenes ({failures} parse failures) -> {args.out}")
    return 0


def _cmd_evaluate(args, cfg: EngineConfig) -> int:
    traces = [
        json.loads(line)
        for line in Path(args.traces).read_text(encoding="utf-8").splitlines()
        if line.strip()
    ]
    records = load_manifest(args.manifest)
    gt = {r.scene_id: r.gt_action for r in records if r.gt_action is not None}
    pairs = pairs_from_traces(traces, gt)
    report = evaluate(pairs, cfg.weights)
    text = report.to_json()
    if args.report:
        Path(args.report).write_text(text, encoding="utf-8")
    if args.csv:
        Path(args.csv).write_text(report.to_csv_row(), encoding="utf-8")
    sys.stdout.write(text)
    return 0


def _cmd_loss_check(args, cfg: EngineConfig) -> int:
    samples = load_samples(args.samples)
    print(f"{batch_loss(samples):.6f}")
    return 0


def _cmd_report(args, cfg: EngineConfig) -> int:
    data = json.loads(Path(args.report).read_text(encoding="utf-8"))
    header = ["label", "n_total", "n_match", "k", "exact_match_accuracy",
              "macro_f1", "weighted_f1", "partial_match_score", "overall_score"]
    row = [args.label, str(data["n_total"]), str(data["n_match"]), str(data["k"])] + [
        f"{data[name]:.6f}" for name in header[4:]
    ]
    text = ",".join(header) + "\n" + ",".join(row) + "\n"
    if args.csv:
        Path(args.csv).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


_COMMANDS = {
    "ingest": _cmd_ingest,
    "label": _cmd_label,
    "render-bev": _cmd_render_bev,
    "gen-vqa": _cmd_gen_vqa,
    "embed": _cmd_embed,
    "retrieve": _cmd_retrieve,
    "decide": _cmd_decide,
    "evaluate": _cmd_evaluate,
    "loss-check": _cmd_loss_check,
    "report": _cmd_report,
}


def run(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _engine_config(args)
        return _COMMANDS[args.command](args, cfg)
    except (EngineError, OSError, ValueError) as exc:
        line = json.dumps({"error": type(exc).__name__, "message": str(exc)})
        print(line, file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
