"""Retrieval-augmented meta-action decision engine for driving scenes.

A scene (front camera image + bird's-eye-view raster) is embedded, the
most similar stored scene retrieved by weighted cosine similarity, and a
vision-language model is prompted with the exemplar and its ground-truth
maneuver to choose one of sixteen discrete meta-actions. The package also
ships the data side: trajectory labeling, BEV rasterization, VQA dataset
generation, the composite spatial-perception loss, and the full metric
suite (exact match, macro/weighted F1, partial match, overall score).
"""

from .taxonomy import (
    ALL_ACTIONS,
    CANONICAL_PHRASES,
    MetaAction,
    SemanticGroup,
    group_of,
    parse_meta_action,
    semantic_similarity,
)
from .scenes import (
    EgoPose,
    ObjectAnnotation,
    SceneRecord,
    assign_split,
    load_manifest,
    save_manifest,
)
from .labeling import LabelingConfig, extract_meta_action
from .bev import BevConfig, BevRender, BevTransform, render_bev
from .vqa import VqaPair, gen_vqa_pairs, write_vqa_jsonl
from .spatial_loss import SpatialSample, batch_loss
from .store import EmbeddingRecord, EmbeddingStore, concat, decompose
from .retrieval import (
    RetrievalConfig,
    RetrievalHit,
    blended_similarity,
    cosine,
    top_k,
)
from .gateway import (
    ChatRequest,
    HttpChatClient,
    HttpEmbedClient,
    MessagePart,
    MockChatClient,
    MockEmbedder,
)
from .decision import DecisionConfig, DecisionTrace, PromptBundle, build_prompts, decide
from .evaluation import (
    EvalReport,
    PredictionPair,
    ScoreWeights,
    evaluate,
    exact_match_accuracy,
    overall_score,
    partial_match_score,
)

__version__ = "0.1.0"
