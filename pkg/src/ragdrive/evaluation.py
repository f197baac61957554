"""The metric suite over (ground truth, prediction) pairs.

Exact-match accuracy, per-action precision/recall/F1, macro and weighted
F1, the partial-match score built on the semantic groups, and the weighted
composite overall score. Counts are integers and every ratio metric is
computed with exact rational arithmetic (fractions.Fraction), converted to
float only at the report boundary; the composite blend is plain float
arithmetic. Zero denominators yield 0. A prediction of None marks a
parse-failure and counts as wrong everywhere.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import EmptyInputError, ParseError
from .taxonomy import ALL_ACTIONS, MetaAction, semantic_similarity


@dataclass(frozen=True)
class PredictionPair:
    scene_id: str
    gt: MetaAction
    pred: MetaAction | None  # None = parse-failure


@dataclass(frozen=True)
class ScoreWeights:
    alpha: float = 0.4   # exact-match accuracy
    beta: float = 0.2    # macro F1
    gamma: float = 0.2   # weighted F1
    delta: float = 0.2   # partial-match score

    def __post_init__(self):
        for name in ("alpha", "beta", "gamma", "delta"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")


@dataclass
class ConfusionCounts:
    tp: dict[MetaAction, int] = field(default_factory=dict)
    fp: dict[MetaAction, int] = field(default_factory=dict)
    fn: dict[MetaAction, int] = field(default_factory=dict)

    @classmethod
    def from_pairs(cls, pairs: Sequence[PredictionPair]) -> "ConfusionCounts":
        counts = cls(
            tp={a: 0 for a in ALL_ACTIONS},
            fp={a: 0 for a in ALL_ACTIONS},
            fn={a: 0 for a in ALL_ACTIONS},
        )
        for pair in pairs:
            if pair.pred is pair.gt:
                counts.tp[pair.gt] += 1
            else:
                counts.fn[pair.gt] += 1
                if pair.pred is not None:
                    counts.fp[pair.pred] += 1
        return counts

    def support(self, action: MetaAction) -> int:
        return self.tp[action] + self.fn[action]


def _ratio(num: int, den: int) -> Fraction:
    return Fraction(num, den) if den else Fraction(0)


def exact_match_accuracy(pairs: Sequence[PredictionPair]) -> float:
    if not pairs:
        raise EmptyInputError("no pairs")
    return float(_exact_match_fraction(pairs))


def _exact_match_fraction(pairs: Sequence[PredictionPair]) -> Fraction:
    n_match = sum(1 for p in pairs if p.pred is p.gt)
    return _ratio(n_match, len(pairs))


def per_action_prf(
    counts: ConfusionCounts,
) -> dict[MetaAction, tuple[float, float, float]]:
    return {
        a: tuple(map(float, _prf_fractions(counts, a))) for a in ALL_ACTIONS
    }


def _prf_fractions(
    counts: ConfusionCounts, action: MetaAction
) -> tuple[Fraction, Fraction, Fraction]:
    tp, fp, fn = counts.tp[action], counts.fp[action], counts.fn[action]
    precision = _ratio(tp, tp + fp)
    recall = _ratio(tp, tp + fn)
    if precision + recall == 0:
        f1 = Fraction(0)
    else:
        f1 = 2 * precision * recall / (precision + recall)
    return precision, recall, f1


def macro_f1(f1_by_action: dict[MetaAction, Fraction | float], k: int) -> float:
    """Unweighted mean F1 over all k taxonomy classes (absent classes score 0)."""
    return float(sum((Fraction(v) for v in f1_by_action.values()), Fraction(0)) / k)


def weighted_f1(
    f1_by_action: dict[MetaAction, Fraction | float],
    support: dict[MetaAction, int],
    n_total: int,
) -> float:
    """Support-weighted mean F1 over the ground-truth distribution."""
    acc = sum(
        (support.get(a, 0) * Fraction(v) for a, v in f1_by_action.items()),
        Fraction(0),
    )
    return float(_fraction_div(acc, n_total))


def _fraction_div(num: Fraction, den: int) -> Fraction:
    return num / den if den else Fraction(0)


def partial_match_score(pairs: Sequence[PredictionPair]) -> float:
    if not pairs:
        raise EmptyInputError("no pairs")
    return float(_partial_match_fraction(pairs))


def _partial_match_fraction(pairs: Sequence[PredictionPair]) -> Fraction:
    total = Fraction(0)
    for p in pairs:
        if p.pred is None:
            continue
        # semantic_similarity returns 0.0, 0.5 or 1.0, all exact in binary
        total += Fraction(semantic_similarity(p.gt, p.pred))
    return total / len(pairs)


def overall_score(
    ema: float, macro: float, weighted: float, pms: float,
    weights: ScoreWeights | None = None,
) -> float:
    w = weights or ScoreWeights()
    return w.alpha * ema + w.beta * macro + w.gamma * weighted + w.delta * pms


@dataclass(frozen=True)
class EvalReport:
    n_total: int
    n_match: int
    k: int
    exact_match_accuracy: float
    macro_f1: float
    weighted_f1: float
    partial_match_score: float
    overall_score: float
    weights: ScoreWeights
    per_action: dict[str, dict[str, float]]  # label -> precision/recall/f1/support

    HEADLINE = (
        "exact_match_accuracy", "macro_f1", "weighted_f1",
        "partial_match_score", "overall_score",
    )

    def to_json(self) -> str:
        data = {
            "n_total": self.n_total,
            "n_match": self.n_match,
            "k": self.k,
            "exact_match_accuracy": self.exact_match_accuracy,
            "macro_f1": self.macro_f1,
            "weighted_f1": self.weighted_f1,
            "partial_match_score": self.partial_match_score,
            "overall_score": self.overall_score,
            "weights": {
                "alpha": self.weights.alpha, "beta": self.weights.beta,
                "gamma": self.weights.gamma, "delta": self.weights.delta,
            },
            "per_action": self.per_action,
        }
        return json.dumps(data, indent=2, sort_keys=True) + "\n"

    def to_csv_row(self, label: str = "") -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["label", "n_total", "n_match", "k", *self.HEADLINE])
        writer.writerow(
            [label, self.n_total, self.n_match, self.k]
            + [f"{getattr(self, name):.6f}" for name in self.HEADLINE]
        )
        return buf.getvalue()


def evaluate(
    pairs: Sequence[PredictionPair],
    weights: ScoreWeights | None = None,
    k: int | None = None,
) -> EvalReport:
    """Single pass over the pairs producing every metric.

    k is the class count used by macro averaging; it defaults to the full
    16-action taxonomy and is recorded in the report.
    """
    if not pairs:
        raise EmptyInputError("no pairs")
    weights = weights or ScoreWeights()
    k = k or len(ALL_ACTIONS)
    counts = ConfusionCounts.from_pairs(pairs)
    f1s: dict[MetaAction, Fraction] = {}
    per_action: dict[str, dict[str, float]] = {}
    for action in ALL_ACTIONS:
        precision, recall, f1 = _prf_fractions(counts, action)
        f1s[action] = f1
        per_action[action.value] = {
            "precision": float(precision),
            "recall": float(recall),
            "f1": float(f1),
            "support": counts.support(action),
            "tp": counts.tp[action],
            "fp": counts.fp[action],
            "fn": counts.fn[action],
        }
    ema = float(_exact_match_fraction(pairs))
    macro = macro_f1(f1s, k)
    support = {a: counts.support(a) for a in ALL_ACTIONS}
    weighted = weighted_f1(f1s, support, len(pairs))
    pms = float(_partial_match_fraction(pairs))
    return EvalReport(
        n_total=len(pairs),
        n_match=sum(counts.tp.values()),
        k=k,
        exact_match_accuracy=ema,
        macro_f1=macro,
        weighted_f1=weighted,
        partial_match_score=pms,
        overall_score=overall_score(ema, macro, weighted, pms, weights),
        weights=weights,
        per_action=per_action,
    )


def pairs_from_traces(
    traces: Iterable[dict], gt_by_scene: dict[str, MetaAction]
) -> list[PredictionPair]:
    """Join decision traces with labeled scenes into prediction pairs."""
    pairs: list[PredictionPair] = []
    for trace in traces:
        scene_id = trace["scene_id"]
        if scene_id not in gt_by_scene:
            raise ParseError(f"trace scene {scene_id!r} has no labeled scene")
        raw = trace.get("parsed_action")
        pred = MetaAction(raw) if raw else None
        pairs.append(PredictionPair(scene_id=scene_id, gt=gt_by_scene[scene_id], pred=pred))
    return pairs
