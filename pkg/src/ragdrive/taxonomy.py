"""The closed meta-action vocabulary, its semantic groups, and text parsing.

Sixteen discrete driving decisions, partitioned into five semantic groups.
The groups drive partial-credit scoring: two different actions from the
same non-unique group count as a half match.
"""

from __future__ import annotations

import re
from enum import Enum
from importlib import resources
from pathlib import Path

from .errors import AmbiguousMatchError, NoMatchError, ParseError


class MetaAction(str, Enum):
    SPEED_UP = "speed_up"
    SPEED_UP_RAPIDLY = "speed_up_rapidly"
    SLOW_DOWN = "slow_down"
    SLOW_DOWN_RAPIDLY = "slow_down_rapidly"
    TURN_LEFT = "turn_left"
    TURN_RIGHT = "turn_right"
    DRIVE_ALONG_CURVE = "drive_along_curve"
    TURN_AROUND = "turn_around"
    CHANGE_LANE_LEFT = "change_lane_left"
    CHANGE_LANE_RIGHT = "change_lane_right"
    REVERSE = "reverse"
    SHIFT_SLIGHTLY_LEFT = "shift_slightly_left"
    SHIFT_SLIGHTLY_RIGHT = "shift_slightly_right"
    STOP = "stop"
    GO_STRAIGHT_CONSTANTLY = "go_straight_constantly"
    GO_STRAIGHT_SLOWLY = "go_straight_slowly"


class SemanticGroup(str, Enum):
    LEFT = "left"
    RIGHT = "right"
    DECELERATION = "deceleration"
    ACCELERATION = "acceleration"
    UNIQUE = "unique"


_GROUPS: dict[MetaAction, SemanticGroup] = {
    MetaAction.TURN_LEFT: SemanticGroup.LEFT,
    MetaAction.CHANGE_LANE_LEFT: SemanticGroup.LEFT,
    MetaAction.SHIFT_SLIGHTLY_LEFT: SemanticGroup.LEFT,
    MetaAction.TURN_RIGHT: SemanticGroup.RIGHT,
    MetaAction.CHANGE_LANE_RIGHT: SemanticGroup.RIGHT,
    MetaAction.SHIFT_SLIGHTLY_RIGHT: SemanticGroup.RIGHT,
    MetaAction.GO_STRAIGHT_SLOWLY: SemanticGroup.DECELERATION,
    MetaAction.SLOW_DOWN: SemanticGroup.DECELERATION,
    MetaAction.SLOW_DOWN_RAPIDLY: SemanticGroup.DECELERATION,
    MetaAction.SPEED_UP: SemanticGroup.ACCELERATION,
    MetaAction.SPEED_UP_RAPIDLY: SemanticGroup.ACCELERATION,
    MetaAction.GO_STRAIGHT_CONSTANTLY: SemanticGroup.UNIQUE,
    MetaAction.TURN_AROUND: SemanticGroup.UNIQUE,
    MetaAction.REVERSE: SemanticGroup.UNIQUE,
    MetaAction.STOP: SemanticGroup.UNIQUE,
    MetaAction.DRIVE_ALONG_CURVE: SemanticGroup.UNIQUE,
}

# Canonical surface phrase per action, used both for parsing model output and
# for enumerating the answer vocabulary in prompts.
CANONICAL_PHRASES: dict[MetaAction, str] = {
    MetaAction.SPEED_UP: "speed up",
    MetaAction.SPEED_UP_RAPIDLY: "speed up rapidly",
    MetaAction.SLOW_DOWN: "slow down",
    MetaAction.SLOW_DOWN_RAPIDLY: "slow down rapidly",
    MetaAction.TURN_LEFT: "turn left",
    MetaAction.TURN_RIGHT: "turn right",
    MetaAction.DRIVE_ALONG_CURVE: "drive along the curve",
    MetaAction.TURN_AROUND: "turn around",
    MetaAction.CHANGE_LANE_LEFT: "change lane to the left",
    MetaAction.CHANGE_LANE_RIGHT: "change lane to the right",
    MetaAction.REVERSE: "reverse",
    MetaAction.SHIFT_SLIGHTLY_LEFT: "shift slightly to the left",
    MetaAction.SHIFT_SLIGHTLY_RIGHT: "shift slightly to the right",
    MetaAction.STOP: "stop",
    MetaAction.GO_STRAIGHT_CONSTANTLY: "go straight constantly",
    MetaAction.GO_STRAIGHT_SLOWLY: "go straight slowly",
}

ALL_ACTIONS: tuple[MetaAction, ...] = tuple(MetaAction)


def group_of(action: MetaAction) -> SemanticGroup:
    """Return the unique semantic group containing `action`."""
    return _GROUPS[action]


def members_of(group: SemanticGroup) -> tuple[MetaAction, ...]:
    return tuple(a for a in ALL_ACTIONS if _GROUPS[a] is group)


def semantic_similarity(gt: MetaAction, pred: MetaAction) -> float:
    """Partial-credit similarity: 1 if equal, 0.5 if same non-unique group, else 0."""
    if gt is pred:
        return 1.0
    g = _GROUPS[gt]
    if g is _GROUPS[pred] and g is not SemanticGroup.UNIQUE:
        return 0.5
    return 0.0


# --- phrase table and parsing -------------------------------------------------

_WORD_RE = re.compile(r"[a-z0-9]+")


def _tokens(text: str) -> list[str]:
    """Lowercase, strip punctuation, split into word tokens."""
    return _WORD_RE.findall(text.lower())


class PhraseTable:
    """Maps word-token phrases to actions; the parsing vocabulary.

    The table always contains every canonical phrase; additional synonym
    phrases may be layered on from a file (one `label<TAB>phrase` per line).
    """

    def __init__(self, extra: dict[str, MetaAction] | None = None):
        self._phrases: dict[tuple[str, ...], MetaAction] = {}
        for action, phrase in CANONICAL_PHRASES.items():
            self.add(phrase, action)
        for phrase, action in (extra or {}).items():
            self.add(phrase, action)

    def add(self, phrase: str, action: MetaAction) -> None:
        toks = tuple(_tokens(phrase))
        if not toks:
            raise ParseError(f"empty phrase for action {action.value!r}")
        existing = self._phrases.get(toks)
        if existing is not None and existing is not action:
            raise ParseError(
                f"phrase {phrase!r} already mapped to {existing.value!r}"
            )
        self._phrases[toks] = action

    def phrases(self) -> dict[tuple[str, ...], MetaAction]:
        return dict(self._phrases)

    @classmethod
    def from_file(cls, path: str | Path) -> "PhraseTable":
        """Load `label<TAB>phrase` lines on top of the canonical phrases."""
        table = cls()
        for lineno, raw in enumerate(
            Path(path).read_text(encoding="utf-8").splitlines(), start=1
        ):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "\t" not in line:
                raise ParseError(f"{path}:{lineno}: expected 'label<TAB>phrase'")
            label, phrase = line.split("\t", 1)
            try:
                action = MetaAction(label.strip())
            except ValueError:
                raise ParseError(f"{path}:{lineno}: unknown label {label!r}") from None
            table.add(phrase, action)
        return table


def _default_table() -> PhraseTable:
    global _DEFAULT_TABLE
    if _DEFAULT_TABLE is None:
        ref = resources.files("ragdrive").joinpath("data/phrases.tsv")
        table = PhraseTable()
        for lineno, raw in enumerate(ref.read_text(encoding="utf-8").splitlines(), 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            label, phrase = line.split("\t", 1)
            table.add(phrase, MetaAction(label.strip()))
        _DEFAULT_TABLE = table
    return _DEFAULT_TABLE


_DEFAULT_TABLE: PhraseTable | None = None


def parse_meta_action(text: str, table: PhraseTable | None = None) -> MetaAction:
    """Extract the single meta-action named in free-form model output.

    Matching is case-insensitive and punctuation-blind. When one matched
    phrase contains another ("speed up rapidly" contains "speed up") the
    longest span wins. Matches that are not nested within one another and
    name different actions make the text ambiguous.

    Raises NoMatchError / AmbiguousMatchError accordingly.
    """
    if not text or not text.strip():
        raise NoMatchError("empty text")
    table = table or _default_table()
    toks = _tokens(text)

    spans: list[tuple[int, int, MetaAction]] = []  # [start, end) token spans
    for phrase, action in table.phrases().items():
        n = len(phrase)
        for i in range(len(toks) - n + 1):
            if tuple(toks[i : i + n]) == phrase:
                spans.append((i, i + n, action))
    if not spans:
        raise NoMatchError(f"no meta-action phrase in {text!r}")

    # Keep only maximal spans: drop any span contained in a longer match.
    maximal = [
        (s, e, a)
        for (s, e, a) in spans
        if not any(
            (s2 <= s and e <= e2) and (s2, e2) != (s, e) for (s2, e2, _) in spans
        )
    ]
    actions = {a for _, _, a in maximal}
    if len(actions) > 1:
        names = sorted(a.value for a in actions)
        raise AmbiguousMatchError(f"multiple actions named in {text!r}: {names}")
    return actions.pop()
