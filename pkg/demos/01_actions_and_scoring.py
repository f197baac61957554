"""Meta-action vocabulary, free-text parsing, and the metric suite.

Run: python demos/01_actions_and_scoring.py
"""

from ragdrive import (
    ALL_ACTIONS,
    CANONICAL_PHRASES,
    MetaAction,
    PredictionPair,
    evaluate,
    group_of,
    parse_meta_action,
    semantic_similarity,
)

# The sixteen discrete maneuvers, partitioned into five semantic groups.
print("vocabulary:")
for action in ALL_ACTIONS:
    print(f"  {action.value:24s} group={group_of(action).value:12s} "
          f'phrase="{CANONICAL_PHRASES[action]}"')

# Parsing is case- and punctuation-insensitive, longest phrase wins.
for text in ["Change lane to the left.", "I would SPEED UP rapidly here",
             "Go straight at constant speed"]:
    print(f"parse({text!r}) -> {parse_meta_action(text).value}")

# Partial credit: same non-unique group scores 0.5.
pairs_of_interest = [
    (MetaAction.TURN_LEFT, MetaAction.TURN_LEFT),
    (MetaAction.TURN_LEFT, MetaAction.SHIFT_SLIGHTLY_LEFT),
    (MetaAction.STOP, MetaAction.REVERSE),
]
for gt, pred in pairs_of_interest:
    print(f"S({gt.value}, {pred.value}) = {semantic_similarity(gt, pred)}")

# The full metric suite over a toy prediction set with one parse failure.
pairs = [
    PredictionPair("a", MetaAction.STOP, MetaAction.STOP),
    PredictionPair("b", MetaAction.TURN_LEFT, MetaAction.CHANGE_LANE_LEFT),
    PredictionPair("c", MetaAction.SPEED_UP, MetaAction.SLOW_DOWN),
    PredictionPair("d", MetaAction.REVERSE, None),  # model output unparseable
]
report = evaluate(pairs)
print(f"\nexact match {report.exact_match_accuracy:.4f}  "
      f"macro F1 {report.macro_f1:.4f}  weighted F1 {report.weighted_f1:.4f}  "
      f"partial match {report.partial_match_score:.4f}  "
      f"overall {report.overall_score:.4f}")
