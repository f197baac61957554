from __future__ import annotations

import itertools

import pytest

from ragdrive.errors import AmbiguousMatchError, NoMatchError, ParseError
from ragdrive.taxonomy import (
    ALL_ACTIONS,
    CANONICAL_PHRASES,
    MetaAction,
    PhraseTable,
    SemanticGroup,
    group_of,
    members_of,
    parse_meta_action,
    semantic_similarity,
)


def test_sixteen_distinct_labels():
    assert len(ALL_ACTIONS) == 16
    assert len({a.value for a in ALL_ACTIONS}) == 16


def test_groups_partition_the_labels():
    seen = []
    for group in SemanticGroup:
        seen.extend(members_of(group))
    assert sorted(a.value for a in seen) == sorted(a.value for a in ALL_ACTIONS)
    assert len(seen) == 16


def test_group_membership():
    assert set(members_of(SemanticGroup.LEFT)) == {
        MetaAction.TURN_LEFT,
        MetaAction.CHANGE_LANE_LEFT,
        MetaAction.SHIFT_SLIGHTLY_LEFT,
    }
    assert set(members_of(SemanticGroup.RIGHT)) == {
        MetaAction.TURN_RIGHT,
        MetaAction.CHANGE_LANE_RIGHT,
        MetaAction.SHIFT_SLIGHTLY_RIGHT,
    }
    assert set(members_of(SemanticGroup.DECELERATION)) == {
        MetaAction.GO_STRAIGHT_SLOWLY,
        MetaAction.SLOW_DOWN,
        MetaAction.SLOW_DOWN_RAPIDLY,
    }
    assert set(members_of(SemanticGroup.ACCELERATION)) == {
        MetaAction.SPEED_UP,
        MetaAction.SPEED_UP_RAPIDLY,
    }
    assert set(members_of(SemanticGroup.UNIQUE)) == {
        MetaAction.GO_STRAIGHT_CONSTANTLY,
        MetaAction.TURN_AROUND,
        MetaAction.REVERSE,
        MetaAction.STOP,
        MetaAction.DRIVE_ALONG_CURVE,
    }


@pytest.mark.parametrize(
    "action,group",
    [
        (MetaAction.TURN_LEFT, SemanticGroup.LEFT),
        (MetaAction.SLOW_DOWN_RAPIDLY, SemanticGroup.DECELERATION),
        (MetaAction.STOP, SemanticGroup.UNIQUE),
    ],
)
def test_group_of_examples(action, group):
    assert group_of(action) is group


@pytest.mark.parametrize(
    "gt,pred,score",
    [
        (MetaAction.TURN_LEFT, MetaAction.TURN_LEFT, 1.0),
        (MetaAction.TURN_LEFT, MetaAction.SHIFT_SLIGHTLY_LEFT, 0.5),
        (MetaAction.STOP, MetaAction.REVERSE, 0.0),  # unique group never half-matches
    ],
)
def test_similarity_examples(gt, pred, score):
    assert semantic_similarity(gt, pred) == score


def test_similarity_symmetric_and_diagonal():
    for a, b in itertools.product(ALL_ACTIONS, repeat=2):
        assert semantic_similarity(a, b) == semantic_similarity(b, a)
    for a in ALL_ACTIONS:
        assert semantic_similarity(a, a) == 1.0


def test_half_score_iff_shared_non_unique_group():
    for a, b in itertools.product(ALL_ACTIONS, repeat=2):
        s = semantic_similarity(a, b)
        expect_half = (
            a is not b
            and group_of(a) is group_of(b)
            and group_of(a) is not SemanticGroup.UNIQUE
        )
        assert (s == 0.5) == expect_half


@pytest.mark.parametrize("action", ALL_ACTIONS)
def test_parse_canonical_round_trip(action):
    assert parse_meta_action(CANONICAL_PHRASES[action]) is action


@pytest.mark.parametrize(
    "text,expected",
    [
        ("Change lane to the left.", MetaAction.CHANGE_LANE_LEFT),
        ("turn left", MetaAction.TURN_LEFT),
        ("I would SPEED UP RAPIDLY here!", MetaAction.SPEED_UP_RAPIDLY),
        ("The car should slow down now.", MetaAction.SLOW_DOWN),
        ("Go straight at constant speed", MetaAction.GO_STRAIGHT_CONSTANTLY),
        ("make a U-turn", MetaAction.TURN_AROUND),
    ],
)
def test_parse_examples(text, expected):
    assert parse_meta_action(text) is expected


def test_parse_longest_match_wins_on_nested_phrases():
    # "speed up rapidly" contains "speed up"; the longer span decides
    assert parse_meta_action("speed up rapidly") is MetaAction.SPEED_UP_RAPIDLY
    assert parse_meta_action("slow down rapidly please") is MetaAction.SLOW_DOWN_RAPIDLY


def test_parse_no_match():
    with pytest.raises(NoMatchError):
        parse_meta_action("accelerate hard")
    with pytest.raises(NoMatchError):
        parse_meta_action("   ")


def test_parse_ambiguous_on_disjoint_actions():
    with pytest.raises(AmbiguousMatchError):
        parse_meta_action("turn left then stop")


def test_parse_repeated_same_action_is_fine():
    assert parse_meta_action("stop. I said stop!") is MetaAction.STOP


def test_parse_word_boundaries():
    # 'stopped' and 'unstoppable' must not match 'stop'
    with pytest.raises(NoMatchError):
        parse_meta_action("the vehicle has stopped and is unstoppable")


def test_parse_survives_filler_context():
    import random

    filler = ["please", "i", "think", "we", "should", "now", "carefully",
              "then", "maybe", "here"]
    rng = random.Random(7)
    for action in ALL_ACTIONS:
        for _ in range(10):
            before = rng.sample(filler, rng.randint(0, 4))
            after = rng.sample(filler, rng.randint(0, 4))
            text = " ".join(before + [CANONICAL_PHRASES[action]] + after)
            assert parse_meta_action(text) is action, text


def test_phrase_table_file_round_trip(tmp_path):
    path = tmp_path / "phrases.tsv"
    path.write_text(
        "# comment line\n"
        "turn_left\thang a left\n"
        "stop\tcome to a halt\n",
        encoding="utf-8",
    )
    table = PhraseTable.from_file(path)
    assert parse_meta_action("please hang a left", table) is MetaAction.TURN_LEFT
    assert parse_meta_action("come to a halt", table) is MetaAction.STOP
    # canonical phrases still present
    assert parse_meta_action("reverse", table) is MetaAction.REVERSE


def test_phrase_table_rejects_bad_lines(tmp_path):
    bad = tmp_path / "bad.tsv"
    bad.write_text("not_a_label\tover there\n", encoding="utf-8")
    with pytest.raises(ParseError):
        PhraseTable.from_file(bad)
    missing_tab = tmp_path / "tabless.tsv"
    missing_tab.write_text("turn_left no tab here\n", encoding="utf-8")
    with pytest.raises(ParseError):
        PhraseTable.from_file(missing_tab)


def test_phrase_table_conflicting_mapping_rejected():
    table = PhraseTable()
    with pytest.raises(ParseError):
        table.add("turn left", MetaAction.TURN_RIGHT)
