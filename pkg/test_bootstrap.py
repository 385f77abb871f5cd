import inspect

import numpy as np
import pytest

from affectlog.bootstrap import bootstrap_round, run_bootstrap, story_table
from affectlog.config import BOOTSTRAP_NEG, BOOTSTRAP_POS, AppConfig
from affectlog.corpus import Polarity
from affectlog.errors import PreconditionError, SeedError
from affectlog.patterns import unit_keys
from affectlog.stats import ThresholdParams, classify_keys
from conftest import story

POS, NEG, UNL = Polarity.POS, Polarity.NEG, Polarity.UNLABELED

HAPPY = [("swim", None, False), ("dance", None, False), ("laugh", None, False)]
SAD = [("cry", None, False), ("argue", None, False), ("lose", "job", False), ("sleep", None, True)]


def _seed():
    pos = [story(f"p{i}", POS, HAPPY + [("walk", None, False)]) for i in range(10)]
    neg = [story(f"n{i}", NEG, SAD + [("walk", None, False)]) for i in range(10)]
    return pos + neg


def test_default_thresholds():
    assert BOOTSTRAP_POS == ThresholdParams(theta_f=10, theta_p=0.7, theta_n=3)
    assert BOOTSTRAP_NEG == ThresholdParams(theta_f=10, theta_p=0.85, theta_n=4)
    params = inspect.signature(bootstrap_round).parameters
    assert params["pos"].default == BOOTSTRAP_POS
    assert params["neg"].default == BOOTSTRAP_NEG
    app = AppConfig()
    assert (app.bootstrap.pos, app.bootstrap.neg, app.bootstrap.max_rounds) == (BOOTSTRAP_POS, BOOTSTRAP_NEG, 1)


def test_planted_positive_stories_are_exactly_the_ones_labeled():
    planted = [story(f"u{i}", UNL, HAPPY + [("eat", "cake", False)]) for i in range(5)]
    distractors = [
        story("x1", UNL, [("swim", None, False), ("juggle", None, False)]),
        story("x2", UNL, HAPPY + SAD),
        story("x3", UNL, [("cry", None, False), ("argue", None, False)]),
        story("x4", UNL, [("walk", None, False)]),
        story("x5", UNL, [("paint", "fence", False)]),
    ]
    unlabeled = planted[:2] + distractors + planted[2:]
    labeled, remaining = bootstrap_round(_seed(), unlabeled)
    assert [d.doc_id for d in labeled] == [f"u{i}" for i in range(5)]
    assert all(d.label is POS for d in labeled)
    assert [d.doc_id for d in remaining] == [d.doc_id for d in distractors]


def test_negative_stories_need_four_hits():
    unlabeled = [
        story("four", UNL, SAD),
        story("three", UNL, [("cry", None, False), ("argue", None, False), ("sleep", None, True)]),
    ]
    labeled, remaining = bootstrap_round(_seed(), unlabeled)
    assert [(d.doc_id, d.label) for d in labeled] == [("four", NEG)]
    assert [d.doc_id for d in remaining] == ["three"]


def test_zero_overlap_labels_nothing():
    unlabeled = [story(f"z{i}", UNL, [("paint", "fence", False), ("juggle", None, False)]) for i in range(4)]
    labeled, remaining = bootstrap_round(_seed(), unlabeled)
    assert labeled == []
    assert remaining == unlabeled


def test_labeled_stories_reclassify_consistently():
    seed = _seed()
    unlabeled = [story("a", UNL, HAPPY), story("b", UNL, SAD), story("c", UNL, HAPPY[:1])]
    table = story_table(seed)
    labeled, _ = bootstrap_round(seed, unlabeled)
    assert labeled
    for doc in labeled:
        assert classify_keys(unit_keys(doc), table, BOOTSTRAP_POS, BOOTSTRAP_NEG) is doc.label


@pytest.mark.parametrize("seed,match", [
    ([], "empty"),
    ([story("p", POS, HAPPY)], "both classes"),
    ([story("p", POS, HAPPY), story("n", NEG, SAD), story("u", UNL, HAPPY)], "seed stories must be pos or neg"),
])
def test_bad_seed(seed, match):
    with pytest.raises(SeedError, match=match):
        bootstrap_round(seed, [])


def test_two_round_trace():
    loose = ThresholdParams(theta_f=2, theta_p=0.7, theta_n=1)
    seed = [
        story("s1", POS, [("swim", None, False)]),
        story("s2", POS, [("swim", None, False)]),
        story("t1", NEG, [("cry", None, False)]),
        story("t2", NEG, [("cry", None, False)]),
    ]
    unlabeled = [
        story("u1", UNL, [("swim", None, False), ("dance", None, False)]),
        story("u2", UNL, [("dance", None, False)]),
        story("u3", UNL, [("juggle", None, False)]),
        story("u4", UNL, [("swim", None, False), ("dance", None, False)]),
    ]
    one = run_bootstrap(seed, unlabeled, loose, loose, max_rounds=1)
    assert [d.doc_id for d in one] == ["s1", "s2", "t1", "t2", "u1", "u4"]

    full = run_bootstrap(seed, unlabeled, loose, loose, max_rounds=5)
    assert [(d.doc_id, d.label) for d in full[len(seed):]] == [("u1", POS), ("u4", POS), ("u2", POS)]


def test_result_is_a_superset_of_the_seed():
    seed = _seed()
    unlabeled = [story("a", UNL, HAPPY), story("b", UNL, SAD)]
    result = run_bootstrap(seed, unlabeled, max_rounds=3)
    assert result[:len(seed)] == seed
    assert {d.doc_id for d in result} >= {d.doc_id for d in seed}


def test_parallel_round_matches_serial():
    seed = _seed()
    unlabeled = [story(f"u{i}", UNL, HAPPY if i % 3 else SAD) for i in range(12)]
    assert bootstrap_round(seed, unlabeled, threads=4) == bootstrap_round(seed, unlabeled, threads=1)


def test_max_rounds_must_be_positive():
    with pytest.raises(PreconditionError):
        run_bootstrap(_seed(), [], max_rounds=0)


def test_unlabeled_order_does_not_change_the_labels():
    seed = _seed()
    unlabeled = (
        [story(f"h{i}", UNL, HAPPY + [("eat", "cake", False)]) for i in range(3)]
        + [story(f"s{i}", UNL, SAD) for i in range(3)]
        + [story("mixed", UNL, HAPPY + SAD), story("walk", UNL, [("walk", None, False)])]
    )
    labeled, remaining = bootstrap_round(seed, unlabeled)
    expected = {d.doc_id: d.label for d in labeled}
    assert set(expected.values()) == {POS, NEG}
    rng = np.random.default_rng(17)
    for _ in range(10):
        shuffled = [unlabeled[i] for i in rng.permutation(len(unlabeled))]
        new, rest = bootstrap_round(seed, shuffled)
        assert {d.doc_id: d.label for d in new} == expected
        assert {d.doc_id for d in rest} == {d.doc_id for d in remaining}
        # output keeps input order
        assert [d.doc_id for d in new] == [d.doc_id for d in shuffled if d.doc_id in expected]
