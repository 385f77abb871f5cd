import json
from collections import Counter

import numpy as np
import pytest

from affectlog.patterns import (
    ExtractionConfig, PatternInstance, TemplateId, canonical_key, dump_patterns, extract_patterns, instance_keys,
    parse_key, sentence_keys, unit_keys,
)
from conftest import make_sentence

T = TemplateId

CRY_AT_THOUGHT = make_sentence([
    ("I", "i", "PRON", 2, "nsubj"),
    ("cry", "cry", "VERB", 0, "root"),
    ("at", "at", "ADP", 5, "case"),
    ("the", "the", "DET", 5, "det"),
    ("thought", "thought", "NOUN", 2, "obl"),
    ("of", "of", "ADP", 7, "case"),
    ("it", "it", "PRON", 5, "nmod"),
])
WANT_TO_DANCE = make_sentence([
    ("I", "i", "PRON", 2, "nsubj"),
    ("want", "want", "VERB", 0, "root"),
    ("to", "to", "PART", 4, "mark"),
    ("dance", "dance", "VERB", 2, "xcomp", {"VerbForm": "Inf"}),
])
WAS_A_FOOL = make_sentence([
    ("I", "i", "PRON", 4, "nsubj"),
    ("was", "be", "AUX", 4, "cop"),
    ("a", "a", "DET", 4, "det"),
    ("fool", "fool", "NOUN", 0, "root"),
])
HAD_FUN = make_sentence([
    ("I", "i", "PRON", 2, "nsubj"),
    ("had", "have", "VERB", 0, "root"),
    ("fun", "fun", "NOUN", 2, "obj"),
])
FORCED_TO_LEAVE = make_sentence([
    ("I", "i", "PRON", 3, "nsubj:pass"),
    ("was", "be", "AUX", 3, "aux:pass"),
    ("forced", "force", "VERB", 0, "root", {"VerbForm": "Part", "Tense": "Past", "Voice": "Pass"}),
    ("to", "to", "PART", 5, "mark"),
    ("leave", "leave", "VERB", 3, "xcomp", {"VerbForm": "Inf"}),
    ("home", "home", "NOUN", 5, "obj"),
])
RELATIONSHIP_NONEXISTENT = make_sentence([
    ("The", "the", "DET", 2, "det"),
    ("relationship", "relationship", "NOUN", 4, "nsubj"),
    ("was", "be", "AUX", 4, "cop"),
    ("nonexistent", "nonexistent", "ADJ", 0, "root"),
])
PAIN_IN_BACK = make_sentence([
    ("the", "the", "DET", 2, "det"),
    ("pain", "pain", "NOUN", 0, "root"),
    ("in", "in", "ADP", 5, "case"),
    ("my", "my", "PRON", 5, "nmod:poss"),
    ("back", "back", "NOUN", 2, "nmod"),
])
CHEATED_ON_ME = make_sentence([
    ("he", "he", "PRON", 2, "nsubj"),
    ("cheated", "cheat", "VERB", 0, "root"),
    ("on", "on", "ADP", 4, "case"),
    ("me", "me", "PRON", 2, "obl"),
])
GO_TO_BED = make_sentence([
    ("I", "i", "PRON", 2, "nsubj"),
    ("wanted", "want", "VERB", 0, "root"),
    ("to", "to", "PART", 4, "mark"),
    ("go", "go", "VERB", 2, "xcomp", {"VerbForm": "Inf"}),
    ("to", "to", "ADP", 6, "case"),
    ("bed", "bed", "NOUN", 4, "obl"),
])
NOT_COME_HOME = make_sentence([
    ("I", "i", "PRON", 4, "nsubj"),
    ("did", "do", "AUX", 4, "aux"),
    ("not", "not", "PART", 4, "advmod", {"Polarity": "Neg"}),
    ("come", "come", "VERB", 0, "root"),
    ("home", "home", "NOUN", 4, "obl:npmod"),
])


@pytest.mark.parametrize("sentence,expected", [
    (CRY_AT_THOUGHT, [
        PatternInstance(T.SUBJ_ACTVP, ("cry",), False, "i"),
        PatternInstance(T.ACTVP_PREP_NP, ("cry", "at"), False, "thought"),
        PatternInstance(T.NP_PREP_NP, ("thought", "of"), False, "it"),
    ]),
    (WANT_TO_DANCE, [
        PatternInstance(T.SUBJ_ACTVP, ("want",), False, "i"),
        PatternInstance(T.SUBJ_ACTINFVP, ("want", "dance"), False, "i"),
    ]),
    (WAS_A_FOOL, [PatternInstance(T.SUBJ_AUXVP_DOBJ, ("fool",), False, "i")]),
    (HAD_FUN, [
        PatternInstance(T.SUBJ_ACTVP, ("have",), False, "i"),
        PatternInstance(T.ACTVP_DOBJ, ("have",), False, "fun"),
    ]),
    (FORCED_TO_LEAVE, [PatternInstance(T.PASSINFVP_DOBJ, ("force", "leave"), False, "home")]),
    (RELATIONSHIP_NONEXISTENT, [PatternInstance(T.SUBJ_AUXVP_DOBJ_OBJ, ("relationship",), False, "nonexistent")]),
    (PAIN_IN_BACK, [PatternInstance(T.NP_PREP_NP, ("pain", "in"), False, "back")]),
    (CHEATED_ON_ME, [
        PatternInstance(T.SUBJ_ACTVP, ("cheat",), False, "he"),
        PatternInstance(T.ACTVP_PREP_NP, ("cheat", "on"), False, "me"),
    ]),
    (GO_TO_BED, [
        PatternInstance(T.SUBJ_ACTVP, ("want",), False, "i"),
        PatternInstance(T.SUBJ_ACTINFVP, ("want", "go"), False, "i"),
        PatternInstance(T.INFVP_PREP_NP, ("go", "to"), False, "bed"),
    ]),
])
def test_template_extraction(sentence, expected):
    assert extract_patterns(sentence) == expected


def test_every_template_is_covered_by_an_example():
    sentences = [CRY_AT_THOUGHT, WANT_TO_DANCE, WAS_A_FOOL, HAD_FUN, FORCED_TO_LEAVE,
                 RELATIONSHIP_NONEXISTENT, PAIN_IN_BACK, CHEATED_ON_ME, GO_TO_BED]
    seen = {p.template for s in sentences for p in extract_patterns(s)}
    assert seen == set(TemplateId)


def test_negated_come_home():
    found = extract_patterns(NOT_COME_HOME)
    assert found == [
        PatternInstance(T.SUBJ_ACTVP, ("come",), True, "i"),
        PatternInstance(T.ACTVP_PREP_NP, ("come", "home"), True, "home"),
    ]
    assert sentence_keys(NOT_COME_HOME) == ["NOT_SUBJ_ACTVP:COME", "NOT_ACTVP_PREP:COME_HOME"]


def test_unmatched_sentence_is_empty():
    s = make_sentence([("Hello", "hello", "INTJ", 0, "root"), ("!", "!", "PUNCT", 1, "punct")])
    assert extract_patterns(s) == []


@pytest.mark.parametrize("instance,key", [
    (PatternInstance(T.SUBJ_ACTVP, ("cry",)), "SUBJ_ACTVP:CRY"),
    (PatternInstance(T.ACTVP_DOBJ, ("have",), slot_filler="fun"), "ACTVP_DOBJ:HAVE"),
    (PatternInstance(T.SUBJ_ACTVP, ("come",), negated=True), "NOT_SUBJ_ACTVP:COME"),
    (PatternInstance(T.ACTVP_PREP_NP, ("cheat", "on")), "ACTVP_PREP:CHEAT_ON"),
    (PatternInstance(T.NP_PREP_NP, ("pain", "in")), "NP_PREP:PAIN_IN"),
    (PatternInstance(T.INFVP_PREP_NP, ("go", "to"), negated=True), "NOT_INFVP_PREP:GO_TO"),
])
def test_canonical_key(instance, key):
    assert canonical_key(instance) == key
    assert instance.key == key
    assert parse_key(key) == (instance.template, instance.anchors, instance.negated)


def test_keys_are_injective_over_identity():
    instances = [
        PatternInstance(template, anchors, negated)
        for template in TemplateId
        for anchors in [("have",), ("have", "fun"), ("go", "to")]
        for negated in (False, True)
    ]
    keys = [canonical_key(p) for p in instances]
    assert len(set(keys)) == len(keys)


def test_underscore_lemmas_do_not_collide():
    joined = PatternInstance(T.ACTVP_PREP_NP, ("give_up", "on"))
    split = PatternInstance(T.ACTVP_PREP_NP, ("give", "up_on"))
    percent = PatternInstance(T.ACTVP_PREP_NP, ("give%5fup", "on"))
    keys = [canonical_key(p) for p in (joined, split, percent)]
    assert len(set(keys)) == 3
    assert keys[0] == "ACTVP_PREP:GIVE%5FUP_ON"
    for p, key in zip((joined, split, percent), keys):
        assert parse_key(key) == (p.template, p.anchors, p.negated)


def test_parse_key_rejects_garbage():
    for bad in ["", "SUBJ_ACTVP", "NOPE:CRY", "SUBJ_ACTVP:", "ACTVP_PREP:GIVE__ON"]:
        with pytest.raises(ValueError):
            parse_key(bad)


def test_anchors_must_be_lowercase_lemmas():
    with pytest.raises(ValueError):
        PatternInstance(T.SUBJ_ACTVP, ("Cry",))
    with pytest.raises(ValueError):
        PatternInstance(T.SUBJ_ACTVP, ())


def test_object_lexicalized_variant():
    assert sentence_keys(HAD_FUN) == ["SUBJ_ACTVP:HAVE", "ACTVP_DOBJ:HAVE", "ACTVP_DOBJ:HAVE_FUN"]
    plain = ExtractionConfig(lexicalize_objects=False)
    assert sentence_keys(HAD_FUN, plain) == ["SUBJ_ACTVP:HAVE", "ACTVP_DOBJ:HAVE"]
    p = PatternInstance(T.SUBJ_ACTVP, ("cry",), slot_filler="i")
    assert instance_keys(p) == ["SUBJ_ACTVP:CRY"]


def test_legacy_relation_names_are_aliased():
    legacy = make_sentence([
        ("I", "i", "PRON", 2, "nsubj"),
        ("had", "have", "VERB", 0, "root"),
        ("fun", "fun", "NOUN", 2, "dobj"),
    ])
    assert extract_patterns(legacy) == extract_patterns(HAD_FUN)


def test_document_order_does_not_change_key_multiset(stories):
    rng = np.random.default_rng(7)
    baseline = Counter(k for d in stories for k in unit_keys(d))
    for _ in range(5):
        order = rng.permutation(len(stories))
        assert Counter(k for i in order for k in unit_keys(stories[i])) == baseline


def test_dump_patterns(stories, tmp_path):
    out = tmp_path / "patterns.jsonl"
    n = dump_patterns(stories, out)
    records = [json.loads(line) for line in out.read_text(encoding="utf-8").splitlines()]
    assert n == len(records) == sum(len(extract_patterns(s)) for d in stories for s in d.sentences)
    first = records[0]
    assert first == {
        "key": "SUBJ_ACTVP:SWIM", "template": "SUBJ_ACTVP", "anchors": ["swim"], "negated": False,
        "slot_filler": "i", "doc_id": "a1", "sent_id": "a1-1",
    }
