"""Shared builders and fixture paths for the affectlog tests."""

from pathlib import Path
from typing import Optional, Sequence

import pytest

from affectlog.corpus import Document, Polarity, Sentence, Token, read_corpus

FIXTURES = Path(__file__).parent / "fixtures"


def make_sentence(rows: Sequence[tuple], doc_id: str = "d1", sent_id: Optional[str] = None,
                  text: Optional[str] = None) -> Sentence:
    """rows: (form, lemma, upos, head, deprel[, feats]) per token, 1-indexed by position."""
    tokens = []
    for i, row in enumerate(rows, start=1):
        form, lemma, upos, head, deprel = row[:5]
        feats = row[5] if len(row) > 5 else {}
        tokens.append(Token(i, form, lemma, upos, head, deprel, dict(feats)))
    return Sentence(
        tokens=tuple(tokens),
        text=text or " ".join(t.surface for t in tokens),
        doc_id=doc_id,
        sent_id=sent_id or f"{doc_id}-1",
    )


def clause(verb: str, subject: str = "I", obj: Optional[str] = None, negated: bool = False,
           doc_id: str = "d1", sent_id: Optional[str] = None) -> Sentence:
    """'<subject> [did not] <verb> [<obj>] .' with the verb as root."""
    rows = [(subject, subject.lower(), "PRON", 0, "nsubj")]
    if negated:
        rows += [("did", "do", "AUX", 0, "aux"), ("not", "not", "PART", 0, "advmod")]
    verb_at = len(rows) + 1
    rows.append((verb, verb, "VERB", 0, "root"))
    if obj:
        rows.append((obj, obj, "NOUN", verb_at, "obj"))
    rows.append((".", ".", "PUNCT", verb_at, "punct"))
    rows = [r if r[4] == "root" or r[3] else (r[0], r[1], r[2], verb_at, r[4]) for r in rows]
    return make_sentence(rows, doc_id, sent_id)


def story(doc_id: str, label: Polarity, specs: Sequence[tuple]) -> Document:
    """specs: (verb, obj, negated) per sentence."""
    sentences = tuple(
        clause(verb, obj=obj, negated=neg, doc_id=doc_id, sent_id=f"{doc_id}-{n}")
        for n, (verb, obj, neg) in enumerate(specs, start=1)
    )
    return Document(doc_id, sentences, label)


@pytest.fixture
def stories():
    return read_corpus(FIXTURES / "stories.conllu")


@pytest.fixture
def dev_docs():
    return read_corpus(FIXTURES / "dev.conllu")
