"""
Dependency-parsed narrative corpora.

Documents are read from CoNLL-U. Document boundaries come from
``# newdoc id = <id>`` comments and the story-level gold label from an
optional ``# label = pos|neg`` comment. Sentences inherit their document's
label when they are used as noisy sentence-level supervision.
"""

import logging
import os
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import IO, Dict, Iterable, List, Mapping, Optional, Tuple, Union

from conllu import parse as conllu_parse
from conllu.models import TokenList
from conllu.exceptions import ParseException

from .errors import CorpusParseError, PreconditionError, TreeError
from .utils import atomic_write

logger = logging.getLogger(__name__)

CONLLU_COLUMNS = 10

FIRST_PERSON_MARKERS = frozenset(
    ["i", "we", "me", "my", "us", "our", "mine", "ours", "myself", "ourselves"]
)

# Heads that can license a pleonastic subject ("it was raining", "it is hard").
PREDICATE_UPOS = frozenset(["VERB", "AUX", "ADJ"])


class Polarity(str, Enum):
    POS = "pos"
    NEG = "neg"
    NEUTRAL = "neutral"
    UNLABELED = "unlabeled"

    @classmethod
    def parse(cls, value: str) -> "Polarity":
        try:
            return cls(value.strip().lower())
        except ValueError:
            raise ValueError(f"unknown polarity '{value}'") from None


GOLD_LABELS = (Polarity.POS, Polarity.NEG)


@dataclass(frozen=True)
class Token:
    index: int
    surface: str
    lemma: str
    upos: str
    head: int
    deprel: str
    feats: Mapping[str, str] = field(default_factory=dict)

    def feat(self, name: str) -> Optional[str]:
        return self.feats.get(name)


@dataclass(frozen=True)
class Sentence:
    tokens: Tuple[Token, ...]
    text: str
    doc_id: str
    sent_id: str

    def __len__(self) -> int:
        return len(self.tokens)

    def token(self, index: int) -> Token:
        return self.tokens[index - 1]

    def children(self, index: int) -> List[Token]:
        return [t for t in self.tokens if t.head == index]

    def head_of(self, token: Token) -> Optional[Token]:
        return self.token(token.head) if token.head else None


@dataclass(frozen=True)
class Document:
    doc_id: str
    sentences: Tuple[Sentence, ...]
    label: Polarity = Polarity.UNLABELED

    def with_label(self, label: Polarity) -> "Document":
        return replace(self, label=label)


TextUnit = Union[Sentence, Document]


def sentences_of(unit: TextUnit) -> Tuple[Sentence, ...]:
    """Sentences making up a text unit (a sentence is its own unit)."""
    if isinstance(unit, Document):
        return unit.sentences
    return (unit,)


# -----------------------------
# READING
# -----------------------------

def _validate_lines(text: str):
    """Check every token line has the CoNLL-U column count."""
    for line_no, line in enumerate(text.splitlines(), start=1):
        if not line.strip() or line.startswith("#"):
            continue
        columns = line.split("\t")
        if len(columns) != CONLLU_COLUMNS:
            raise CorpusParseError(
                f"expected {CONLLU_COLUMNS} tab-separated columns, found {len(columns)}",
                line_no,
            )


def _is_missing(value) -> bool:
    return value is None or value == "" or value == "_"


def _make_token(raw: Mapping, sent_id: str) -> Token:
    index = raw["id"]
    surface = raw["form"] or ""
    lemma = raw.get("lemma")
    if _is_missing(lemma):
        lemma = surface
    head = raw.get("head")
    if head is None:
        raise TreeError(f"token {index} has no head", sent_id)
    upos = raw.get("upos")
    return Token(
        index=index,
        surface=surface,
        lemma=lemma.lower(),
        upos="_" if _is_missing(upos) else upos,
        head=head,
        deprel=raw.get("deprel") or "_",
        feats=dict(raw.get("feats") or {}),
    )


def check_tree(tokens: Tuple[Token, ...], sent_id: str):
    """Enforce contiguous indices and a single acyclic rooted tree."""
    n = len(tokens)
    for position, tok in enumerate(tokens, start=1):
        if tok.index != position:
            raise TreeError(f"token index {tok.index} out of sequence (expected {position})", sent_id)
        if tok.head == tok.index:
            raise TreeError(f"token {tok.index} is its own head", sent_id)
        if tok.head < 0 or tok.head > n:
            raise TreeError(f"token {tok.index} has head {tok.head} outside 0..{n}", sent_id)
    roots = [t.index for t in tokens if t.head == 0]
    if len(roots) != 1:
        raise TreeError(f"expected exactly one root, found {len(roots)}", sent_id)
    for tok in tokens:
        seen = set()
        current = tok
        while current.head != 0:
            if current.index in seen:
                raise TreeError(f"cyclic head chain through token {current.index}", sent_id)
            seen.add(current.index)
            current = tokens[current.head - 1]


def _read_text(stream: Union[IO[bytes], IO[str], bytes, str]) -> str:
    data = stream if isinstance(stream, (bytes, str)) else stream.read()
    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as e:
            raise CorpusParseError(f"input is not valid UTF-8 ({e})") from e
    return data


def parse_conllu(stream: Union[IO[bytes], IO[str], bytes, str]) -> List[Document]:
    """Parse CoNLL-U text into labeled documents."""
    text = _read_text(stream)
    _validate_lines(text)
    try:
        token_lists = conllu_parse(text)
    except ParseException as e:
        raise CorpusParseError(str(e)) from e

    docs: List[Document] = []
    order: List[str] = []
    grouped: Dict[str, List[Sentence]] = {}
    labels: Dict[str, Polarity] = {}
    current: Optional[str] = None

    for token_list in token_lists:
        meta = token_list.metadata
        if "newdoc id" in meta:
            current = (meta["newdoc id"] or "").strip()
            if not current:
                raise CorpusParseError("empty '# newdoc id' comment")
            if current in grouped:
                raise CorpusParseError(f"duplicate document id '{current}'")
            grouped[current] = []
            order.append(current)
        if current is None:
            raise CorpusParseError("sentence found before any '# newdoc id' comment")

        if meta.get("label"):
            try:
                label = Polarity.parse(meta["label"])
            except ValueError as e:
                raise CorpusParseError(f"document {current}: {e}") from e
            if label not in GOLD_LABELS:
                raise CorpusParseError(f"document {current}: label must be pos or neg, got '{meta['label']}'")
            if labels.get(current, label) is not label:
                raise CorpusParseError(f"document {current}: conflicting labels")
            labels[current] = label

        sentences = grouped[current]
        sent_id = meta.get("sent_id") or f"{current}-{len(sentences) + 1}"
        raw_tokens = [t for t in token_list if isinstance(t["id"], int)]
        if not raw_tokens:
            raise CorpusParseError(f"sentence {sent_id} has no tokens")
        tokens = tuple(_make_token(t, sent_id) for t in raw_tokens)
        check_tree(tokens, sent_id)
        text_value = meta.get("text") or " ".join(t.surface for t in tokens)
        sentences.append(Sentence(tokens=tokens, text=text_value, doc_id=current, sent_id=sent_id))

    for doc_id in order:
        docs.append(Document(
            doc_id=doc_id,
            sentences=tuple(grouped[doc_id]),
            label=labels.get(doc_id, Polarity.UNLABELED),
        ))
    logger.debug("Parsed %d documents, %d sentences", len(docs), sum(len(d.sentences) for d in docs))
    return docs


def read_corpus(path: Union[str, os.PathLike]) -> List[Document]:
    with open(path, "rb") as f:
        try:
            return parse_conllu(f)
        except CorpusParseError as e:
            raise CorpusParseError(f"{os.fspath(path)}: {e}") from e


# -----------------------------
# WRITING
# -----------------------------

def _token_fields(tok: Token) -> dict:
    # Column order matters: conllu serializes dict values positionally.
    return {
        "id": tok.index,
        "form": tok.surface,
        "lemma": tok.lemma,
        "upos": tok.upos,
        "xpos": None,
        "feats": dict(tok.feats) or None,
        "head": tok.head,
        "deprel": tok.deprel,
        "deps": None,
        "misc": None,
    }


def serialize_conllu(docs: Iterable[Document]) -> str:
    chunks = []
    for doc in docs:
        for n, sent in enumerate(doc.sentences):
            meta = {}
            if n == 0:
                meta["newdoc id"] = doc.doc_id
                if doc.label in GOLD_LABELS:
                    meta["label"] = doc.label.value
            meta["sent_id"] = sent.sent_id
            meta["text"] = sent.text
            token_list = TokenList([_token_fields(t) for t in sent.tokens], metadata=meta)
            chunks.append(token_list.serialize())
    return "".join(chunks)


def write_corpus(path: Union[str, os.PathLike], docs: Iterable[Document]):
    atomic_write(path, serialize_conllu(docs))


# -----------------------------
# FIRST-PERSON FILTER AND LABEL INHERITANCE
# -----------------------------

def _first_content_token(s: Sentence) -> Optional[Token]:
    for tok in s.tokens:
        if tok.upos != "PUNCT":
            return tok
    return None


def _is_progressive(tok: Token) -> bool:
    if tok.upos != "VERB":
        return False
    if tok.feat("VerbForm") == "Part" and tok.feat("Tense") == "Pres":
        return True
    return tok.surface.lower().endswith("ing")


def _is_pleonastic_it(s: Sentence, tok: Token) -> bool:
    if tok.surface.lower() != "it" or tok.head == 0:
        return False
    head = s.head_of(tok)
    if head.upos not in PREDICATE_UPOS:
        return False
    role = tok.deprel.split(":")[0]
    return not any(
        c.index != tok.index and c.deprel.split(":")[0] == role
        for c in s.children(head.index)
    )


def is_first_person(s: Sentence) -> bool:
    """True if the sentence has a first-person marker or opens with a
    progressive verb or pleonastic 'it'."""
    if any(t.surface.lower() in FIRST_PERSON_MARKERS for t in s.tokens):
        return True
    first = _first_content_token(s)
    if first is None:
        return False
    return _is_progressive(first) or _is_pleonastic_it(s, first)


def inherit_labels(d: Document, first_person_only: bool = False) -> List[Tuple[Sentence, Polarity]]:
    if d.label not in GOLD_LABELS:
        raise PreconditionError(f"document {d.doc_id} is {d.label.value}; only pos/neg stories pass labels down")
    return [
        (s, d.label)
        for s in d.sentences
        if not first_person_only or is_first_person(s)
    ]


def labeled_sentences(docs: Iterable[Document], first_person_only: bool = False) -> List[Tuple[Sentence, Polarity]]:
    """Inherit labels across a corpus, skipping unlabeled stories."""
    pairs = []
    skipped = 0
    for doc in docs:
        if doc.label in GOLD_LABELS:
            pairs.extend(inherit_labels(doc, first_person_only))
        else:
            skipped += 1
    if skipped:
        logger.info("Skipped %d unlabeled documents", skipped)
    return pairs
