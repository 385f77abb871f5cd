"""
Lexico-syntactic extraction templates over dependency trees.

Each template pairs one or two anchor lexemes (the learned part of a
pattern) with a slot (the extracted constituent). Templates are matched
against Universal Dependencies relations; alternative tagsets are mapped
onto UD names through ``ExtractionConfig.deprel_aliases``.
"""

import json
import logging
import os
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Dict, Iterable, Iterator, List, Optional, Tuple, Union
from urllib.parse import unquote

from .corpus import Document, Sentence, TextUnit, Token, is_first_person, sentences_of
from .utils import atomic_write

logger = logging.getLogger(__name__)


class TemplateId(str, Enum):
    SUBJ_ACTVP = "SUBJ_ACTVP"
    SUBJ_ACTINFVP = "SUBJ_ACTINFVP"
    SUBJ_AUXVP_DOBJ = "SUBJ_AUXVP_DOBJ"
    ACTVP_DOBJ = "ACTVP_DOBJ"
    PASSINFVP_DOBJ = "PASSINFVP_DOBJ"
    SUBJ_AUXVP_DOBJ_OBJ = "SUBJ_AUXVP_DOBJ_OBJ"
    NP_PREP_NP = "NP_PREP_NP"
    ACTVP_PREP_NP = "ACTVP_PREP_NP"
    INFVP_PREP_NP = "INFVP_PREP_NP"

    @property
    def tag(self) -> str:
        return KEY_TAGS.get(self, self.value)


# Prepositional templates are keyed without their trailing slot name.
KEY_TAGS = {
    TemplateId.NP_PREP_NP: "NP_PREP",
    TemplateId.ACTVP_PREP_NP: "ACTVP_PREP",
    TemplateId.INFVP_PREP_NP: "INFVP_PREP",
}
TAG_TO_TEMPLATE = {t.tag: t for t in TemplateId}

# Templates that also get an object-lexicalized key (e.g. ACTVP_DOBJ:HAVE_FUN).
LEXICALIZABLE = frozenset([TemplateId.ACTVP_DOBJ, TemplateId.SUBJ_AUXVP_DOBJ])

NEGATION_PREFIX = "NOT_"
NEGATORS = frozenset(["not", "n't", "never", "no"])
NOMINAL_UPOS = frozenset(["NOUN", "PROPN", "NUM"])
PASSIVE_RELS = frozenset(["aux:pass", "nsubj:pass", "csubj:pass"])
BE_RELS = frozenset(["aux", "aux:pass", "cop"])
# Bare nominal obliques that act as their own "preposition" anchor (come home).
BARE_OBLIQUE_RELS = frozenset(["obl", "obl:npmod"])

DEFAULT_DEPREL_ALIASES = {
    "dobj": "obj",
    "nsubjpass": "nsubj:pass",
    "auxpass": "aux:pass",
    "csubjpass": "csubj:pass",
}


@dataclass
class ExtractionConfig:
    """Pattern extraction configuration"""
    lexicalize_objects: bool = True
    deprel_aliases: Dict[str, str] = field(default_factory=lambda: dict(DEFAULT_DEPREL_ALIASES))


@dataclass(frozen=True)
class PatternInstance:
    template: TemplateId
    anchors: Tuple[str, ...]
    negated: bool = False
    slot_filler: Optional[str] = None

    def __post_init__(self):
        if not self.anchors:
            raise ValueError("a pattern needs at least one anchor")
        for anchor in self.anchors:
            if not anchor or anchor != anchor.lower():
                raise ValueError(f"anchor '{anchor}' must be a non-empty lowercased lemma")

    @property
    def key(self) -> str:
        return canonical_key(self)


def _escape_anchor(anchor: str) -> str:
    return anchor.replace("%", "%25").replace("_", "%5F").upper()


def canonical_key(p: PatternInstance) -> str:
    """NOT_-prefixed template tag plus uppercased anchors; the filler is excluded.

    '%' and '_' inside an anchor are percent-escaped so that '_' only ever
    separates anchors.
    """
    prefix = NEGATION_PREFIX if p.negated else ""
    return f"{prefix}{p.template.tag}:{'_'.join(_escape_anchor(a) for a in p.anchors)}"


def parse_key(key: str) -> Tuple[TemplateId, Tuple[str, ...], bool]:
    """Invert canonical_key: (template, lowercased anchors, negated)."""
    negated = key.startswith(NEGATION_PREFIX)
    body = key[len(NEGATION_PREFIX):] if negated else key
    tag, sep, anchors = body.partition(":")
    if not sep or tag not in TAG_TO_TEMPLATE or not anchors:
        raise ValueError(f"not a pattern key: '{key}'")
    parts = anchors.split("_")
    if not all(parts):
        raise ValueError(f"not a pattern key: '{key}'")
    return TAG_TO_TEMPLATE[tag], tuple(unquote(a.lower()) for a in parts), negated


def instance_keys(p: PatternInstance, lexicalize_objects: bool = True) -> List[str]:
    keys = [canonical_key(p)]
    if lexicalize_objects and p.template in LEXICALIZABLE and p.slot_filler:
        keys.append(canonical_key(replace(p, anchors=p.anchors + (p.slot_filler,))))
    return keys


# -----------------------------
# TEMPLATE MATCHING
# -----------------------------

class _Tree:
    """Sentence view with relation names normalized to UD."""

    def __init__(self, s: Sentence, aliases: Dict[str, str]):
        self.s = s
        self.aliases = aliases
        self._children: Dict[int, List[Token]] = {t.index: [] for t in s.tokens}
        for t in s.tokens:
            if t.head:
                self._children[t.head].append(t)

    def rel(self, t: Token) -> str:
        return self.aliases.get(t.deprel, t.deprel)

    def base(self, t: Token) -> str:
        return self.rel(t).split(":")[0]

    def children(self, t: Token, *rels: str) -> List[Token]:
        kids = self._children[t.index]
        if not rels:
            return kids
        return [c for c in kids if self.rel(c) in rels or self.base(c) in rels]

    def subject(self, t: Token) -> Optional[Token]:
        for c in self._children[t.index]:
            if self.base(c) == "nsubj" and self.rel(c) != "nsubj:pass":
                return c
        return None

    def is_negated(self, t: Token) -> bool:
        for c in self._children[t.index]:
            if self.rel(c) == "neg":
                return True
            if self.base(c) == "advmod" and (c.lemma in NEGATORS or c.feat("Polarity") == "Neg"):
                return True
        return False

    def is_passive(self, t: Token) -> bool:
        if t.feat("Voice") == "Pass":
            return True
        return any(self.rel(c) in PASSIVE_RELS for c in self._children[t.index])

    def is_infinitival(self, t: Token) -> bool:
        return any(self.base(c) == "mark" and c.lemma == "to" for c in self._children[t.index])

    def is_active_vp(self, t: Token) -> bool:
        return t.upos == "VERB" and not self.is_passive(t) and not self.is_infinitival(t)

    def is_be_participle(self, t: Token) -> bool:
        if t.upos not in ("VERB", "ADJ"):
            return False
        form = t.feat("VerbForm")
        if form is not None:
            participle = form == "Part" and t.feat("Tense") != "Pres"
        else:
            participle = t.surface.lower().endswith(("ed", "en"))
        if not participle:
            return False
        return any(c.lemma == "be" and self.rel(c) in BE_RELS for c in self._children[t.index])

    def infinitives(self, t: Token) -> List[Token]:
        return [c for c in self.children(t, "xcomp") if c.upos == "VERB" and self.is_infinitival(c)]

    def preposition(self, t: Token) -> Optional[str]:
        cases = self.children(t, "case")
        return cases[0].lemma if cases else None

    def copula(self, t: Token) -> bool:
        return bool(self.children(t, "cop"))


def _match(tree: _Tree, t: Token) -> Iterator[PatternInstance]:
    """All template instantiations anchored at token t, in template order."""
    neg = tree.is_negated(t)
    active = tree.is_active_vp(t)
    subj = tree.subject(t)

    if active and subj is not None:
        yield PatternInstance(TemplateId.SUBJ_ACTVP, (t.lemma,), neg, subj.lemma)
        for inf in tree.infinitives(t):
            yield PatternInstance(TemplateId.SUBJ_ACTINFVP, (t.lemma, inf.lemma), neg, subj.lemma)

    if tree.copula(t) and subj is not None and t.upos in NOMINAL_UPOS:
        yield PatternInstance(TemplateId.SUBJ_AUXVP_DOBJ, (t.lemma,), neg, subj.lemma)

    if active:
        for obj in tree.children(t, "obj"):
            yield PatternInstance(TemplateId.ACTVP_DOBJ, (t.lemma,), neg, obj.lemma)

    if tree.is_be_participle(t):
        for inf in tree.infinitives(t):
            for obj in tree.children(inf, "obj"):
                yield PatternInstance(TemplateId.PASSINFVP_DOBJ, (t.lemma, inf.lemma), neg, obj.lemma)

    if tree.copula(t) and subj is not None and subj.upos in ("NOUN", "PROPN"):
        yield PatternInstance(TemplateId.SUBJ_AUXVP_DOBJ_OBJ, (subj.lemma,), neg, t.lemma)

    if t.upos in ("NOUN", "PROPN"):
        for mod in tree.children(t, "nmod"):
            if tree.rel(mod) == "nmod:poss":
                continue
            prep = tree.preposition(mod)
            if prep:
                yield PatternInstance(TemplateId.NP_PREP_NP, (t.lemma, prep), False, mod.lemma)

    if active:
        for obl in tree.children(t, "obl"):
            prep = tree.preposition(obl)
            if prep is None and tree.rel(obl) in BARE_OBLIQUE_RELS:
                prep = obl.lemma
            if prep:
                yield PatternInstance(TemplateId.ACTVP_PREP_NP, (t.lemma, prep), neg, obl.lemma)

    if t.upos == "VERB" and tree.is_infinitival(t) and not tree.is_passive(t):
        for obl in tree.children(t, "obl"):
            prep = tree.preposition(obl)
            if prep:
                yield PatternInstance(TemplateId.INFVP_PREP_NP, (t.lemma, prep), neg, obl.lemma)


def extract_patterns(s: Sentence, config: Optional[ExtractionConfig] = None) -> List[PatternInstance]:
    """Every template instantiation found in the sentence, in token order."""
    config = config or ExtractionConfig()
    tree = _Tree(s, config.deprel_aliases)
    found: List[PatternInstance] = []
    for tok in s.tokens:
        found.extend(_match(tree, tok))
    return found


def sentence_keys(s: Sentence, config: Optional[ExtractionConfig] = None) -> List[str]:
    config = config or ExtractionConfig()
    keys: List[str] = []
    for p in extract_patterns(s, config):
        keys.extend(instance_keys(p, config.lexicalize_objects))
    return keys


def unit_keys(unit: TextUnit, config: Optional[ExtractionConfig] = None) -> List[str]:
    """Pattern keys of every occurrence in a sentence or a whole story."""
    keys: List[str] = []
    for s in sentences_of(unit):
        keys.extend(sentence_keys(s, config))
    return keys


# -----------------------------
# PATTERN DUMP
# -----------------------------

def pattern_records(docs: Iterable[Document], config: Optional[ExtractionConfig] = None,
                    first_person_only: bool = False) -> Iterator[dict]:
    config = config or ExtractionConfig()
    for doc in docs:
        for s in doc.sentences:
            if first_person_only and not is_first_person(s):
                continue
            for p in extract_patterns(s, config):
                yield {
                    "key": canonical_key(p),
                    "template": p.template.value,
                    "anchors": list(p.anchors),
                    "negated": p.negated,
                    "slot_filler": p.slot_filler,
                    "doc_id": s.doc_id,
                    "sent_id": s.sent_id,
                }


def dump_patterns(docs: Iterable[Document], path: Union[str, os.PathLike],
                  config: Optional[ExtractionConfig] = None, first_person_only: bool = False) -> int:
    lines = [json.dumps(r, ensure_ascii=False) for r in pattern_records(docs, config, first_person_only)]
    atomic_write(path, "".join(line + "\n" for line in lines))
    logger.info("Wrote %d pattern instances to %s", len(lines), os.fspath(path))
    return len(lines)
