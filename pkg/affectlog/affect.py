"""
Possession-affect composition and object polarity induction.

For "X have/lack Y" the event affect depends on the speaker's affect toward
both arguments. In first-person narratives the speaker is X and bears
positive affect toward X, so the event affect of a learned pattern fixes
the affect toward Y.
"""

import logging
import os
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Sequence, Union

from .config import AffectConfig
from .corpus import Polarity
from .patterns import TemplateId, parse_key
from .stats import StatsTable
from .utils import atomic_write

logger = logging.getLogger(__name__)


class AffectValue(str, Enum):
    PLUS = "+"
    MINUS = "-"

    def flip(self) -> "AffectValue":
        return AffectValue.MINUS if self is AffectValue.PLUS else AffectValue.PLUS


class PossessionPredicate(str, Enum):
    HAVE = "have"
    LACK = "lack"

    def flip(self) -> "PossessionPredicate":
        return PossessionPredicate.LACK if self is PossessionPredicate.HAVE else PossessionPredicate.HAVE


def compose_possession(x: AffectValue, y: AffectValue, pred: PossessionPredicate) -> AffectValue:
    """Event affect of 'X have/lack Y'."""
    have = AffectValue.PLUS if x is y else AffectValue.MINUS
    return have if pred is PossessionPredicate.HAVE else have.flip()


def first_person_object_affect(event: AffectValue, pred: PossessionPredicate) -> AffectValue:
    """Affect toward Y given the event affect, with X fixed to PLUS."""
    return event if pred is PossessionPredicate.HAVE else event.flip()


def affect_from_probability(p_pos: float, p_neg: float, threshold: float = 0.7) -> Optional[AffectValue]:
    if p_pos >= threshold and p_pos > p_neg:
        return AffectValue.PLUS
    if p_neg >= threshold and p_neg > p_pos:
        return AffectValue.MINUS
    return None


@dataclass(frozen=True)
class InducedAffect:
    object_lemma: str
    predicate: PossessionPredicate
    affect: AffectValue
    key: str
    p_class: float


def induce_object_polarity(table: StatsTable, config: Optional[AffectConfig] = None) -> List[InducedAffect]:
    """Object affect for every object-lexicalized possession pattern whose
    class association clears the threshold."""
    config = config or AffectConfig()
    have = set(config.have_verbs)
    lack = set(config.lack_verbs)
    rows: List[InducedAffect] = []
    for key, st in table.items():
        try:
            template, anchors, negated = parse_key(key)
        except ValueError:
            continue
        if template is not TemplateId.ACTVP_DOBJ or len(anchors) != 2 or st.freq < config.min_freq:
            continue
        verb, obj = anchors
        if verb in have:
            pred = PossessionPredicate.HAVE
        elif verb in lack:
            pred = PossessionPredicate.LACK
        else:
            continue
        if negated:
            # not having Y is lacking Y
            pred = pred.flip()
        event = affect_from_probability(st.p_pos, st.p_neg, config.threshold)
        if event is None:
            continue
        p_class = st.p(Polarity.POS if event is AffectValue.PLUS else Polarity.NEG)
        rows.append(InducedAffect(obj, pred, first_person_object_affect(event, pred), key, p_class))
    logger.info("Induced affect for %d possessed objects", len(rows))
    return rows


def write_affect_report(rows: Sequence[InducedAffect], path: Union[str, os.PathLike]):
    lines = ["object\tpredicate\taffect\tpattern\tp_class"]
    for r in rows:
        lines.append(f"{r.object_lemma}\t{r.predicate.value}\t{r.affect.value}\t{r.key}\t{r.p_class:.4f}")
    atomic_write(path, "\n".join(lines) + "\n")
