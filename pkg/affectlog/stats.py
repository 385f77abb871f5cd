"""
Class-conditional pattern statistics and the thresholded pattern classifier.

A pattern qualifies for class C in a unit when its corpus frequency is at
least theta_f and P(C | pattern) is at least theta_p. A unit is labeled C
when at least theta_n qualifying occurrences for C are found and the other
class does not also fire.
"""

import json
import logging
import os
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple, Union

from .corpus import GOLD_LABELS, Document, Polarity, TextUnit
from .errors import PreconditionError, StatsError
from .patterns import ExtractionConfig, unit_keys
from .utils import atomic_write, parallel_map

logger = logging.getLogger(__name__)


class UnitKind(str, Enum):
    STORY = "story"
    SENTENCE = "sentence"


@dataclass(frozen=True)
class ThresholdParams:
    theta_f: int
    theta_p: float
    theta_n: int

    def __post_init__(self):
        if isinstance(self.theta_f, bool) or not isinstance(self.theta_f, int) or self.theta_f < 1:
            raise ValueError(f"theta_f must be an integer >= 1, got {self.theta_f!r}")
        if not 0.0 <= self.theta_p <= 1.0:
            raise ValueError(f"theta_p must lie in [0, 1], got {self.theta_p!r}")
        if isinstance(self.theta_n, bool) or not isinstance(self.theta_n, int) or self.theta_n < 1:
            raise ValueError(f"theta_n must be an integer >= 1, got {self.theta_n!r}")

    @classmethod
    def from_dict(cls, data: dict) -> "ThresholdParams":
        return cls(theta_f=data["theta_f"], theta_p=float(data["theta_p"]), theta_n=data["theta_n"])

    def to_dict(self) -> dict:
        return {"theta_f": self.theta_f, "theta_p": self.theta_p, "theta_n": self.theta_n}


@dataclass(frozen=True)
class PatternStats:
    key: str
    pos_count: int
    neg_count: int

    @property
    def freq(self) -> int:
        return self.pos_count + self.neg_count

    @property
    def p_pos(self) -> float:
        return self.pos_count / self.freq if self.freq else 0.0

    @property
    def p_neg(self) -> float:
        return self.neg_count / self.freq if self.freq else 0.0

    def p(self, polarity: Polarity) -> float:
        if polarity is Polarity.POS:
            return self.p_pos
        if polarity is Polarity.NEG:
            return self.p_neg
        raise ValueError(f"no class probability for {polarity.value}")

    def qualifies(self, polarity: Polarity, params: ThresholdParams) -> bool:
        return self.freq >= params.theta_f and self.p(polarity) >= params.theta_p


class StatsTable:
    """Immutable map from pattern key to PatternStats."""

    def __init__(self, entries: Dict[str, PatternStats], unit_kind: UnitKind):
        for key, st in entries.items():
            if st.key != key or st.pos_count < 0 or st.neg_count < 0 or st.freq == 0:
                raise StatsError(f"invalid statistics for pattern '{key}'")
        self._entries = dict(entries)
        self.unit_kind = unit_kind

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, key: str) -> bool:
        return key in self._entries

    def __iter__(self) -> Iterator[str]:
        return iter(sorted(self._entries))

    def __eq__(self, other) -> bool:
        if not isinstance(other, StatsTable):
            return NotImplemented
        return self.unit_kind is other.unit_kind and self._entries == other._entries

    def __repr__(self) -> str:
        return f"StatsTable({self.unit_kind.value}, {len(self)} patterns)"

    def get(self, key: str) -> Optional[PatternStats]:
        return self._entries.get(key)

    def items(self) -> List[Tuple[str, PatternStats]]:
        return sorted(self._entries.items())

    @classmethod
    def from_counts(cls, pos: Counter, neg: Counter, unit_kind: UnitKind) -> "StatsTable":
        keys = set(pos) | set(neg)
        return cls({k: PatternStats(k, pos.get(k, 0), neg.get(k, 0)) for k in keys}, unit_kind)


def _infer_kind(units: Sequence[Tuple[TextUnit, Polarity]]) -> UnitKind:
    kinds = {UnitKind.STORY if isinstance(u, Document) else UnitKind.SENTENCE for u, _ in units}
    if len(kinds) > 1:
        raise StatsError("cannot mix stories and sentences in one statistics table")
    return kinds.pop() if kinds else UnitKind.SENTENCE


def collect_stats(units: Iterable[Tuple[TextUnit, Polarity]], unit_kind: Optional[UnitKind] = None,
                  config: Optional[ExtractionConfig] = None, threads: int = 1) -> StatsTable:
    """Tally every pattern occurrence per class; each hit in a unit counts."""
    units = list(units)
    for unit, label in units:
        if label not in GOLD_LABELS:
            raise PreconditionError(f"statistics need pos/neg units, got {getattr(label, 'value', label)}")
    inferred = _infer_kind(units)
    if unit_kind is None:
        unit_kind = inferred
    elif units and unit_kind is not inferred:
        raise StatsError(f"requested {unit_kind.value} statistics over {inferred.value} units")

    config = config or ExtractionConfig()
    key_lists = parallel_map(lambda pair: unit_keys(pair[0], config), units, threads)
    pos: Counter = Counter()
    neg: Counter = Counter()
    for (_, label), keys in zip(units, key_lists):
        (pos if label is Polarity.POS else neg).update(keys)
    table = StatsTable.from_counts(pos, neg, unit_kind)
    logger.info("Collected %d patterns from %d %s units", len(table), len(units), unit_kind.value)
    return table


def merge_stats(a: StatsTable, b: StatsTable) -> StatsTable:
    if a.unit_kind is not b.unit_kind:
        raise StatsError(f"cannot merge {a.unit_kind.value} and {b.unit_kind.value} statistics")
    pos: Counter = Counter()
    neg: Counter = Counter()
    for table in (a, b):
        for key, st in table.items():
            pos[key] += st.pos_count
            neg[key] += st.neg_count
    return StatsTable.from_counts(pos, neg, a.unit_kind)


# -----------------------------
# THRESHOLD CLASSIFIER
# -----------------------------

def count_hits(keys: Iterable[str], table: StatsTable, polarity: Polarity, params: ThresholdParams) -> int:
    """Qualifying keys, counted per occurrence; an object-lexicalized key is
    a pattern of its own and hits alongside its plain form."""
    hits = 0
    for key in keys:
        st = table.get(key)
        if st is not None and st.qualifies(polarity, params):
            hits += 1
    return hits


def decide(pos_hits: int, neg_hits: int, pos: ThresholdParams, neg: ThresholdParams) -> Polarity:
    pos_fires = pos_hits >= pos.theta_n
    neg_fires = neg_hits >= neg.theta_n
    if pos_fires and not neg_fires:
        return Polarity.POS
    if neg_fires and not pos_fires:
        return Polarity.NEG
    return Polarity.NEUTRAL


def classify_keys(keys: Sequence[str], table: StatsTable, pos: ThresholdParams, neg: ThresholdParams) -> Polarity:
    return decide(
        count_hits(keys, table, Polarity.POS, pos),
        count_hits(keys, table, Polarity.NEG, neg),
        pos, neg,
    )


def classify_threshold(u: TextUnit, t: StatsTable, pos: ThresholdParams, neg: ThresholdParams,
                       config: Optional[ExtractionConfig] = None) -> Polarity:
    """Label a unit POS/NEG when exactly one class fires, else NEUTRAL."""
    return classify_keys(unit_keys(u, config), t, pos, neg)


def top_patterns(table: StatsTable, polarity: Polarity, params: ThresholdParams,
                 limit: Optional[int] = None) -> List[PatternStats]:
    ranked = sorted(
        (st for _, st in table.items() if st.qualifies(polarity, params)),
        key=lambda st: (-st.p(polarity), -st.freq, st.key),
    )
    return ranked[:limit] if limit is not None else ranked


# -----------------------------
# SERIALIZATION
# -----------------------------

def dumps_stats(table: StatsTable) -> str:
    lines = [json.dumps({"unit_kind": table.unit_kind.value})]
    for key, st in table.items():
        lines.append(json.dumps(
            {"key": key, "freq": st.freq, "pos_count": st.pos_count, "neg_count": st.neg_count},
            ensure_ascii=False,
        ))
    return "\n".join(lines) + "\n"


def save_stats(table: StatsTable, path: Union[str, os.PathLike]):
    atomic_write(path, dumps_stats(table))


def load_stats(path: Union[str, os.PathLike]) -> StatsTable:
    """Read a stats file; probabilities are recomputed from the counts."""
    name = os.fspath(path)
    unit_kind: Optional[UnitKind] = None
    entries: Dict[str, PatternStats] = {}
    with open(path, "r", encoding="utf-8") as f:
        for line_no, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
                if unit_kind is None:
                    if not isinstance(record, dict) or "unit_kind" not in record:
                        raise StatsError(f"{name}:{line_no}: missing unit_kind header")
                    unit_kind = UnitKind(record["unit_kind"])
                    continue
                st = PatternStats(record["key"], int(record["pos_count"]), int(record["neg_count"]))
            except (ValueError, KeyError, TypeError) as e:
                raise StatsError(f"{name}:{line_no}: bad stats record ({e})") from e
            if "freq" in record and record["freq"] != st.freq:
                raise StatsError(f"{name}:{line_no}: freq {record['freq']} != pos_count + neg_count")
            if st.key in entries:
                raise StatsError(f"{name}:{line_no}: duplicate key '{st.key}'")
            entries[st.key] = st
    if unit_kind is None:
        raise StatsError(f"{name}: missing unit_kind header")
    return StatsTable(entries, unit_kind)
