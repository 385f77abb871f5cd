"""
Scoring against two-way gold labels and dev-set threshold tuning.

NEUTRAL predictions are abstentions: they cost the gold class recall but
never count against the other class's precision. Macro F is the plain
mean of the POS and NEG F1 scores.
"""

import itertools
import json
import logging
import os
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
from sklearn.metrics import confusion_matrix, precision_recall_fscore_support

from .corpus import GOLD_LABELS, Polarity, Sentence
from .errors import EvalError, PreconditionError
from .patterns import ExtractionConfig, sentence_keys
from .stats import StatsTable, ThresholdParams, count_hits
from .utils import atomic_write

logger = logging.getLogger(__name__)

PREDICTION_LABELS = (Polarity.POS, Polarity.NEG, Polarity.NEUTRAL)


@dataclass(frozen=True)
class ClassScore:
    precision: float
    recall: float
    f1: float


@dataclass(frozen=True)
class EvalReport:
    pos: ClassScore
    neg: ClassScore
    macro_f: float
    # gold label -> predicted label -> count
    counts: Dict[str, Dict[str, int]] = field(default_factory=dict)

    def to_dict(self, name: Optional[str] = None) -> dict:
        data = {
            "pos": vars(self.pos).copy(),
            "neg": vars(self.neg).copy(),
            "macro_f": self.macro_f,
            "counts": self.counts,
        }
        if name is not None:
            data = {"classifier": name, **data}
        return data


def evaluate(pred: Sequence[Polarity], gold: Sequence[Polarity]) -> EvalReport:
    if len(pred) != len(gold):
        raise EvalError(f"{len(pred)} predictions for {len(gold)} gold labels")
    for g in gold:
        if g not in GOLD_LABELS:
            raise EvalError(f"gold labels must be pos or neg, got {getattr(g, 'value', g)}")
    for p in pred:
        if p not in PREDICTION_LABELS:
            raise EvalError(f"predictions must be pos, neg or neutral, got {getattr(p, 'value', p)}")

    y_true = [g.value for g in gold]
    y_pred = [p.value for p in pred]
    labels = [label.value for label in PREDICTION_LABELS]
    if not gold:
        zero = ClassScore(0.0, 0.0, 0.0)
        return EvalReport(zero, zero, 0.0, {g.value: {p: 0 for p in labels} for g in GOLD_LABELS})

    precision, recall, f1, _ = precision_recall_fscore_support(
        y_true, y_pred, labels=[Polarity.POS.value, Polarity.NEG.value], average=None, zero_division=0,
    )
    matrix = confusion_matrix(y_true, y_pred, labels=labels)
    counts = {
        g.value: {p: int(matrix[row, col]) for col, p in enumerate(labels)}
        for row, g in enumerate(GOLD_LABELS)
    }
    pos = ClassScore(float(precision[0]), float(recall[0]), float(f1[0]))
    neg = ClassScore(float(precision[1]), float(recall[1]), float(f1[1]))
    return EvalReport(pos, neg, (pos.f1 + neg.f1) / 2.0, counts)


# -----------------------------
# THRESHOLD TUNING
# -----------------------------

@dataclass(frozen=True)
class ClassGrid:
    theta_f: Tuple[int, ...]
    theta_p: Tuple[float, ...]
    theta_n: Tuple[int, ...]

    def __post_init__(self):
        for name in ("theta_f", "theta_p", "theta_n"):
            if not getattr(self, name):
                raise EvalError(f"grid dimension {name} is empty")
        # validates every value
        self.candidates()

    def candidates(self) -> List[ThresholdParams]:
        try:
            return [
                ThresholdParams(f, float(p), n)
                for f, p, n in itertools.product(self.theta_f, self.theta_p, self.theta_n)
            ]
        except ValueError as e:
            raise EvalError(f"invalid grid value: {e}") from e

    @classmethod
    def from_dict(cls, data: dict) -> "ClassGrid":
        return cls(tuple(data["theta_f"]), tuple(data["theta_p"]), tuple(data["theta_n"]))


@dataclass(frozen=True)
class TuneGrid:
    pos: ClassGrid
    neg: ClassGrid

    @classmethod
    def from_dict(cls, data: dict) -> "TuneGrid":
        try:
            return cls(ClassGrid.from_dict(data["pos"]), ClassGrid.from_dict(data["neg"]))
        except (KeyError, TypeError) as e:
            raise EvalError(f"grid needs pos/neg objects with theta_f, theta_p, theta_n lists ({e})") from e

    @classmethod
    def load(cls, path: Union[str, os.PathLike]) -> "TuneGrid":
        with open(path, "r", encoding="utf-8") as f:
            try:
                return cls.from_dict(json.load(f))
            except json.JSONDecodeError as e:
                raise EvalError(f"{os.fspath(path)}: invalid JSON ({e})") from e


def _f1(tp: np.ndarray, fp: np.ndarray, fn: np.ndarray) -> np.ndarray:
    denom = 2 * tp + fp + fn
    return np.where(denom > 0, 2 * tp / np.maximum(denom, 1), 0.0)


def _preference(macro: float, p: ThresholdParams, n: ThresholdParams) -> tuple:
    # higher theta_p, then higher theta_f, then lower theta_n; POS first
    return (macro, p.theta_p, p.theta_f, -p.theta_n, n.theta_p, n.theta_f, -n.theta_n)


def tune_thresholds(dev: Sequence[Tuple[Sentence, Polarity]], table: StatsTable, grid: TuneGrid,
                    config: Optional[ExtractionConfig] = None
                    ) -> Tuple[ThresholdParams, ThresholdParams, EvalReport]:
    """Exhaustive joint search over both classes' grids for the best macro F."""
    if not dev:
        raise PreconditionError("dev set is empty")
    gold = [label for _, label in dev]
    if set(gold) != set(GOLD_LABELS):
        raise PreconditionError("dev set must contain both pos and neg sentences")

    keys = [sentence_keys(s, config) for s, _ in dev]
    is_pos = np.array([g is Polarity.POS for g in gold])
    is_neg = ~is_pos

    def fires(polarity: Polarity, params: ThresholdParams) -> np.ndarray:
        return np.array([count_hits(k, table, polarity, params) >= params.theta_n for k in keys])

    pos_candidates = grid.pos.candidates()
    neg_candidates = grid.neg.candidates()
    pos_fire = [fires(Polarity.POS, p) for p in pos_candidates]
    neg_fire = [fires(Polarity.NEG, n) for n in neg_candidates]

    best = None
    for p, pf in zip(pos_candidates, pos_fire):
        for n, nf in zip(neg_candidates, neg_fire):
            pred_pos = pf & ~nf
            pred_neg = nf & ~pf
            f1_pos = _f1(np.sum(pred_pos & is_pos), np.sum(pred_pos & is_neg), np.sum(is_pos & ~pred_pos))
            f1_neg = _f1(np.sum(pred_neg & is_neg), np.sum(pred_neg & is_pos), np.sum(is_neg & ~pred_neg))
            macro = float((f1_pos + f1_neg) / 2.0)
            rank = _preference(macro, p, n)
            if best is None or rank > best[0]:
                best = (rank, p, n, pred_pos, pred_neg)
    logger.info("Searched %d threshold settings", len(pos_candidates) * len(neg_candidates))

    _, p, n, pred_pos, pred_neg = best
    pred = [
        Polarity.POS if a else Polarity.NEG if b else Polarity.NEUTRAL
        for a, b in zip(pred_pos, pred_neg)
    ]
    report = evaluate(pred, gold)
    logger.info("Best dev macro F %.4f with pos %s, neg %s", report.macro_f, p, n)
    return p, n, report


# -----------------------------
# REPORTS AND PREDICTION FILES
# -----------------------------

def format_results_table(rows: Iterable[Tuple[str, EvalReport]]) -> str:
    rows = list(rows)
    width = max([len("Classifier")] + [len(name) for name, _ in rows])
    lines = [f"{'Classifier':<{width}}  {'Pos F1':>6}  {'Neg F1':>6}  {'Macro F':>7}"]
    for name, r in rows:
        lines.append(f"{name:<{width}}  {r.pos.f1:>6.2f}  {r.neg.f1:>6.2f}  {r.macro_f:>7.2f}")
    return "\n".join(lines) + "\n"


def report_to_dict(report: EvalReport, name: Optional[str] = None) -> dict:
    return report.to_dict(name)


def write_report(rows: Sequence[Tuple[str, EvalReport]], path: Union[str, os.PathLike]):
    """JSON when the path ends in .json, aligned text otherwise."""
    path = os.fspath(path)
    if path.endswith(".json"):
        body = json.dumps([report_to_dict(r, name) for name, r in rows], indent=2) + "\n"
    else:
        body = format_results_table(rows)
    atomic_write(path, body)


PredictionRow = Tuple[str, str, Polarity]


def format_predictions(rows: Iterable[PredictionRow]) -> str:
    return "".join(f"{doc_id}\t{sent_id}\t{label.value}\n" for doc_id, sent_id, label in rows)


def write_predictions(rows: Iterable[PredictionRow], path: Union[str, os.PathLike]):
    atomic_write(path, format_predictions(rows))


def read_predictions(path: Union[str, os.PathLike]) -> List[PredictionRow]:
    rows: List[PredictionRow] = []
    with open(path, "r", encoding="utf-8") as f:
        for line_no, line in enumerate(f, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            parts = line.split("\t")
            try:
                if len(parts) != 3:
                    raise ValueError("expected doc_id<TAB>sent_id<TAB>label")
                rows.append((parts[0], parts[1], Polarity.parse(parts[2])))
            except ValueError as e:
                raise EvalError(f"{os.fspath(path)}:{line_no}: {e}") from e
    return rows


def align(pred: Sequence[PredictionRow], gold: Sequence[PredictionRow]) -> Tuple[List[Polarity], List[Polarity]]:
    """Pair predictions with gold labels by (doc_id, sent_id)."""
    predicted = {(d, s): label for d, s, label in pred}
    missing = [(d, s) for d, s, _ in gold if (d, s) not in predicted]
    if missing:
        raise EvalError(f"{len(missing)} gold sentences have no prediction (first: {missing[0][0]}/{missing[0][1]})")
    return [predicted[(d, s)] for d, s, _ in gold], [label for _, _, label in gold]
