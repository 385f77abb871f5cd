"""
Baseline sentence classifiers.

``lexicon_classify`` sums lexicon scores and may abstain (NEUTRAL);
the linear unigram model is trained with a hinge-loss stochastic
subgradient method and always commits to POS or NEG.
"""

import json
import logging
import math
import os
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Sequence, Set, Tuple, Union

import numpy as np
from scipy import sparse

from .corpus import GOLD_LABELS, Polarity, Sentence
from .errors import ConfigError, PreconditionError
from .patterns import NEGATORS
from .utils import atomic_write

logger = logging.getLogger(__name__)


# -----------------------------
# LEXICON SCORER
# -----------------------------

@dataclass(frozen=True)
class Lexicon:
    scores: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        for word, score in self.scores.items():
            if not math.isfinite(score):
                raise ValueError(f"lexicon score for '{word}' is not finite")

    def score(self, lemma: str) -> float:
        return self.scores.get(lemma, 0.0)


def load_lexicon(path: Union[str, os.PathLike]) -> Lexicon:
    """Read a `lemma<TAB>score` file; blank lines and '#' comments are skipped."""
    scores: Dict[str, float] = {}
    with open(path, "r", encoding="utf-8") as f:
        for line_no, line in enumerate(f, start=1):
            line = line.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split("\t")
            try:
                if len(parts) != 2:
                    raise ValueError("expected lemma<TAB>score")
                value = float(parts[1])
                if not math.isfinite(value):
                    raise ValueError("score is not finite")
            except ValueError as e:
                raise ConfigError(f"{os.fspath(path)}:{line_no}: {e}") from e
            scores[parts[0].strip().lower()] = value
    return Lexicon(scores)


def _negation_heads(s: Sentence) -> Set[int]:
    """Indices of tokens that govern a negation dependent."""
    heads = set()
    for t in s.tokens:
        if t.head and (t.deprel == "neg" or (t.deprel.split(":")[0] == "advmod" and t.lemma in NEGATORS)):
            heads.add(t.head)
    return heads


def _under_negation(s: Sentence, index: int, negated: Set[int]) -> bool:
    current = index
    while current:
        if current in negated:
            return True
        current = s.token(current).head
    return False


def lexicon_score(s: Sentence, lex: Lexicon) -> float:
    negated = _negation_heads(s)
    total = 0.0
    for t in s.tokens:
        value = lex.score(t.lemma)
        if value and _under_negation(s, t.index, negated):
            value = -value
        total += value
    return total


def lexicon_classify(s: Sentence, lex: Lexicon, tau: float = 0.0) -> Polarity:
    if tau < 0:
        raise PreconditionError(f"tau must be >= 0, got {tau}")
    score = lexicon_score(s, lex)
    if score > tau:
        return Polarity.POS
    if score < -tau:
        return Polarity.NEG
    return Polarity.NEUTRAL


# -----------------------------
# LINEAR UNIGRAM MODEL
# -----------------------------

def unigram_features(s: Sentence) -> List[str]:
    return sorted({t.lemma for t in s.tokens})


@dataclass(eq=False)
class LinearModel:
    vocabulary: Tuple[str, ...]
    weights: np.ndarray
    bias: float = 0.0
    loss_history: Tuple[float, ...] = ()

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.float64)
        if self.weights.shape != (len(self.vocabulary),):
            raise ValueError("one weight per vocabulary entry is required")
        if not np.all(np.isfinite(self.weights)) or not math.isfinite(self.bias):
            raise ValueError("model weights must be finite")
        self._index = {w: i for i, w in enumerate(self.vocabulary)}

    @classmethod
    def zero(cls, vocabulary: Sequence[str] = ()) -> "LinearModel":
        return cls(tuple(vocabulary), np.zeros(len(vocabulary)))

    def score(self, s: Sentence) -> float:
        idx = [self._index[f] for f in unigram_features(s) if f in self._index]
        return float(self.weights[idx].sum()) + self.bias

    def to_dict(self) -> dict:
        return {
            "bias": self.bias,
            "weights": {w: float(v) for w, v in zip(self.vocabulary, self.weights)},
        }

    @classmethod
    def from_dict(cls, data: dict) -> "LinearModel":
        weights = data["weights"]
        vocab = tuple(sorted(weights))
        return cls(vocab, np.array([weights[w] for w in vocab], dtype=np.float64), float(data["bias"]))


def _design_matrix(sentences: Sequence[Sentence], vocab: Tuple[str, ...]) -> sparse.csr_matrix:
    index = {w: i for i, w in enumerate(vocab)}
    rows, cols = [], []
    for r, s in enumerate(sentences):
        for f in unigram_features(s):
            rows.append(r)
            cols.append(index[f])
    data = np.ones(len(rows), dtype=np.float64)
    return sparse.csr_matrix((data, (rows, cols)), shape=(len(sentences), len(vocab)))


def hinge_loss(X: sparse.csr_matrix, y: np.ndarray, w: np.ndarray, b: float, reg: float) -> float:
    margins = y * (X @ w + b)
    return float(np.maximum(0.0, 1.0 - margins).mean() + 0.5 * reg * w.dot(w))


def _sgd_epoch(rows: List[np.ndarray], y: np.ndarray, w: np.ndarray, b: float, step: float, reg: float,
               order: np.ndarray) -> Tuple[np.ndarray, float]:
    w = w.copy()
    shrink = 1.0 / (1.0 + step * reg)
    for i in order:
        idx = rows[i]
        if y[i] * (w[idx].sum() + b) < 1.0:
            w[idx] += step * y[i]
            b += step * y[i]
        if reg:
            w *= shrink
    return w, b


def train_linear(data: Sequence[Tuple[Sentence, Polarity]], epochs: int = 50, learning_rate: float = 0.1,
                 reg: float = 1e-4, seed: int = 0) -> LinearModel:
    """Hinge-loss SGD over binary unigram features; shuffling is seeded.

    The recorded per-epoch objective never increases: an epoch whose
    weights would raise it is dropped and the step size halved.
    """
    if epochs < 1:
        raise PreconditionError(f"epochs must be >= 1, got {epochs}")
    if learning_rate <= 0:
        raise PreconditionError(f"learning_rate must be > 0, got {learning_rate}")
    if reg < 0:
        raise PreconditionError(f"reg must be >= 0, got {reg}")
    labels = [label for _, label in data]
    if any(label not in GOLD_LABELS for label in labels):
        raise PreconditionError("training labels must be pos or neg")
    if set(labels) != set(GOLD_LABELS):
        raise PreconditionError("training data must contain both pos and neg sentences")

    sentences = [s for s, _ in data]
    vocab = tuple(sorted({f for s in sentences for f in unigram_features(s)}))
    X = _design_matrix(sentences, vocab)
    y = np.array([1.0 if label is Polarity.POS else -1.0 for label in labels])
    rows = [X.indices[X.indptr[i]:X.indptr[i + 1]] for i in range(X.shape[0])]

    w = np.zeros(len(vocab), dtype=np.float64)
    b = 0.0
    loss = hinge_loss(X, y, w, b, reg)
    step = learning_rate
    rng = np.random.default_rng(seed)
    history = []
    for epoch in range(epochs):
        w_next, b_next = _sgd_epoch(rows, y, w, b, step, reg, rng.permutation(len(rows)))
        next_loss = hinge_loss(X, y, w_next, b_next, reg)
        # an epoch that raises the objective is discarded and the step halved
        if next_loss <= loss:
            w, b, loss = w_next, b_next, next_loss
        else:
            step /= 2.0
            logger.debug("epoch %d: loss would rise to %.6f, step now %g", epoch + 1, next_loss, step)
        history.append(loss)
        logger.debug("epoch %d: loss %.6f", epoch + 1, loss)

    logger.info("Trained linear model: %d features, final loss %.4f", len(vocab), history[-1])
    return LinearModel(vocab, w, float(b), tuple(history))


def predict_linear(m: LinearModel, s: Sentence) -> Polarity:
    """POS when the score is >= 0; never abstains."""
    return Polarity.POS if m.score(s) >= 0.0 else Polarity.NEG


def save_model(m: LinearModel, path: Union[str, os.PathLike]):
    atomic_write(path, json.dumps(m.to_dict(), indent=2, sort_keys=True) + "\n")


def load_model(path: Union[str, os.PathLike]) -> LinearModel:
    try:
        with open(path, "r", encoding="utf-8") as f:
            return LinearModel.from_dict(json.load(f))
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
        raise ConfigError(f"{os.fspath(path)}: bad model file ({e})") from e
