"""
Story-level bootstrapping.

A high-precision threshold classifier trained on a small hand-labeled seed
labels whole unlabeled stories (all sentences, not only first-person ones).
Statistics are frozen for the duration of a round, so the order in which
unlabeled stories are visited never matters.
"""

import logging
from typing import List, Optional, Sequence, Tuple

from .config import BOOTSTRAP_NEG, BOOTSTRAP_POS
from .corpus import GOLD_LABELS, Document, Polarity
from .errors import PreconditionError, SeedError
from .patterns import ExtractionConfig, unit_keys
from .stats import StatsTable, ThresholdParams, UnitKind, classify_keys, collect_stats
from .utils import parallel_map

logger = logging.getLogger(__name__)


def _check_seed(seed: Sequence[Document]):
    if not seed:
        raise SeedError("bootstrap seed is empty")
    for doc in seed:
        if doc.label not in GOLD_LABELS:
            raise SeedError(f"seed story {doc.doc_id} is {doc.label.value}; seed stories must be pos or neg")
    present = {doc.label for doc in seed}
    if present != set(GOLD_LABELS):
        only = present.pop().value
        raise SeedError(f"seed contains only {only} stories; both classes are needed")


def story_table(seed: Sequence[Document], config: Optional[ExtractionConfig] = None,
                threads: int = 1) -> StatsTable:
    return collect_stats([(d, d.label) for d in seed], UnitKind.STORY, config, threads)


def bootstrap_round(seed: Sequence[Document], unlabeled: Sequence[Document],
                    pos: ThresholdParams = BOOTSTRAP_POS, neg: ThresholdParams = BOOTSTRAP_NEG,
                    config: Optional[ExtractionConfig] = None,
                    threads: int = 1) -> Tuple[List[Document], List[Document]]:
    """Label what the frozen seed table can; return (newly labeled, still unlabeled)."""
    _check_seed(seed)
    table = story_table(seed, config, threads)
    predictions = parallel_map(
        lambda doc: classify_keys(unit_keys(doc, config), table, pos, neg),
        unlabeled,
        threads,
    )
    labeled: List[Document] = []
    remaining: List[Document] = []
    for doc, label in zip(unlabeled, predictions):
        if label in GOLD_LABELS:
            labeled.append(doc.with_label(label))
            logger.debug("Story %s labeled %s", doc.doc_id, label.value)
        else:
            remaining.append(doc)
    return labeled, remaining


def run_bootstrap(seed: Sequence[Document], unlabeled: Sequence[Document],
                  pos: ThresholdParams = BOOTSTRAP_POS, neg: ThresholdParams = BOOTSTRAP_NEG,
                  max_rounds: int = 1, config: Optional[ExtractionConfig] = None,
                  threads: int = 1) -> List[Document]:
    """Repeat bootstrap rounds, folding new labels into the seed, until nothing
    new is labeled or max_rounds is reached. Returns seed + new stories."""
    if max_rounds < 1:
        raise PreconditionError(f"max_rounds must be >= 1, got {max_rounds}")
    corpus = list(seed)
    pending = list(unlabeled)
    for round_no in range(1, max_rounds + 1):
        new, pending = bootstrap_round(corpus, pending, pos, neg, config, threads)
        n_pos = sum(1 for d in new if d.label is Polarity.POS)
        logger.info("Bootstrap round %d: %d pos, %d neg, %d still unlabeled",
                    round_no, n_pos, len(new) - n_pos, len(pending))
        if not new:
            break
        corpus.extend(new)
    return corpus
