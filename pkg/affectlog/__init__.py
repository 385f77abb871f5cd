"""
affectlog - weakly supervised first-person sentiment pattern learning.

Extracts lexico-syntactic patterns from dependency-parsed narratives, scores
them by class-conditional probability, bootstraps labeled stories and
combines pattern classifiers with baselines in neutral-fallthrough cascades.
"""

from .affect import AffectValue, PossessionPredicate, compose_possession, first_person_object_affect
from .baselines import Lexicon, LinearModel, lexicon_classify, predict_linear, train_linear
from .bootstrap import bootstrap_round, run_bootstrap
from .cascade import CascadeSpec, cascade_classify
from .corpus import Document, Polarity, Sentence, Token, inherit_labels, is_first_person, parse_conllu
from .errors import AffectlogError
from .evaluation import EvalReport, TuneGrid, evaluate, tune_thresholds
from .patterns import PatternInstance, TemplateId, canonical_key, extract_patterns
from .stats import PatternStats, StatsTable, ThresholdParams, classify_threshold, collect_stats, merge_stats

__version__ = "0.1.0"
