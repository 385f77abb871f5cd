"""
Neutral-fallthrough classifier cascades.

Stage i is consulted on a unit only when every earlier stage predicted
NEUTRAL. The first non-neutral prediction wins; if every stage abstains
the cascade returns NEUTRAL.
"""

import json
import logging
import os
from dataclasses import dataclass
from typing import Optional, Protocol, Tuple, Union

from .baselines import Lexicon, LinearModel, lexicon_classify, load_lexicon, load_model, predict_linear, train_linear
from .config import AppConfig
from .corpus import Polarity, TextUnit, labeled_sentences, read_corpus, sentences_of
from .errors import ConfigError, StageError
from .patterns import ExtractionConfig
from .stats import StatsTable, ThresholdParams, classify_threshold, load_stats

logger = logging.getLogger(__name__)

MAX_STAGES = 3
STAGE_KINDS = ("pattern", "lexicon", "linear")


class Classifier(Protocol):
    name: str

    def classify(self, unit: TextUnit) -> Polarity:
        ...


def _single_sentence(unit: TextUnit, name: str):
    sentences = sentences_of(unit)
    if len(sentences) != 1:
        raise ValueError(f"{name} classifies single sentences, got a unit of {len(sentences)}")
    return sentences[0]


@dataclass
class PatternClassifier:
    name: str
    table: StatsTable
    pos: ThresholdParams
    neg: ThresholdParams
    extraction: Optional[ExtractionConfig] = None

    def classify(self, unit: TextUnit) -> Polarity:
        return classify_threshold(unit, self.table, self.pos, self.neg, self.extraction)


@dataclass
class LexiconClassifier:
    name: str
    lexicon: Lexicon
    tau: float = 0.0

    def classify(self, unit: TextUnit) -> Polarity:
        return lexicon_classify(_single_sentence(unit, self.name), self.lexicon, self.tau)


@dataclass
class LinearClassifier:
    name: str
    model: LinearModel

    def classify(self, unit: TextUnit) -> Polarity:
        return predict_linear(self.model, _single_sentence(unit, self.name))


@dataclass(frozen=True)
class CascadeSpec:
    stages: Tuple[Classifier, ...]

    def __post_init__(self):
        if not 1 <= len(self.stages) <= MAX_STAGES:
            raise ConfigError(f"a cascade has 1 to {MAX_STAGES} stages, got {len(self.stages)}")
        names = [stage.name for stage in self.stages]
        if len(set(names)) != len(names):
            raise ConfigError(f"cascade stage names must be unique: {names}")

    @property
    def name(self) -> str:
        return ", ".join(stage.name for stage in self.stages)


def cascade_classify(u: TextUnit, spec: CascadeSpec) -> Polarity:
    for stage in spec.stages:
        try:
            label = stage.classify(u)
        except Exception as e:
            raise StageError(stage.name, e) from e
        if label is not Polarity.NEUTRAL:
            return label
    return Polarity.NEUTRAL


# -----------------------------
# LOADING STAGES FROM CONFIG FILES
# -----------------------------

def _read_json(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: invalid JSON ({e})") from e
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: expected a JSON object")
    return data


def _resolve(base: str, path: str) -> str:
    return path if os.path.isabs(path) else os.path.join(os.path.dirname(os.path.abspath(base)), path)


def _params(data: dict, where: str) -> Tuple[ThresholdParams, ThresholdParams]:
    try:
        return ThresholdParams.from_dict(data["pos"]), ThresholdParams.from_dict(data["neg"])
    except (KeyError, TypeError, ValueError) as e:
        raise ConfigError(f"{where}: bad threshold parameters ({e})") from e


def load_stage(kind: str, config_path: Union[str, os.PathLike], name: Optional[str] = None,
               app: Optional[AppConfig] = None, seed: int = 0) -> Classifier:
    """Build one configured classifier from its JSON config file."""
    config_path = os.fspath(config_path)
    app = app or AppConfig()
    data = _read_json(config_path)
    name = name or kind

    if kind == "pattern":
        if "stats" not in data:
            raise ConfigError(f"{config_path}: pattern stage needs 'stats'")
        params_src = data
        if "params" in data:
            params_src = _read_json(_resolve(config_path, data["params"]))
        pos, neg = _params(params_src, config_path)
        table = load_stats(_resolve(config_path, data["stats"]))
        return PatternClassifier(name, table, pos, neg, app.extraction)

    if kind == "lexicon":
        if "lexicon" not in data:
            raise ConfigError(f"{config_path}: lexicon stage needs 'lexicon'")
        tau = float(data.get("tau", app.lexicon.tau))
        if tau < 0:
            raise ConfigError(f"{config_path}: tau must be >= 0")
        return LexiconClassifier(name, load_lexicon(_resolve(config_path, data["lexicon"])), tau)

    if kind == "linear":
        if "model" in data:
            return LinearClassifier(name, load_model(_resolve(config_path, data["model"])))
        if "train" in data:
            docs = read_corpus(_resolve(config_path, data["train"]))
            pairs = labeled_sentences(docs, bool(data.get("first_person_only", False)))
            model = train_linear(
                pairs,
                epochs=int(data.get("epochs", app.linear.epochs)),
                learning_rate=float(data.get("learning_rate", app.linear.learning_rate)),
                reg=float(data.get("reg", app.linear.reg)),
                seed=seed,
            )
            return LinearClassifier(name, model)
        raise ConfigError(f"{config_path}: linear stage needs 'model' or 'train'")

    raise ConfigError(f"{config_path}: unknown classifier kind '{kind}' (expected one of {', '.join(STAGE_KINDS)})")


def load_manifest(path: Union[str, os.PathLike], app: Optional[AppConfig] = None, seed: int = 0) -> CascadeSpec:
    """Read a cascade manifest: {"stages": [{"kind", "config_path", "name"?}, ...]}."""
    path = os.fspath(path)
    data = _read_json(path)
    entries = data.get("stages")
    if not isinstance(entries, list):
        raise ConfigError(f"{path}: 'stages' must be a list")
    stages = []
    for n, entry in enumerate(entries, start=1):
        if not isinstance(entry, dict) or "kind" not in entry or "config_path" not in entry:
            raise ConfigError(f"{path}: stage {n} needs 'kind' and 'config_path'")
        stages.append(load_stage(entry["kind"], _resolve(path, entry["config_path"]),
                                 entry.get("name"), app, seed))
    spec = CascadeSpec(tuple(stages))
    logger.info("Loaded cascade [%s]", spec.name)
    return spec
