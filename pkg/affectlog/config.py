import json
import logging
import os
from dataclasses import asdict, dataclass, field, fields, is_dataclass
from typing import Any, Dict, List, Optional

from .errors import ConfigError
from .patterns import ExtractionConfig
from .stats import ThresholdParams
from .utils import atomic_write

logger = logging.getLogger(__name__)

THREADS_ENV = "AFFECTLOG_THREADS"

# Story-level bootstrap settings: lower recall, very high precision.
BOOTSTRAP_POS = ThresholdParams(theta_f=10, theta_p=0.7, theta_n=3)
BOOTSTRAP_NEG = ThresholdParams(theta_f=10, theta_p=0.85, theta_n=4)


@dataclass
class BootstrapConfig:
    """Story-level bootstrapping configuration"""
    pos: ThresholdParams = BOOTSTRAP_POS
    neg: ThresholdParams = BOOTSTRAP_NEG
    max_rounds: int = 1


@dataclass
class LexiconConfig:
    """Lexicon baseline configuration"""
    tau: float = 0.0


@dataclass
class LinearConfig:
    """Linear unigram baseline training configuration"""
    epochs: int = 50
    learning_rate: float = 0.1
    reg: float = 1e-4


@dataclass
class AffectConfig:
    """Possession-affect induction configuration"""
    threshold: float = 0.7
    min_freq: int = 1
    have_verbs: List[str] = field(default_factory=lambda: ["have", "get", "got", "own", "receive"])
    lack_verbs: List[str] = field(default_factory=lambda: ["lose", "lack", "miss"])


@dataclass
class RunConfig:
    """Execution configuration"""
    threads: int = 0


@dataclass
class AppConfig:
    """Main application configuration"""
    extraction: ExtractionConfig
    bootstrap: BootstrapConfig
    lexicon: LexiconConfig
    linear: LinearConfig
    affect: AffectConfig
    run: RunConfig

    def __init__(self):
        self.extraction = ExtractionConfig()
        self.bootstrap = BootstrapConfig()
        self.lexicon = LexiconConfig()
        self.linear = LinearConfig()
        self.affect = AffectConfig()
        self.run = RunConfig()


SECTIONS = ("extraction", "bootstrap", "lexicon", "linear", "affect", "run")


def _coerce(current: Any, value: Any, where: str) -> Any:
    """Convert a JSON value to the type of the field it replaces."""
    if isinstance(current, ThresholdParams):
        if not isinstance(value, dict):
            raise ConfigError(f"{where}: expected an object with theta_f/theta_p/theta_n")
        try:
            return ThresholdParams.from_dict(value)
        except (KeyError, TypeError, ValueError) as e:
            raise ConfigError(f"{where}: {e}") from e
    if isinstance(current, bool):
        if not isinstance(value, bool):
            raise ConfigError(f"{where}: expected true/false, got {value!r}")
        return value
    if isinstance(current, (int, float)):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{where}: expected a number, got {value!r}")
        return type(current)(value)
    if isinstance(current, (list, dict)) and not isinstance(value, type(current)):
        raise ConfigError(f"{where}: expected {type(current).__name__}, got {value!r}")
    return value


def _section_dict(section: Any) -> Dict[str, Any]:
    return {f.name: _jsonable(getattr(section, f.name)) for f in fields(section)}


def _jsonable(value: Any) -> Any:
    if isinstance(value, ThresholdParams):
        return value.to_dict()
    if is_dataclass(value):
        return asdict(value)
    return value


class ConfigManager:
    """Manages run configuration with file persistence"""

    def __init__(self, config_file: Optional[str] = None):
        self.config_file = config_file
        self.config = AppConfig()
        if config_file:
            self.load_config()

    def load_config(self):
        """Load configuration from file; a missing file leaves the defaults"""
        if not os.path.exists(self.config_file):
            logger.info("No config file at %s, using defaults", self.config_file)
            return
        try:
            with open(self.config_file, "r", encoding="utf-8") as f:
                data = json.load(f)
        except json.JSONDecodeError as e:
            raise ConfigError(f"{self.config_file}: invalid JSON ({e})") from e
        if not isinstance(data, dict):
            raise ConfigError(f"{self.config_file}: top level must be an object")

        for name in SECTIONS:
            if name in data:
                self._apply(name, data[name])
        logger.info("Configuration loaded from %s", self.config_file)

    def _apply(self, name: str, updates: Dict[str, Any]):
        section = getattr(self.config, name)
        if not isinstance(updates, dict):
            raise ConfigError(f"section '{name}' must be an object")
        for key, value in updates.items():
            if hasattr(section, key):
                where = f"{name}.{key}"
                setattr(section, key, _coerce(getattr(section, key), value, where))
            else:
                logger.warning("Ignoring unknown config key %s.%s", name, key)

    def save_config(self, path: Optional[str] = None):
        """Save current configuration to file"""
        target = path or self.config_file
        if not target:
            raise ConfigError("no config file to save to")
        atomic_write(target, json.dumps(self.get_config_dict(), indent=2) + "\n")
        logger.info("Configuration saved to %s", target)

    def update_config(self, section: str, updates: Dict[str, Any]):
        """Update a configuration section in memory"""
        if section not in SECTIONS:
            raise ConfigError(f"unknown config section '{section}'")
        self._apply(section, updates)

    def get_config_dict(self) -> Dict[str, Any]:
        """Get configuration as dictionary"""
        return {name: _section_dict(getattr(self.config, name)) for name in SECTIONS}

    def reset_to_defaults(self):
        """Reset configuration to default values"""
        self.config = AppConfig()

    def thread_count(self) -> int:
        """Worker count: AFFECTLOG_THREADS overrides run.threads; 0 means auto"""
        raw = os.environ.get(THREADS_ENV)
        threads = self.config.run.threads
        if raw not in (None, ""):
            try:
                threads = int(raw)
            except ValueError as e:
                raise ConfigError(f"{THREADS_ENV} must be an integer, got {raw!r}") from e
        if threads < 0:
            raise ConfigError(f"thread count must be >= 0, got {threads}")
        return threads or (os.cpu_count() or 1)
