"""Exception hierarchy for the affectlog toolkit."""

from typing import Optional


class AffectlogError(Exception):
    """Base class for every error raised by affectlog."""


class CorpusParseError(AffectlogError):
    """Malformed CoNLL-U input."""

    def __init__(self, message: str, line_no: Optional[int] = None):
        self.line_no = line_no
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)


class TreeError(AffectlogError):
    """A sentence whose head indices do not form a single rooted tree."""

    def __init__(self, message: str, sent_id: str):
        self.sent_id = sent_id
        super().__init__(f"sentence {sent_id}: {message}")


class PreconditionError(AffectlogError):
    pass


class StatsError(AffectlogError):
    pass


class SeedError(AffectlogError):
    """Seed data that cannot support class-conditional statistics."""


class StageError(AffectlogError):
    """A cascade stage failed while classifying a unit."""

    def __init__(self, stage_name: str, cause: BaseException):
        self.stage_name = stage_name
        super().__init__(f"stage '{stage_name}' failed: {cause}")


class ConfigError(AffectlogError):
    pass


class EvalError(AffectlogError):
    pass
