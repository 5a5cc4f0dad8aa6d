"""Exception types shared across the toolkit."""


class CodePoisonError(Exception):
    """Base class for all toolkit errors."""


class CorpusIntegrityError(CodePoisonError):
    """Too many malformed lines in an input corpus file."""


class LexError(CodePoisonError):
    """Lexing failed; carries the byte offset of the offending construct."""

    def __init__(self, message, offset, line=None):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset
        self.line = line


class CapacityError(CodePoisonError):
    """Requested poison count exceeds the number of eligible samples."""

    def __init__(self, requested, eligible):
        super().__init__(
            f"requested {requested} poisoned samples but only {eligible} are eligible"
        )
        self.requested = requested
        self.eligible = eligible


class CoverageError(CodePoisonError):
    """Prediction file does not cover the evaluation corpus."""

    def __init__(self, message, missing_ids=()):
        super().__init__(message)
        self.missing_ids = list(missing_ids)


class DegenerateInputError(CodePoisonError):
    """Input carries no usable signal (e.g. zero matrix after centering)."""


class DegenerateDataError(CodePoisonError):
    """Statistical test cannot be run on this data (e.g. all differences zero)."""


class TriggerServiceError(CodePoisonError):
    """Completion service unreachable after retries."""


class ConfigError(CodePoisonError):
    """Experiment configuration failed validation."""
