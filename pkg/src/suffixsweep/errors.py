"""Exception hierarchy shared across the package."""


class SuffixSweepError(Exception):
    """Base class for all errors raised by suffixsweep."""


class LogParseError(SuffixSweepError):
    """A log file could not be parsed (bad header, malformed timestamp, ...)."""


class LogValidationError(SuffixSweepError):
    """A parsed log violates a structural invariant (empty log, end < start, ...)."""


class EncodingError(SuffixSweepError):
    """A value could not be encoded, e.g. an activity label unseen at training time."""


class ConfigError(SuffixSweepError):
    """Invalid or inconsistent configuration."""


class PredictorError(SuffixSweepError):
    """A predictor failed to produce a prediction."""
