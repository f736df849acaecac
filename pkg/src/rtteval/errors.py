"""Exception taxonomy. CLI exit codes map onto these classes."""


class RttevalError(Exception):
    """Base class for all package errors."""


class ConfigError(RttevalError):
    """User or configuration error (CLI exit code 2)."""


class AlignmentError(ConfigError):
    """Files that must align line-for-line do not."""


class ParseError(ConfigError):
    """Malformed input file; message carries the offending line number."""


class MissingResourceError(RttevalError):
    """A metric's required resource (embeddings, idf, ...) is absent (exit 3)."""


class ProviderError(RttevalError):
    """External provider failed after exhausting retries (exit 4)."""

    def __init__(self, message, failed_indices=None):
        super().__init__(message)
        self.failed_indices = list(failed_indices or [])
