"""Exception hierarchy. The CLI maps these to exit codes (config 1, data 2,
backend 3)."""


class ExplicitationError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(ExplicitationError):
    """Invalid configuration: bad paths, malformed config files, incompatible
    backend/mode combinations."""


class DataError(ExplicitationError):
    """Corpus-level problem: undecodable files, malformed records in strict
    mode, schema violations in serialized artifacts."""


class BackendError(ExplicitationError):
    """Scoring or classification backend failure: unsupported mode, transport
    errors, non-finite or malformed model output."""
