"""Exception hierarchy.

Exit codes: config errors exit 2, data errors exit 3, protocol errors exit 4.
"""


class MtadaptError(Exception):
    exit_code = 1


class ConfigError(MtadaptError):
    """Invalid configuration: bad paths, bad thresholds, malformed config file."""

    exit_code = 2


class DataError(MtadaptError):
    """Invalid or inconsistent input data."""

    exit_code = 3


class ProtocolError(MtadaptError):
    """Embedding provider misbehaved."""

    exit_code = 4


class TransportError(ProtocolError):
    """Provider unavailable or sent garbage; safe to retry."""


class DimensionMismatchError(ProtocolError):
    """Vector length disagrees with the provider's declared dimension; fatal."""
