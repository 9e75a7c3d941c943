"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """A run configuration is internally inconsistent or out of range."""


class KeyExhaustedError(ValueError):
    """A one-time-pad operation was attempted with too little key material."""


class InconsistentTranscriptError(RuntimeError):
    """Recorded protocol data is missing or contradicts itself."""


class ResourceLimitError(RuntimeError):
    """An operation would exceed a hard resource cap (e.g. dense vectors past 20 qubits)."""
