"""Exception types shared across the package."""


class HgBenchError(Exception):
    """Base class for all package errors."""


class HypergraphError(HgBenchError):
    """Invalid hypergraph construction or operation."""


class DimensionError(HgBenchError):
    """Shape-incompatible tensor operation."""


class DatasetLoadError(HgBenchError):
    """Malformed dataset file; message carries file and line."""


class ConfigError(HgBenchError):
    """Invalid experiment configuration."""


class SamplingError(HgBenchError):
    """Negative sampler could not produce a valid candidate."""


class TrainingDiverged(HgBenchError):
    """Non-finite training loss; carries the per-epoch trace."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace or []


class MemoryCapExceeded(HgBenchError):
    """Tracked allocation would exceed the configured cap (OOM stand-in)."""
