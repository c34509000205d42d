"""Exception types shared across the package."""


class NovabotError(Exception):
    """Base class for all package errors."""


class ConfigError(NovabotError, ValueError):
    """Invalid configuration, detected before any simulation work starts."""


class SnapshotError(NovabotError, ValueError):
    """Malformed or unsupported tumor snapshot file."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class SimulationError(NovabotError, RuntimeError):
    """The simulator was given input it cannot run (e.g. an empty tumor)."""


class EvaluationError(NovabotError, RuntimeError):
    """An evaluator failed; the generation in progress is discarded."""
