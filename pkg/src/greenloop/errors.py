"""Shared exception types."""


class ConfigError(ValueError):
    """Invalid configuration, file format, or CLI usage (exit code 2)."""


class TrainingDiverged(RuntimeError):
    """Training aborted on a non-finite loss (exit code 3)."""
