"""Exception types shared across the package.

The CLI maps these onto exit codes: ConfigError -> 2, DataError (and
subclasses) -> 3, NumericsError -> 4.
"""


class ConfigError(Exception):
    """Invalid or inconsistent configuration (bad option, checkpoint mismatch)."""


class DataError(Exception):
    """Corpus or file problem: missing manifest, unreadable sample, bad layout."""


class GenerationError(DataError):
    """Synthetic-forgery generation failed (e.g. no valid placement after retries)."""


class AttackError(DataError):
    """Robustness attack failed (e.g. JPEG codec error)."""


class NumericsError(Exception):
    """Numerical failure during optimization (NaN/inf loss)."""
