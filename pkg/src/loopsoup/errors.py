"""Exception types shared across the package.

The CLI maps these to exit codes: ValidationError -> 2, NumericError -> 3,
ConfigError -> 4. Library code raises them directly.
"""


class ValidationError(ValueError):
    """Malformed or inconsistent input data (graphs, words, group tables)."""


class NumericError(RuntimeError):
    """A numeric procedure failed to converge or left its valid regime."""


class ConfigError(Exception):
    """Bad CLI arguments or an unreadable/invalid input file."""
