class ConfigError(ValueError):
    """Invalid run configuration or model specification."""


class DataError(ValueError):
    """Malformed input data."""


class DegenerateError(ValueError):
    """A statistic is undefined for the given input (e.g. zero variance)."""


class ModelError(RuntimeError):
    """A classifier failed inside a larger computation; the message says where."""
