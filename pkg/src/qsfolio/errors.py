"""Exception types shared across the package."""


class DataError(ValueError):
    """Malformed or insufficient market data (CSV schema, history, shapes)."""


class ParameterError(ValueError):
    """Parameter combination outside the numerically valid domain."""
