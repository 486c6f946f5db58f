"""Exception types shared across the toolkit."""


class TraceFormatError(ValueError):
    """A trace file violates the documented CSV format (header, order, values)."""


class DegenerateTraceError(ValueError):
    """A trace carries no usable signal (no distinct extrema / flat data)."""


class ConfigError(ValueError):
    """An analysis configuration document is invalid."""
