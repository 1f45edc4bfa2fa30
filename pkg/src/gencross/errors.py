"""Exception types shared across the package."""


class DomainError(ValueError):
    """Arguments outside the mathematical domain of an operation."""


class ConfigurationError(ValueError):
    """Grid, backend or method settings that cannot be honoured."""


class PreconditionError(ValueError):
    """Input data violates a documented precondition (support, mean, resolution)."""


class FieldFormatError(ValueError):
    """Malformed or truncated field file."""
