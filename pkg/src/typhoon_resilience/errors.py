"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of the model being evaluated."""


class SchemaError(ValueError):
    """An input file does not match its documented layout."""


class ValidationError(ValueError):
    """Input data is well-formed but violates a model invariant."""


class DegenerateDataError(ValueError):
    """Training or weighting data carries no usable information."""
