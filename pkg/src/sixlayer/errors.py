"""Exception types shared across the package."""


class SixLayerError(Exception):
    """Base class for every error raised by this package."""


class TaxonomyError(SixLayerError):
    """Invalid taxonomy document or unknown category reference."""


class ModelError(SixLayerError):
    """Structural violation in a scenario, entity, or property value."""


class ParseError(SixLayerError):
    """Input text is not well-formed JSON."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)
        self.line = line
        self.column = column


class SchemaError(SixLayerError):
    """Well-formed JSON that does not match the expected document schema."""


class QueryError(SixLayerError):
    """Invalid query argument: timestamp out of range, missing footprint, ..."""


class UnknownRuleError(SixLayerError):
    """A rule id outside the closed rule set was requested."""
