"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Raised when a parameter or input fails a precondition check.

    Subclasses ValueError so callers that only know stdlib semantics still
    catch it, while the CLI can map it to a dedicated exit code.
    """
