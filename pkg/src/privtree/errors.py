"""Exception hierarchy shared across the package."""


class PrivtreeError(Exception):
    """Base class for all errors raised by privtree."""


class ParseError(PrivtreeError, ValueError):
    """Malformed input file. ``line`` is 1-based when known."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class EncodingError(PrivtreeError, ValueError):
    pass


class ConfigurationError(PrivtreeError, ValueError):
    pass


class EmptyDatasetError(PrivtreeError, ValueError):
    pass


class SplitError(PrivtreeError, ValueError):
    pass


class SchemaError(PrivtreeError, ValueError):
    pass


class CapabilityError(PrivtreeError, TypeError):
    pass


class DegenerateModelError(PrivtreeError, RuntimeError):
    pass
