class InputError(ValueError):
    """Bad input: out-of-range entries, malformed files, violated preconditions."""


class ParseError(InputError):
    def __init__(self, message, line=None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class ResourceError(RuntimeError):
    """A configured evaluation or memory cap would be exceeded."""


class DomainError(InputError):
    """Integrand evaluated outside its domain or produced a non-finite value."""
