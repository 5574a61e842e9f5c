class SarnetError(Exception):
    """Base class for errors raised by sarnet."""


class ParseError(SarnetError, ValueError):
    """Malformed input document. ``lineno`` is 1-based when known."""

    def __init__(self, message, lineno=None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


class ValidationError(SarnetError, ValueError):
    pass


class NoNonnegativeDFEError(SarnetError, ArithmeticError):
    """The singular rate matrix admits no non-negative equilibrium direction."""


class UndefinedR0Error(SarnetError, ArithmeticError):
    """Some set has neither an attacked-removal rate nor outgoing migration."""


class NegativeCompartmentWarning(RuntimeWarning):
    pass
