"""Exception hierarchy shared by every module."""


class GrlmpError(Exception):
    """Base class for all library errors."""


class DomainError(GrlmpError, ValueError):
    """An argument lies outside the domain where an operation is defined."""


class RangeError(GrlmpError, ValueError):
    """A combined point would leave the operation's interval."""


class DegenerateError(GrlmpError, ValueError):
    """Data carry no information about the requested parameter."""


class QuadratureError(GrlmpError, ArithmeticError):
    """A quadrature rule missed its requested tolerance."""
