"""Exception types shared across the package."""


class ParseError(ValueError):
    """Malformed or empty edge-list input."""

    def __init__(self, message, lineno=None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


class ConvergenceError(RuntimeError):
    """An iterative solver ran out of iterations.

    ``residuals`` holds the best residual norms reached before giving up.
    """

    def __init__(self, message, residuals=None):
        self.residuals = residuals
        super().__init__(message)


class DomainError(ValueError):
    """A numerical argument lies outside the domain of a transformation."""


class FitError(ValueError):
    """A curve fit could not be attempted (too few points, degenerate data)."""
