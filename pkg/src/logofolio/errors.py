"""Exception types raised across the package."""

import numpy as np


class ValidationError(ValueError):
    """Input violates a documented invariant or precondition."""


class ParseError(ValidationError):
    """A data file could not be parsed."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class NotPositiveDefiniteError(np.linalg.LinAlgError):
    """A matrix that must be symmetric positive definite is not."""
