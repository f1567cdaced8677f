"""Exception types raised by the package."""

import numpy as np


class DomainError(ValueError):
    """An argument lies outside the domain where a formula is defined."""


class FactorizationError(np.linalg.LinAlgError):
    """A covariance matrix could not be factorized, even with maximal jitter."""


class SingularSystemError(np.linalg.LinAlgError):
    """A conditioning system became numerically singular.

    The attribute ``index`` holds the order of the first leading block that
    failed to factorize.
    """

    def __init__(self, message, index):
        super().__init__(message)
        self.index = index
