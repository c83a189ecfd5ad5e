"""Exception types shared across modules.

Validation problems raise :class:`ValueError` subclasses (``ChainError``);
numerical failures raise :class:`NumericalError` subclasses.
"""


class NumericalError(ArithmeticError):
    pass


class UnstableDynamicsError(NumericalError):
    """The drift matrix is not Hurwitz, so no steady state exists."""

    def __init__(self, message, eigenvalue=None):
        super().__init__(message)
        self.eigenvalue = eigenvalue


class NonPhysicalStateError(NumericalError):
    pass


class TruncationLeakError(NumericalError):
    pass


class NotPSDError(NumericalError):
    """A dissipation matrix has an eigenvalue below the allowed tolerance."""
