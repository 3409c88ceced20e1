"""Exception hierarchy shared by every module."""


class VerificationError(Exception):
    """Base class for all errors raised by bohrepr."""


class NotSquare(VerificationError):
    pass


class NotSelfAdjoint(VerificationError):
    def __init__(self, residual, message=None):
        self.residual = float(residual)
        super().__init__(message or f"matrix is not self-adjoint: ||H - H*|| = {self.residual:.3e}")


class DimensionMismatch(VerificationError):
    pass


class ConsistencyError(VerificationError):
    """Two independent computations of the same object disagree."""


class NotProjection(VerificationError):
    pass


class NotNormalized(VerificationError):
    pass


class NotEigenbasis(VerificationError):
    pass


class IncompleteBasis(VerificationError):
    pass


class NotMember(VerificationError):
    pass


class NotClassical(VerificationError):
    """Premise failure: the candidate algebra is not classical on the state."""


class BadDimension(VerificationError):
    pass


class DuplicateId(VerificationError):
    pass


class ScenarioError(VerificationError):
    """Invalid scenario file. ``path`` is a JSON-pointer-like field path."""

    def __init__(self, path, message):
        self.path = path
        super().__init__(f"{path}: {message}")
