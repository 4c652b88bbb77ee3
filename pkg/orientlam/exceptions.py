"""Custom exceptions for orientlam library."""

from typing import Optional


class OrientLamError(Exception):
    """Base exception for all orientlam errors."""

    pass


class MatrixError(OrientLamError):
    """Raised when a matrix primitive cannot handle its input."""

    pass


class SingularInputError(MatrixError):
    """Raised when a canonical form needs det M < 0 and a nonzero smallest singular value."""

    pass


class NoConvergenceError(MatrixError):
    """Raised when the Jacobi iteration does not reach its tolerance."""

    def __init__(
        self, message: str, sweeps: Optional[int] = None, off_norm: Optional[float] = None
    ):
        super().__init__(message)
        self.sweeps = sweeps
        self.off_norm = off_norm


class NotRotationError(MatrixError):
    """Raised when a matrix expected in SO(d) is not a rotation."""

    pass


class InvalidMatrixError(MatrixError):
    """Raised when an input is not a finite square matrix of supported size."""

    pass


class LaminateError(OrientLamError):
    """Raised when a laminate operation is invalid."""

    pass


class BarycenterViolationError(LaminateError):
    """Raised when a split would move the barycenter."""

    pass


class NotALeafError(LaminateError):
    """Raised when a split targets an internal node or a missing leaf."""

    pass


class UnknownIntegrandError(LaminateError):
    """Raised when an integrand tag is not in the bank."""

    pass


class ConstructionError(OrientLamError):
    """Raised when a lamination construction gets unsuitable input."""

    pass


class BadFormError(ConstructionError):
    """Raised when a matrix is not in the canonical diagonal form."""

    pass


class NotNegativeDetError(ConstructionError):
    """Raised when a construction needs det M0 < 0."""

    pass


class NonpositiveDeltaError(ConstructionError):
    """Raised when the shift parameter delta is not positive."""

    pass


class MismatchedInputsError(ConstructionError):
    """Raised when a build is verified against inputs it was not built from."""

    pass


class FieldError(OrientLamError):
    """Raised when a gradient field pipeline fails."""

    pass


class UnknownGeneratorError(FieldError):
    """Raised when a field generator tag is unknown."""

    pass


class ScheduleExhaustedError(FieldError):
    """Raised when a level or delta schedule hits its cap before the test passes."""

    def __init__(self, message: str, iteration: Optional[int] = None):
        super().__init__(message)
        self.iteration = iteration


class SubdivisionOverflowError(FieldError):
    """Raised when the subcell budget would be exceeded."""

    pass


class NotWeaklyOrientedError(FieldError):
    """Raised when strict repair receives cells with negative determinant."""

    pass


class RealizationError(OrientLamError):
    """Raised when a laminate cannot be realized as a piecewise affine map."""

    pass


class DepthExceededError(RealizationError):
    """Raised when the laminate tree is deeper than the depth cap."""

    pass


class NotUnitNormalError(RealizationError):
    """Raised when a split normal is not of unit length."""

    pass


class IncompatibleSplitError(RealizationError):
    """Raised when a tree node is not a rank-one split."""

    pass


class ConfigurationError(OrientLamError):
    """Raised when a run configuration is invalid."""

    pass


class ConfigInvalidError(ConfigurationError):
    """Raised when a run configuration field is invalid."""

    def __init__(self, message: str, field: Optional[str] = None):
        super().__init__(message)
        self.field = field
