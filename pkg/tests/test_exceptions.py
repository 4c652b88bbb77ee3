"""Tests for custom exceptions."""

import pytest

from orientlam.exceptions import (
    BadFormError,
    BarycenterViolationError,
    ConfigInvalidError,
    ConfigurationError,
    ConstructionError,
    DepthExceededError,
    FieldError,
    IncompatibleSplitError,
    InvalidMatrixError,
    LaminateError,
    MatrixError,
    MismatchedInputsError,
    NoConvergenceError,
    NonpositiveDeltaError,
    NotALeafError,
    NotNegativeDetError,
    NotRotationError,
    NotUnitNormalError,
    NotWeaklyOrientedError,
    OrientLamError,
    RealizationError,
    ScheduleExhaustedError,
    SingularInputError,
    SubdivisionOverflowError,
    UnknownGeneratorError,
    UnknownIntegrandError,
)


class TestOrientLamError:
    """Tests for base OrientLamError."""

    def test_creation(self):
        """Test creating base error."""
        error = OrientLamError("Test error")
        assert str(error) == "Test error"
        assert isinstance(error, Exception)


class TestHierarchy:
    """Tests for the exception tree."""

    @pytest.mark.parametrize(
        "error_cls, parent",
        [
            (SingularInputError, MatrixError),
            (NoConvergenceError, MatrixError),
            (NotRotationError, MatrixError),
            (InvalidMatrixError, MatrixError),
            (BarycenterViolationError, LaminateError),
            (NotALeafError, LaminateError),
            (UnknownIntegrandError, LaminateError),
            (BadFormError, ConstructionError),
            (NotNegativeDetError, ConstructionError),
            (NonpositiveDeltaError, ConstructionError),
            (MismatchedInputsError, ConstructionError),
            (UnknownGeneratorError, FieldError),
            (ScheduleExhaustedError, FieldError),
            (SubdivisionOverflowError, FieldError),
            (NotWeaklyOrientedError, FieldError),
            (DepthExceededError, RealizationError),
            (NotUnitNormalError, RealizationError),
            (IncompatibleSplitError, RealizationError),
            (ConfigInvalidError, ConfigurationError),
        ],
    )
    def test_parent(self, error_cls, parent):
        """Test every error derives from its family and the base."""
        error = error_cls("boom")
        assert isinstance(error, parent)
        assert isinstance(error, OrientLamError)


class TestErrorAttributes:
    """Tests for errors carrying extra context."""

    def test_no_convergence(self):
        """Test NoConvergenceError keeps sweeps and residual."""
        error = NoConvergenceError("stuck", sweeps=200, off_norm=1e-3)
        assert error.sweeps == 200
        assert error.off_norm == 1e-3

    def test_no_convergence_defaults(self):
        """Test NoConvergenceError defaults."""
        error = NoConvergenceError("stuck")
        assert error.sweeps is None
        assert error.off_norm is None

    def test_schedule_exhausted(self):
        """Test ScheduleExhaustedError keeps the iteration."""
        error = ScheduleExhaustedError("cap", iteration=3)
        assert error.iteration == 3
        assert str(error) == "cap"

    def test_config_invalid(self):
        """Test ConfigInvalidError keeps the field name."""
        error = ConfigInvalidError("bad p", field="p")
        assert error.field == "p"
        assert ConfigInvalidError("bad").field is None
