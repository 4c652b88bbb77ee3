"""Orientation-preserving laminates and gradient-field repair."""

from orientlam.enums import (
    AtomLabel,
    Command,
    FieldGenerator,
    IntegrandKind,
    RepairStage,
    SVDOrdering,
)
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
from orientlam.fields import (
    GradientField,
    energy_compare,
    field_stats,
    make_field,
    strict_repair,
    weak_repair,
)
from orientlam.laminate import (
    Laminate,
    Leaf,
    Split,
    barycenter,
    dirac,
    energy,
    p_moment,
    pushforward_rotation,
    rank_one_split,
    statistics,
    validate_hm,
)
from orientlam.lamination import (
    build_delta_laminate,
    build_zero_det_laminate,
    rigidity_scan,
    verify_delta,
    verify_geometry,
)
from orientlam.models import Integrand, RunConfig
from orientlam.realization import (
    SawtoothMap,
    gradient_histogram,
    histogram_tv,
    realize_laminate,
)
from orientlam.utils.matrix import RotSVD, signed_svd

__version__ = "0.1.0"

__all__ = [
    "SVDOrdering",
    "AtomLabel",
    "IntegrandKind",
    "FieldGenerator",
    "RepairStage",
    "Command",
    "RotSVD",
    "signed_svd",
    "Laminate",
    "Leaf",
    "Split",
    "dirac",
    "rank_one_split",
    "validate_hm",
    "barycenter",
    "p_moment",
    "statistics",
    "pushforward_rotation",
    "energy",
    "build_zero_det_laminate",
    "verify_geometry",
    "rigidity_scan",
    "build_delta_laminate",
    "verify_delta",
    "GradientField",
    "make_field",
    "field_stats",
    "weak_repair",
    "strict_repair",
    "energy_compare",
    "SawtoothMap",
    "realize_laminate",
    "gradient_histogram",
    "histogram_tv",
    "Integrand",
    "RunConfig",
    "OrientLamError",
    "MatrixError",
    "SingularInputError",
    "NoConvergenceError",
    "NotRotationError",
    "InvalidMatrixError",
    "LaminateError",
    "BarycenterViolationError",
    "NotALeafError",
    "UnknownIntegrandError",
    "ConstructionError",
    "BadFormError",
    "NotNegativeDetError",
    "NonpositiveDeltaError",
    "MismatchedInputsError",
    "FieldError",
    "UnknownGeneratorError",
    "ScheduleExhaustedError",
    "SubdivisionOverflowError",
    "NotWeaklyOrientedError",
    "RealizationError",
    "DepthExceededError",
    "NotUnitNormalError",
    "IncompatibleSplitError",
    "ConfigurationError",
    "ConfigInvalidError",
]
