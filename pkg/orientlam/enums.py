"""Enums for orientlam."""

from enum import Enum
from typing import Type, TypeVar

_E = TypeVar("_E", bound="_TagEnum")


class _TagEnum(str, Enum):
    """String enum parsed from user-facing tags."""

    @classmethod
    def from_string(cls: Type[_E], value: str) -> _E:
        """Convert string to enum, case-insensitive."""
        value_lower = value.strip().lower()
        for member in cls:
            if member.value == value_lower:
                return member
        raise ValueError(
            f"Unsupported {cls.__name__}: {value}. Supported: {', '.join(m.value for m in cls)}"
        )


class SVDOrdering(_TagEnum):
    """Canonical forms of the signed singular value decomposition."""

    NEG_FIRST_ASCENDING = "neg-first-ascending"
    ABS_DESCENDING = "abs-descending"


class AtomLabel(_TagEnum):
    """Role of a leaf in the zero-determinant construction."""

    GOOD = "good"  # zero determinant, final
    BAD = "bad"  # negative determinant, split again on the next level
    PLAIN = "plain"  # no role (generic laminates)


class IntegrandKind(_TagEnum):
    """Closed bank of integrands for energy evaluation."""

    PNORM = "pnorm"  # |A|^p
    DET = "det"  # det A
    NEGDET_Q = "negdet_q"  # |det A|^q on det A < 0
    STVENANT = "stvenant"  # c1 |A|^p + c2 g(det A)


class FieldGenerator(_TagEnum):
    """Generators for synthetic gradient fields."""

    CONSTANT = "constant"
    SMOOTH_VORTEX = "smooth-vortex"
    RANDOM_PER_CELL = "random-per-cell"


class RepairStage(_TagEnum):
    """Kind of a recorded repair step."""

    INITIAL = "initial"
    LAMINATE = "laminate"  # zero-determinant lamination of det<0 pieces
    SPLIT = "split"  # delta-shift lamination of det=0 pieces
    CLOSE = "close"  # terminal projection


class Command(_TagEnum):
    """CLI commands."""

    ZERO_DET = "zero-det"
    DELTA_SHIFT = "delta-shift"
    REPAIR = "repair"
    STRICT_REPAIR = "strict-repair"
    RIGIDITY_SCAN = "rigidity-scan"
    REALIZE = "realize"
    ENERGY = "energy"
    VERIFY_SUITE = "verify-suite"
