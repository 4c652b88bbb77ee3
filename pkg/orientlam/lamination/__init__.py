"""Lamination constructions."""

from orientlam.lamination.delta_shift import (
    DeltaBuild,
    build_delta_laminate,
    sign_balance,
    verify_delta,
)
from orientlam.lamination.zero_det import (
    GeomParams,
    LabeledAtom,
    LevelRecord,
    ZeroDetBuild,
    build_zero_det_laminate,
    decompose_step,
    naive_split,
    rigidity_scan,
    verify_geometry,
)

__all__ = [
    "DeltaBuild",
    "build_delta_laminate",
    "sign_balance",
    "verify_delta",
    "GeomParams",
    "LabeledAtom",
    "LevelRecord",
    "ZeroDetBuild",
    "build_zero_det_laminate",
    "decompose_step",
    "naive_split",
    "rigidity_scan",
    "verify_geometry",
]
