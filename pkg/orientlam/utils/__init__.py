"""Utilities for orientlam."""

from orientlam.utils.matrix import (
    RotSVD,
    as_matrix,
    determinant,
    determinants,
    frobenius_norm,
    frobenius_norms,
    is_rotation,
    lift_singular_values,
    nearest_zero_det,
    outer,
    rank_one_defect,
    signed_svd,
)
from orientlam.utils.rng import make_rng
from orientlam.utils.serialization import (
    csv_text,
    format_real,
    matrix_to_list,
    parse_matrix,
    write_csv,
    write_json,
)

__all__ = [
    "RotSVD",
    "as_matrix",
    "determinant",
    "determinants",
    "frobenius_norm",
    "frobenius_norms",
    "is_rotation",
    "lift_singular_values",
    "nearest_zero_det",
    "outer",
    "rank_one_defect",
    "signed_svd",
    "make_rng",
    "csv_text",
    "format_real",
    "matrix_to_list",
    "parse_matrix",
    "write_csv",
    "write_json",
]
