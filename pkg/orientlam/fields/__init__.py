"""Piecewise-constant gradient fields and their orientation repair."""

from orientlam.fields.energy import energy_compare
from orientlam.fields.grid import (
    GradientField,
    Slabs,
    constant_field,
    field_energy,
    field_from_dict,
    field_stats,
    field_to_dict,
    lp_distance,
    make_field,
)
from orientlam.fields.repair import drift, strict_repair, weak_repair, zero_mass_envelope

__all__ = [
    "GradientField",
    "Slabs",
    "constant_field",
    "make_field",
    "field_stats",
    "field_energy",
    "lp_distance",
    "field_to_dict",
    "field_from_dict",
    "weak_repair",
    "strict_repair",
    "drift",
    "zero_mass_envelope",
    "energy_compare",
]
