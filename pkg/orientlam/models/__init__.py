"""Models for orientlam."""

from orientlam.models.config import DeltaSchedule, RepairSchedule, RunConfig
from orientlam.models.integrand import Integrand, resolve_integrand
from orientlam.models.reports import (
    EnergyRecord,
    EnergyReport,
    EstimateCheck,
    EstimateReport,
    FieldStats,
    LaminateStats,
    NodeCheck,
    RepairStep,
    RepairTrace,
    ScanRow,
    SuiteRow,
    ValidationReport,
)

__all__ = [
    "DeltaSchedule",
    "RepairSchedule",
    "RunConfig",
    "Integrand",
    "resolve_integrand",
    "EnergyRecord",
    "EnergyReport",
    "EstimateCheck",
    "EstimateReport",
    "FieldStats",
    "LaminateStats",
    "NodeCheck",
    "RepairStep",
    "RepairTrace",
    "ScanRow",
    "SuiteRow",
    "ValidationReport",
]
