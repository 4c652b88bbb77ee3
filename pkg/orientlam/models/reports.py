"""Pydantic models for validation, estimate and repair reports."""

from typing import Any, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator

from orientlam.enums import RepairStage


class NodeCheck(BaseModel):
    """Residuals measured at one internal node of a splitting tree."""

    path: str = Field(..., description="Node path from the root ('' root, 'L'/'R' children)")
    barycenter_residual: float = Field(..., description="Relative |N - (t L + (1-t) R)|")
    rank_one_defect: float = Field(..., description="Second singular value of L - R")
    rank_one_tolerance: float = Field(..., description="Tolerance used for the rank-one test")
    passed: bool = Field(..., description="Both node tests pass")


class ValidationReport(BaseModel):
    """Result of checking the (H_m) witness of a laminate."""

    passed: bool = Field(..., description="All invariants hold")
    weight_sum_error: float = Field(..., description="|sum of atom weights - 1|")
    root_residual: float = Field(..., description="Relative distance of root to the atom mean")
    max_barycenter_residual: float = Field(0.0, description="Worst node barycenter residual")
    max_rank_one_defect: float = Field(0.0, description="Worst node rank-one defect")
    nodes: List[NodeCheck] = Field(default_factory=list, description="Per-node checks")

    @property
    def failures(self) -> List[NodeCheck]:
        """Nodes that failed."""
        return [node for node in self.nodes if not node.passed]


class EstimateCheck(BaseModel):
    """One measured quantity compared against its explicit bound."""

    name: str = Field(..., description="Check identifier")
    measured: float = Field(..., description="Measured value")
    bound: float = Field(..., description="Bound (or expected value)")
    passed: bool = Field(..., description="Whether the check passes")
    note: str = Field("", description="Free-form remark, e.g. exemption reason")


class EstimateReport(BaseModel):
    """Collection of estimate checks for one construction."""

    title: str = Field(..., description="Construction name")
    checks: List[EstimateCheck] = Field(default_factory=list, description="Checks in order")
    truncated: bool = Field(False, description="Construction stopped at the underflow floor")

    @property
    def passed(self) -> bool:
        """True if every check passes."""
        return all(check.passed for check in self.checks)

    def add(self, name: str, measured: float, bound: float, passed: bool, note: str = "") -> None:
        """Append a check."""
        self.checks.append(
            EstimateCheck(
                name=name, measured=float(measured), bound=float(bound), passed=passed, note=note
            )
        )

    def get(self, name: str) -> EstimateCheck:
        """Look up a check by name."""
        for check in self.checks:
            if check.name == name:
                return check
        raise KeyError(name)

    @staticmethod
    def header() -> Tuple[str, ...]:
        return ("check", "measured", "bound", "pass", "note")

    def rows(self) -> List[Tuple[Any, ...]]:
        return [(c.name, c.measured, c.bound, c.passed, c.note) for c in self.checks]


class LaminateStats(BaseModel):
    """Moment and determinant statistics of a discrete measure on matrices."""

    mass_det_neg: float = Field(..., ge=0.0, le=1.0 + 1e-12)
    mass_det_zero: float = Field(..., ge=0.0, le=1.0 + 1e-12)
    mass_det_pos: float = Field(..., ge=0.0, le=1.0 + 1e-12)
    p_moment: float = Field(..., ge=0.0)
    centered_p_moment: float = Field(..., ge=0.0)
    det_integral: float
    neg_det_q_moment: float = Field(..., ge=0.0, description="Integral of |det|^q over det < 0")

    @staticmethod
    def header() -> Tuple[str, ...]:
        return (
            "mass_det_neg",
            "mass_det_zero",
            "mass_det_pos",
            "p_moment",
            "centered_p_moment",
            "det_integral",
            "neg_det_q_moment",
        )

    def to_row(self) -> Tuple[float, ...]:
        """Flat CSV row in header order."""
        return tuple(getattr(self, name) for name in self.header())


class FieldStats(BaseModel):
    """Volume-weighted statistics of a piecewise-constant gradient field."""

    neg_mass: float = Field(..., ge=0.0, description="Volume where det < 0")
    zero_mass: float = Field(..., ge=0.0, description="Volume where det = 0 within tolerance")
    det_deficiency: float = Field(..., ge=0.0, description="Integral of |det|^(p/d) over det < 0")
    p_norm: float = Field(..., ge=0.0, description="L^p norm of the field")
    min_det: float = Field(..., description="Smallest piece determinant")
    pieces: int = Field(..., ge=1, description="Total number of pieces")


class EnergyRecord(BaseModel):
    """Field energy against measure-level energy at one repair stage."""

    stage: RepairStage
    l: int = Field(..., ge=0)
    field_energy: float = Field(..., description="Integral of f over the realized field")
    measure_energy: float = Field(..., description="Same integral over the per-piece laminates")


class RepairStep(BaseModel):
    """One row of a repair trace."""

    l: int = Field(..., ge=0, description="Iteration index (0 is the input state)")
    stage: RepairStage = Field(..., description="Kind of step")
    neg_mass: float = Field(..., ge=0.0)
    zero_mass: float = Field(..., ge=0.0)
    det_deficiency: float = Field(..., ge=0.0)
    lp_step: float = Field(0.0, ge=0.0, description="L^p distance to the previous iterate")
    lp_bound: Optional[float] = Field(None, description="Bound the step must respect")
    changed_on_good: float = Field(0.0, ge=0.0, description="Changed volume where det >= 0")
    level: Optional[int] = Field(None, description="Lamination level used")
    delta: Optional[float] = Field(None, description="Shift size or lift size used")
    pieces: int = Field(..., ge=1, description="Number of pieces after the step")

    @field_validator("neg_mass", "zero_mass")
    @classmethod
    def validate_mass(cls, v: float) -> float:
        """Masses are volume fractions."""
        if v > 1.0 + 1e-12:
            raise ValueError(f"Mass must not exceed 1, got {v}")
        return v


class RepairTrace(BaseModel):
    """Per-iteration record of a repair pipeline."""

    p: float = Field(..., description="Integrability exponent")
    steps: List[RepairStep] = Field(default_factory=list)
    energy: List[EnergyRecord] = Field(default_factory=list)

    @property
    def iterations(self) -> int:
        """Number of recorded steps after the initial state."""
        return len(self.steps) - 1

    @property
    def initial(self) -> RepairStep:
        return self.steps[0]

    @property
    def final(self) -> RepairStep:
        return self.steps[-1]

    @staticmethod
    def header() -> Tuple[str, ...]:
        return (
            "l",
            "stage",
            "neg_mass",
            "zero_mass",
            "det_deficiency",
            "lp_step",
            "changed_on_good",
            "lp_bound",
            "level",
            "delta",
            "pieces",
        )

    def rows(self) -> List[Tuple[Any, ...]]:
        return [
            (
                s.l,
                s.stage.value,
                s.neg_mass,
                s.zero_mass,
                s.det_deficiency,
                s.lp_step,
                s.changed_on_good,
                s.lp_bound,
                s.level,
                s.delta,
                s.pieces,
            )
            for s in self.steps
        ]


class EnergyReport(BaseModel):
    """Energy tracking along the weak and strict repair pipelines."""

    integrand: str = Field(..., description="Integrand tag")
    records: List[EnergyRecord] = Field(default_factory=list)
    final_field_energy: float
    final_measure_energy: float
    tolerance: float = Field(..., description="Reported discretization tolerance")

    @property
    def gap(self) -> float:
        """|I(G_final) - I^YM|."""
        return abs(self.final_field_energy - self.final_measure_energy)

    @property
    def passed(self) -> bool:
        return self.gap <= self.tolerance

    @staticmethod
    def header() -> Tuple[str, ...]:
        return ("pipeline_row", "stage", "l", "field_energy", "measure_energy", "gap")

    def rows(self) -> List[Tuple[Any, ...]]:
        return [
            (
                i,
                r.stage.value,
                r.l,
                r.field_energy,
                r.measure_energy,
                abs(r.field_energy - r.measure_energy),
            )
            for i, r in enumerate(self.records)
        ]


class SuiteRow(BaseModel):
    """One acceptance criterion result."""

    model_config = ConfigDict(frozen=True)

    criterion: str
    measured: float
    bound: float
    passed: bool
    detail: str = ""

    @staticmethod
    def header() -> Tuple[str, ...]:
        return ("criterion", "measured", "bound", "pass", "detail")

    def to_row(self) -> Tuple[Any, ...]:
        return (self.criterion, self.measured, self.bound, self.passed, self.detail)


class ScanRow(BaseModel):
    """Centered moment of the level-j measure at one exponent."""

    p: float
    j: int = Field(..., ge=0)
    moment_centered: float = Field(..., ge=0.0)
    increment: float = Field(..., description="moment(j) - moment(j - 1)")
    det_integral: float
    bound: Optional[float] = Field(None, description="Explicit bound when p < d")
    passed: bool

    @staticmethod
    def header() -> Tuple[str, ...]:
        return ("p", "j", "moment_centered", "increment", "det_integral", "bound", "pass")

    def to_row(self) -> Tuple[Any, ...]:
        return (
            self.p,
            self.j,
            self.moment_centered,
            self.increment,
            self.det_integral,
            self.bound,
            self.passed,
        )
