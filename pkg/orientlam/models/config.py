"""Run configuration and iteration schedules."""

from pathlib import Path
from typing import Any, List, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from orientlam.constants import (
    DEFAULT_BUDGET,
    DEFAULT_DELTA0,
    DEFAULT_LEVEL_OFFSET,
    DEFAULT_SEED,
    MAX_LEVELS,
    MAX_REALIZATION_DEPTH,
)
from orientlam.enums import Command, FieldGenerator
from orientlam.exceptions import ConfigInvalidError, InvalidMatrixError
from orientlam.utils.matrix import as_matrix


class RepairSchedule(BaseModel):
    """Level schedule j(l) = l + level_offset for weak repair."""

    model_config = ConfigDict(frozen=True)

    level_offset: int = Field(DEFAULT_LEVEL_OFFSET, ge=0, description="j0 in j(l) = l + j0")
    max_level: int = Field(MAX_LEVELS, ge=1, le=MAX_LEVELS, description="Escalation cap")

    def level(self, l: int) -> int:
        """Initial lamination level for iteration l."""
        return max(1, l + self.level_offset)


class DeltaSchedule(BaseModel):
    """Shift schedule delta_l = delta0 * 2^-l for strict repair."""

    model_config = ConfigDict(frozen=True)

    delta0: float = Field(DEFAULT_DELTA0, gt=0.0, description="Initial shift size")

    def delta(self, l: int) -> float:
        """Initial shift size for iteration l."""
        return self.delta0 * 2.0 ** (-l)


class RunConfig(BaseModel):
    """Validated parameters of one CLI run."""

    command: Command = Field(..., description="Pipeline to run")
    seed: int = Field(DEFAULT_SEED, ge=0, le=2**64 - 1, description="PRNG seed")
    emit_dir: Path = Field(Path("."), description="Artifact directory")
    verbose: bool = Field(False, description="Debug logging")

    # constructions
    matrix: Optional[List[List[float]]] = Field(None, description="Input matrix M0")
    levels: int = Field(6, ge=1, le=MAX_LEVELS, description="Lamination levels j")
    verify: Optional[float] = Field(None, ge=1.0, description="Exponent p for estimate checks")
    delta: Optional[float] = Field(None, description="Shift size delta")
    p_grid: List[float] = Field(default_factory=list, description="Exponents for the scan")
    levels_grid: List[int] = Field(default_factory=list, description="Levels for the scan")

    # fields
    generator: FieldGenerator = Field(FieldGenerator.CONSTANT, description="Field generator")
    dimension: int = Field(2, ge=2, le=3, description="Field dimension")
    n: int = Field(4, ge=1, description="Cells per axis")
    mix: float = Field(0.3, ge=0.0, le=1.0, description="Negative-det fraction (random field)")
    field_path: Optional[Path] = Field(None, description="Field JSON to load instead")
    p: float = Field(1.5, gt=1.0, description="Repair exponent p < d")
    l_max: int = Field(2, ge=1, le=64, description="Repair iterations")
    level_offset: int = Field(DEFAULT_LEVEL_OFFSET, ge=0, description="j0 of the level schedule")
    budget: float = Field(DEFAULT_BUDGET, gt=0.0, description="Strict repair drift budget")
    delta0: float = Field(DEFAULT_DELTA0, gt=0.0, description="Initial strict shift")
    inner_levels: Optional[int] = Field(
        None, ge=1, le=MAX_LEVELS, description="Fixed inner zero-det level (default: scheduled)"
    )
    close: bool = Field(True, description="Run the closing stages")
    integrand: str = Field("pnorm:2", description="Integrand tag")

    # realization
    laminate_path: Optional[Path] = Field(None, description="Laminate JSON to realize")
    epsilon: float = Field(0.05, gt=0.0, lt=0.25, description="Fine-scale ratio")
    depth: int = Field(2, ge=0, le=MAX_REALIZATION_DEPTH, description="Depth cap")
    periods: int = Field(8, ge=1, description="Top-level periods")
    emit: List[str] = Field(default_factory=lambda: ["map.json"], description="Outputs")
    grid_size: int = Field(64, ge=2, description="Samples per axis of grid.csv")

    # suite
    full: bool = Field(False, description="Run the acceptance battery at full size")

    @field_validator("matrix")
    @classmethod
    def validate_matrix(cls, v: Optional[List[List[float]]]) -> Optional[List[List[float]]]:
        """Matrix must be finite, square and of supported size."""
        if v is None:
            return v
        try:
            as_matrix(v)
        except InvalidMatrixError as e:
            raise ValueError(str(e)) from e
        return v

    @field_validator("delta")
    @classmethod
    def validate_delta(cls, v: Optional[float]) -> Optional[float]:
        """Delta must be positive when given."""
        if v is not None and not v > 0.0:
            raise ValueError("delta must be positive")
        return v

    @field_validator("p_grid")
    @classmethod
    def validate_p_grid(cls, v: List[float]) -> List[float]:
        """Exponents must be at least 1."""
        for p in v:
            if p < 1.0:
                raise ValueError(f"Exponent must be >= 1, got {p}")
        return v

    @field_validator("levels_grid")
    @classmethod
    def validate_levels_grid(cls, v: List[int]) -> List[int]:
        """Levels must lie in 1..MAX_LEVELS."""
        for j in v:
            if not 1 <= j <= MAX_LEVELS:
                raise ValueError(f"Level must be between 1 and {MAX_LEVELS}, got {j}")
        return v

    @field_validator("emit")
    @classmethod
    def validate_emit(cls, v: List[str]) -> List[str]:
        """Realization outputs are map.json and grid.csv."""
        for name in v:
            if name not in ("map.json", "grid.csv"):
                raise ValueError(f"Unsupported output: {name}")
        return v

    @classmethod
    def build(cls, **kwargs: Any) -> "RunConfig":
        """
        Validate parameters into a RunConfig.

        Raises:
            ConfigInvalidError: Naming the first offending field
        """
        try:
            return cls(**kwargs)
        except ValidationError as e:
            error = e.errors()[0]
            field = ".".join(str(part) for part in error.get("loc", ())) or None
            raise ConfigInvalidError(f"Invalid {field}: {error.get('msg')}", field=field) from e

    def require(self, name: str) -> Any:
        """Return a parameter that the command needs, or raise ConfigInvalidError."""
        value = getattr(self, name)
        if value is None:
            raise ConfigInvalidError(f"{self.command.value} requires --{name}", field=name)
        return value
