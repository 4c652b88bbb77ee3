"""Constants for orientlam computations."""

from typing import Final

# Dimensions
MIN_DIMENSION: Final[int] = 2
MAX_DIMENSION: Final[int] = 4

# Jacobi SVD
SVD_MAX_SWEEPS: Final[int] = 200
SVD_RELATIVE_TOLERANCE: Final[float] = 1e-14
ROTATION_TOLERANCE: Final[float] = 1e-10

# Laminate invariants
WEIGHT_SUM_TOLERANCE: Final[float] = 1e-12
BARYCENTER_TOLERANCE: Final[float] = 1e-10
RANK_ONE_TOLERANCE: Final[float] = 1e-9
SPLIT_AMPLITUDE_TOLERANCE: Final[float] = 1e-12
DET_ZERO_FACTOR: Final[float] = 1e-9

# Constructions
MAX_LEVELS: Final[int] = 20
DET_UNDERFLOW: Final[float] = 1e-280

# Repair pipelines
MAX_SUBCELLS: Final[int] = 2**24
MIN_DELTA: Final[float] = 1e-12
DEFICIENCY_SLACK: Final[float] = 1e-9
DEFAULT_LEVEL_OFFSET: Final[int] = 1
DEFAULT_DELTA0: Final[float] = 0.1
DEFAULT_BUDGET: Final[float] = 1.0
MAX_GRID_2D: Final[int] = 256
MAX_GRID_3D: Final[int] = 32

# Realization
MAX_REALIZATION_DEPTH: Final[int] = 3
UNIT_NORMAL_TOLERANCE: Final[float] = 1e-12
TRANSITION_WIDTH_FACTOR: Final[float] = 0.125

# Output
DEFAULT_ENCODING: Final[str] = "utf-8"
DEFAULT_SEED: Final[int] = 0
