"""Multi-scale stochastic elasto-plastic concrete fibers.

Log-normal yield-stress random fields feed meso-scale return-mapping
plasticity, averaged into homogenized concrete fibers of a displacement
based beam element; a cantilever column in free vibration then shows
damping that comes only from material hysteresis.
"""

from .meso import ElastoPlasticParams, MesoPointState, return_map
from .macro import FiberMesoStructure, run_strain_path
from .oracle import OracleParams, monotonic_curve
from .random_field import FieldSpec, MarginalSpec, fiber_yields, generate_gaussian_field
from .dynamics import ColumnConfig, LoadProgram, TimeHistory, build_column, run_program

__all__ = [
    "ElastoPlasticParams",
    "MesoPointState",
    "return_map",
    "FiberMesoStructure",
    "run_strain_path",
    "OracleParams",
    "monotonic_curve",
    "FieldSpec",
    "MarginalSpec",
    "fiber_yields",
    "generate_gaussian_field",
    "ColumnConfig",
    "LoadProgram",
    "TimeHistory",
    "build_column",
    "run_program",
]

__version__ = "0.1.0"
