"""Measurement-fueled qubit Otto engines: simulation, closed forms, optimization."""

from .engine import (
    CycleRecord,
    DriveSpec,
    EngineParams,
    MeasurementBasis,
    PovmSpec,
    run_conventional_cycle,
    run_povm_cycle,
    run_pvm_cycle,
)
from .optimize import (
    OptimizerConfig,
    OptResult,
    Su4Point,
    optimize_povm_net_work,
    optimize_povm_work,
    optimize_pvm_basis,
    su4_from_point,
)

__version__ = "0.1.0"

__all__ = [
    "CycleRecord",
    "DriveSpec",
    "EngineParams",
    "MeasurementBasis",
    "PovmSpec",
    "OptimizerConfig",
    "OptResult",
    "Su4Point",
    "optimize_povm_net_work",
    "optimize_povm_work",
    "optimize_pvm_basis",
    "run_conventional_cycle",
    "run_povm_cycle",
    "run_pvm_cycle",
    "su4_from_point",
    "__version__",
]
