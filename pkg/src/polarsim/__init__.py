"""polarsim: finite-volume solvers and diagnostics for boundary-coupled
drift-diffusion models of spontaneous cell polarisation."""

__version__ = "0.1.0"

from .config import RunConfig, build_config, parse_config
from .core import (
    DensityField,
    Grid1D,
    Grid2D,
    InitialCondition,
    make_grid_1d,
    make_grid_2d,
    project_initial,
    weighted_integral,
)
from .runner import RunResult, bisect_critical_mass, run, sweep

__all__ = [
    "__version__",
    "RunConfig",
    "build_config",
    "parse_config",
    "DensityField",
    "Grid1D",
    "Grid2D",
    "InitialCondition",
    "make_grid_1d",
    "make_grid_2d",
    "project_initial",
    "weighted_integral",
    "RunResult",
    "bisect_critical_mass",
    "run",
    "sweep",
]
