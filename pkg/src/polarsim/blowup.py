"""Blow-up detection: report type and the runtime detectors.

Detection is a numerical verdict, not a proof: a run is declared blown up
when the density or the boundary trace reaches the grid-concentration scale
or the stable step collapses. Runs that reach t_end untripped are "global"
at the resolution used.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional


@dataclass(frozen=True)
class DetectionCaps:
    density_cap: float
    trace_cap: float
    dt_floor: float


@dataclass
class BlowUpReport:
    detected: bool = False
    t_detect: Optional[float] = None
    criterion: Optional[str] = None
    analytic_bound: Optional[float] = None


def fired_detector(
    max_density: float, trace: float, dt: float, caps: DetectionCaps
) -> Optional[str]:
    """Name of the first detector tripped by the current step, if any."""
    if max_density > caps.density_cap:
        return "density_cap"
    if dt < caps.dt_floor:
        return "dt_floor"
    if trace > caps.trace_cap:
        return "trace_runaway"
    return None


def ensure_initial_state_clear(
    max_density: float, trace: float, caps: DetectionCaps
) -> None:
    """Reject configs whose initial data already trips a detector; declaring
    blow-up at t = 0 would be meaningless."""
    from .errors import ConfigError

    crit = fired_detector(max_density, trace, 2.0 * caps.dt_floor, caps)
    if crit is not None:
        raise ConfigError(
            f"initial state already exceeds the {crit} detector; raise the "
            "cap or refine the grid (caps scale with 1/dz)"
        )
