"""Scenario orchestration: model dispatch, parameter sweeps, and
critical-mass bisection.

Results are deterministic for a fixed config: the solvers reduce in fixed
order, concurrent sweep workers only parallelize independent runs, and rows
are gathered in submission order.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Union

from .blowup import BlowUpReport
from .config import RunConfig, SWEEP_PARAMS, with_param
from .core import DensityField
from .diagnostics import DiagnosticsRecord
from .errors import BracketError, ConfigError
from .exchange1d import run_exchange
from .rescaled1d import run_rescaled
from .solver1d import run_bks
from .solver2d import Field2D, run_2d
from .variants1d import run_finite_range, run_interval

TerminalField = Union[DensityField, Field2D]

_DISPATCH = {
    "bks1d": run_bks,
    "rescaled1d": run_rescaled,
    "exchange1d": run_exchange,
    "interval1d": run_interval,
    "range1d": run_finite_range,
    "transversal2d": run_2d,
    "potential2d": run_2d,
}


@dataclass
class RunResult:
    config: RunConfig
    records: list[DiagnosticsRecord]
    blowup: BlowUpReport
    terminal_field: TerminalField

    def to_payload(self) -> dict:
        return {
            "records": [record_to_row(r) for r in self.records],
            "blowup": {
                "detected": self.blowup.detected,
                "t_detect": self.blowup.t_detect,
                "criterion": self.blowup.criterion,
                "analytic_bound": self.blowup.analytic_bound,
            },
            "terminal_field": terminal_field_payload(self.terminal_field),
            "config_echo": self.config.echo(),
        }


CSV_COLUMNS = (
    "t",
    "mass",
    "trace",
    "J",
    "I",
    "J_alpha",
    "entropy",
    "rel_entropy",
    "lyapunov",
    "dissipation",
    "max_density",
    "boundary_mass_fraction",
)


def record_to_row(r: DiagnosticsRecord) -> dict:
    return {name: getattr(r, name) for name in CSV_COLUMNS}


def terminal_field_payload(f: TerminalField) -> dict:
    if isinstance(f, DensityField):
        return {
            "kind": "1d",
            "z": f.grid.centers.tolist(),
            "values": f.values.tolist(),
        }
    return {
        "kind": "2d",
        "y": f.grid.y_centers.tolist(),
        "z": f.grid.z_centers.tolist(),
        "values": f.values.tolist(),
    }


def run(cfg: RunConfig) -> RunResult:
    """Execute one configured run and validate the result envelope."""
    try:
        runner = _DISPATCH[cfg.model]
    except KeyError:
        raise ConfigError(f"unknown model {cfg.model!r}")
    records, report, terminal = runner(cfg)
    times = [r.t for r in records]
    if any(b <= a for a, b in zip(times, times[1:])):
        raise RuntimeError(f"{cfg.model}: record times are not strictly increasing")
    if records and abs(records[-1].mass - _terminal_mass(terminal)) > 1e-9 * max(
        1.0, records[-1].mass
    ):
        raise RuntimeError(f"{cfg.model}: terminal field mass disagrees with records")
    if cfg.model in ("transversal2d", "potential2d"):
        domain = (cfg.y_max - cfg.y_min) * cfg.z_max
    else:
        domain = cfg.z_max
    for r in records:
        # the max cannot undercut the domain average
        if r.max_density < r.mass / domain * (1.0 - 1e-12):
            raise RuntimeError(f"{cfg.model}: max density below the mean at t={r.t}")
    return RunResult(cfg, records, report, terminal)


def _terminal_mass(f: TerminalField) -> float:
    return f.mass


@dataclass
class SweepRow:
    param: str
    value: float
    detected: bool
    t_detect: Optional[float]
    criterion: Optional[str]
    terminal: dict

    def to_payload(self) -> dict:
        return {
            "param": self.param,
            "value": self.value,
            "detected": self.detected,
            "t_detect": self.t_detect,
            "criterion": self.criterion,
            "terminal": self.terminal,
        }


def sweep(
    base: RunConfig,
    param: str,
    values: list[float],
    max_workers: int = 4,
) -> list[SweepRow]:
    """One run per value, executed concurrently, rows ordered as given."""
    if param not in SWEEP_PARAMS:
        raise ConfigError(f"unknown sweep parameter {param!r}")
    configs = [with_param(base, param, v) for v in values]
    if not configs:
        return []

    def one(cfg: RunConfig) -> RunResult:
        return run(cfg)

    if max_workers > 1 and len(configs) > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            results = list(pool.map(one, configs))
    else:
        results = [one(cfg) for cfg in configs]

    rows = []
    for value, result in zip(values, results):
        rows.append(
            SweepRow(
                param=param,
                value=value,
                detected=result.blowup.detected,
                t_detect=result.blowup.t_detect,
                criterion=result.blowup.criterion,
                terminal=record_to_row(result.records[-1]),
            )
        )
    return rows


@dataclass
class BisectResult:
    estimate: float
    m_lo: float
    m_hi: float
    probes: list[tuple[float, bool]]

    def to_payload(self) -> dict:
        return {
            "estimate": self.estimate,
            "m_lo": self.m_lo,
            "m_hi": self.m_hi,
            "probes": [{"mass": m, "detected": d} for m, d in self.probes],
        }


def bisect_critical_mass(
    base: RunConfig, m_lo: float, m_hi: float, tol: float
) -> BisectResult:
    """Bisect on mass with the blow-up flag as predicate.

    Requires the lower endpoint to run global and the upper to blow up;
    returns the midpoint of the final bracket, never an exact threshold.
    """
    if not (0.0 < m_lo < m_hi):
        raise ConfigError(f"need 0 < m_lo < m_hi, got ({m_lo}, {m_hi})")
    if not tol > 0.0:
        raise ConfigError(f"tol must be positive, got {tol}")

    def detected(mass: float) -> bool:
        return run(with_param(base, "mass", mass)).blowup.detected

    probes: list[tuple[float, bool]] = []
    lo_fired = detected(m_lo)
    probes.append((m_lo, lo_fired))
    hi_fired = detected(m_hi)
    probes.append((m_hi, hi_fired))
    if lo_fired or not hi_fired:
        raise BracketError(
            f"bracket does not straddle the transition: "
            f"m_lo={m_lo} detected={lo_fired}, m_hi={m_hi} detected={hi_fired}"
        )

    lo, hi = m_lo, m_hi
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        fired = detected(mid)
        probes.append((mid, fired))
        if fired:
            hi = mid
        else:
            lo = mid
    return BisectResult(0.5 * (lo + hi), lo, hi, probes)
