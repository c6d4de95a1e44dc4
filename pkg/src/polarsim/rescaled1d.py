"""Solver in the self-similar frame for subcritical mass.

Rescaling n(t,z) = u(tau, y) / sqrt(1+2t) with tau = log sqrt(1+2t),
y = z / sqrt(1+2t) turns the half-line equation into

    d u / dtau = d^2 u / dy^2 + d/dy( y u ) + u(tau,0) d u / dy,

whose confining drift selects a unique stationary profile
G_a(y) = a exp(-a y - y^2/2) with mass fixed by the increasing map
P(a) = integral of exp(-y - y^2/(2 a^2)). Subcritical trajectories relax to
G_a, monitored through the Lyapunov functional combining relative entropy
and the first moment.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .blowup import BlowUpReport
from .config import RunConfig
from .core import (
    DensityField,
    Grid1D,
    first_moment,
    half_second_moment,
    make_grid_1d,
    project_initial,
)
from .diagnostics import (
    DiagnosticsRecord,
    audit_monitors,
    boundary_mass_fraction,
    dissipation_rescaled,
    entropy,
    lyapunov_rescaled,
    relative_entropy,
)
from .reference import ReferenceProfile, rescaled_G
from .solver1d import trace_value
from .stepping import check_cfl, conservative_step


@dataclass
class RescaledState:
    field: DensityField
    alpha: float
    step_count: int = 0

    @property
    def tau(self) -> float:
        return self.field.time


def _integrand_cutoff(alpha: float) -> float:
    """y beyond which exp(-y - y^2/(2 a^2)) < 1e-16."""
    target = 16.0 * math.log(10.0)
    # y + y^2/(2 a^2) = target, positive root
    a2 = alpha * alpha
    return a2 * (math.sqrt(1.0 + 2.0 * target / a2) - 1.0)


def mass_map_P(alpha: float) -> float:
    """P(alpha) = integral_0^inf exp(-y - y^2 / (2 alpha^2)) dy, in (0, 1)."""
    if not alpha > 0.0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    cut = _integrand_cutoff(alpha)
    a2 = 2.0 * alpha * alpha
    val, _ = integrate.quad(
        lambda y: math.exp(-y - y * y / a2), 0.0, cut, limit=200
    )
    return float(val)


def solve_alpha(M: float) -> float:
    """Unique root of P(alpha) = M for subcritical mass, |P(alpha)-M| <= 1e-10."""
    if not (0.0 < M < 1.0):
        raise ValueError(f"the mass condition needs 0 < M < 1, got M={M}")
    lo, hi = 1.0, 1.0
    while mass_map_P(lo) > M:
        lo *= 0.5
        if lo < 1e-12:
            break
    while mass_map_P(hi) < M:
        hi *= 2.0
        if hi > 1e12:
            raise ValueError(f"failed to bracket alpha for M={M}")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        p = mass_map_P(mid)
        if abs(p - M) <= 1e-10:
            return mid
        if p < M:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def profile_G(alpha: float, grid: Grid1D) -> ReferenceProfile:
    """Stationary profile of the rescaled frame sampled on the grid."""
    return rescaled_G(alpha, grid)


def rescaled_stable_dt(f: DensityField, trace: float, cfl: float = 0.45) -> float:
    """CFL bound with the total leftward speed y_max + trace."""
    dz = f.grid.dz
    speed = f.grid.z_max + trace
    return cfl * dz * dz / (2.0 + speed * dz)


def step_rescaled(s: RescaledState, dtau: float) -> RescaledState:
    """Explicit conservative step with face drift y + u(tau, 0)."""
    f = s.field
    a = trace_value(f)
    speeds = f.grid.faces[1:-1] + a
    check_cfl(f.grid.dz, dtau, float(speeds[-1]))
    vals = conservative_step(f.values, f.grid.dz, dtau, speeds)
    return RescaledState(
        DensityField(f.grid, vals, f.time + dtau), s.alpha, s.step_count + 1
    )


def frame_transform(n: DensityField) -> DensityField:
    """Map a half-line field at time t into the self-similar frame.

    The grid contracts by sqrt(1+2t) and values scale by the same factor,
    so the discrete mass is preserved exactly and t = 0 is the identity.
    """
    scale = math.sqrt(1.0 + 2.0 * n.time)
    grid = make_grid_1d(n.grid.z_max / scale, n.grid.n_cells)
    tau = math.log(scale)
    return DensityField(grid, n.values * scale, tau)


def inverse_frame_transform(u: DensityField) -> DensityField:
    """Inverse of frame_transform: (tau, y) back to (t, z)."""
    scale = math.exp(u.time)
    grid = make_grid_1d(u.grid.z_max * scale, u.grid.n_cells)
    t = 0.5 * (scale * scale - 1.0)
    return DensityField(grid, u.values / scale, t)


def run_rescaled(
    cfg: RunConfig,
) -> tuple[list[DiagnosticsRecord], BlowUpReport, DensityField]:
    """Integrate the rescaled equation to tau = t_end; subcritical runs only."""
    grid = cfg.grid_1d()
    ic = cfg.initial_condition()
    f = project_initial(ic, grid)
    M = cfg.mass
    alpha = solve_alpha(M)
    reference = rescaled_G(alpha, grid).normalized_to(M)

    def record(state: DensityField, trace: float) -> DiagnosticsRecord:
        L, _ = lyapunov_rescaled(state, alpha, M)
        ref = reference.normalized_to(state.mass)
        return DiagnosticsRecord(
            t=state.time,
            mass=state.mass,
            trace=trace,
            J=first_moment(state),
            I=half_second_moment(state),
            entropy=entropy(state),
            max_density=float(np.max(state.values)),
            boundary_mass_fraction=boundary_mass_fraction(
                state.values, grid.n_cells
            ),
            rel_entropy=relative_entropy(state, ref),
            lyapunov=L,
            dissipation=dissipation_rescaled(state, M, trace),
            extras=dict(audit_monitors(state, ref)),
        )

    records = [record(f, trace_value(f))]
    t_end = cfg.t_end
    k_out = 1
    report = BlowUpReport()
    int_trace = 0.0
    int_J = 0.0
    int_D = 0.0
    z = grid.centers

    while f.time < t_end:
        a = trace_value(f)
        dtau = rescaled_stable_dt(f, a, cfg.cfl)
        next_out = min(k_out * cfg.output_every, t_end)
        clipped = min(dtau, next_out - f.time)
        if cfg.track_balance:
            int_trace += a * clipped
            int_J += float(np.dot(z, f.values)) * grid.dz * clipped
            int_D += dissipation_rescaled(f, M, a) * clipped
        speeds = grid.faces[1:-1] + a
        vals = conservative_step(f.values, grid.dz, clipped, speeds)
        t_new = next_out if clipped < dtau else f.time + dtau
        f = DensityField(grid, vals, t_new)
        if f.time >= next_out - 1e-12 * max(1.0, next_out):
            rec = record(f, trace_value(f))
            rec.extras["int_trace"] = int_trace
            rec.extras["int_J"] = int_J
            rec.extras["int_D"] = int_D
            records.append(rec)
            int_trace = int_J = int_D = 0.0
            k_out += 1

    return records, report, f
