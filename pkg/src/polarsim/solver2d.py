"""Half-plane solvers (N = 2) on a truncated box, for the two advection
closures sourced by the boundary trace row n(t, y, 0):

  * transversal: u = -n(t,y,0) e_z, purely wall-normal; the y-marginal then
    obeys the plain heat equation, which rules out transversal instability;
  * potential: u is the unnormalized half-plane kernel field
    u(y,z) = -int (y-y', z) / (|y-y'|^2 + z^2) n(t,y',0) dy',
    divergence-free away from the boundary and attracting toward wall mass.

Both cases run through the same dimension-by-dimension conservative upwind
update with zero total normal flux on all four box edges, so mass is exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .blowup import (
    BlowUpReport,
    DetectionCaps,
    ensure_initial_state_clear,
    fired_detector,
)
from .config import RunConfig
from .core import Grid2D, InitialCondition, _cell_averages, make_grid_1d
from .diagnostics import DiagnosticsRecord, boundary_mass_fraction
from .errors import InputError
from .stepping import bernoulli


@dataclass
class Field2D:
    grid: Grid2D
    values: np.ndarray  # shape (ny, nz): first index y, second z
    t: float = 0.0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        expected = (self.grid.ny, self.grid.nz)
        if self.values.shape != expected:
            raise ValueError(
                f"values shape {self.values.shape} does not match grid {expected}"
            )
        if np.any(self.values < 0.0) or not np.all(np.isfinite(self.values)):
            raise ValueError("density values must be nonnegative and finite")

    @property
    def mass(self) -> float:
        return float(np.sum(self.values)) * self.grid.dy * self.grid.dz


@dataclass
class Velocity2D:
    """Face-normal speed samples: v_y on y-faces (ny+1, nz), v_z on z-faces
    (ny, nz+1). Boundary-face speeds are carried but the stepper forces the
    total normal flux to zero on every box edge."""

    v_y: np.ndarray
    v_z: np.ndarray

    def max_speeds(self) -> tuple[float, float]:
        return float(np.max(np.abs(self.v_y))), float(np.max(np.abs(self.v_z)))


def trace_row(f: Field2D) -> np.ndarray:
    """Wall values per column by one-sided quadratic extrapolation, clipped."""
    if f.grid.nz < 3:
        raise ValueError("trace extrapolation needs at least 3 cells in z")
    row = 1.5 * f.values[:, 0] - 0.5 * f.values[:, 1]
    return np.maximum(row, 0.0)


def velocity_transversal(tr: np.ndarray, grid: Grid2D) -> Velocity2D:
    """u = -trace e_z: wall-normal, constant along z, divergence-free."""
    tr = np.asarray(tr, dtype=np.float64)
    if tr.shape != (grid.ny,):
        raise ValueError("trace row length does not match the grid")
    v_y = np.zeros((grid.ny + 1, grid.nz))
    v_z = np.repeat(-tr[:, None], grid.nz + 1, axis=1)
    return Velocity2D(v_y, v_z)


class PotentialKernel:
    """Cached direct-quadrature kernel for the potential-case velocity.

    The kernel (y - y', z) / (|y - y'|^2 + z^2) is evaluated once per face
    against every source column; each assembly is then a dense
    matrix-vector product with the current trace row, in fixed order.
    z is strictly positive at every sampled point, so the boundary
    singularity is never touched; wall and top z-faces carry speed zero
    because their total flux is prescribed.
    """

    def __init__(self, grid: Grid2D):
        self.grid = grid
        yc = grid.y_centers
        yf = grid.y_faces
        zc = grid.z_centers
        zf = grid.z_faces
        # y-faces x z-centers against source columns
        dyf = yf[:, None, None] - yc[None, None, :]
        denom_y = dyf * dyf + (zc * zc)[None, :, None]
        self._ky = dyf / denom_y
        # y-centers x interior z-faces against source columns
        dyc = yc[:, None, None] - yc[None, None, :]
        z_int = zf[1:-1]
        denom_z = dyc * dyc + (z_int * z_int)[None, :, None]
        self._kz = z_int[None, :, None] / denom_z

    def assemble(self, tr: np.ndarray) -> Velocity2D:
        tr = np.asarray(tr, dtype=np.float64)
        dy = self.grid.dy
        v_y = -np.tensordot(self._ky, tr, axes=([2], [0])) * dy
        v_z = np.zeros((self.grid.ny, self.grid.nz + 1))
        v_z[:, 1:-1] = -np.tensordot(self._kz, tr, axes=([2], [0])) * dy
        return Velocity2D(v_y, v_z)


def velocity_potential(tr: np.ndarray, grid: Grid2D) -> Velocity2D:
    return PotentialKernel(grid).assemble(tr)


def divergence_residual(
    u: Velocity2D, grid: Grid2D, margin: float = 0.15
) -> float:
    """Max discrete divergence over cells at least `margin` (as a fraction
    of each box extent) away from every boundary: the harmonicity check for
    the potential field. The exclusion zone is fixed in physical units, so
    the residual decays at second order under refinement even though the
    kernel derivatives grow like 1/z^3 toward the source row."""
    dy, dz = grid.dy, grid.dz
    div = (u.v_y[1:, :] - u.v_y[:-1, :]) / dy + (u.v_z[:, 1:] - u.v_z[:, :-1]) / dz
    skip_y = max(1, int(round(margin * grid.ny)))
    skip_z = max(1, int(round(margin * grid.nz)))
    interior = div[skip_y:-skip_y, skip_z:-skip_z]
    return float(np.max(np.abs(interior)))


def stable_dt_2d(grid: Grid2D, u: Velocity2D, cfl: float = 0.45) -> float:
    uy, uz = u.max_speeds()
    denom = 2.0 / grid.dy**2 + 2.0 / grid.dz**2 + uy / grid.dy + uz / grid.dz
    return cfl / denom


def step_2d(s: Field2D, u: Velocity2D, dt: float) -> Field2D:
    """Dimension-by-dimension conservative update with exponentially fitted
    face fluxes (upwind and central limits included)."""
    grid = s.grid
    uy, uz = u.max_speeds()
    denom = 2.0 / grid.dy**2 + 2.0 / grid.dz**2 + uy / grid.dy + uz / grid.dz
    if dt > (1.0 + 1e-12) / denom:
        raise ValueError(f"dt={dt} violates the 2D positivity bound {1.0 / denom}")
    vals = _step_values(s.values, grid, u, dt)
    return Field2D(grid, vals, s.t + dt)


def _step_values(
    n: np.ndarray, grid: Grid2D, u: Velocity2D, dt: float
) -> np.ndarray:
    # exponentially fitted face fluxes in each direction; the velocity sign
    # convention is physical (flux = grad n - u n), so B(u h) weights the
    # downstream cell and B(-u h) the upstream one
    dy, dz = grid.dy, grid.dz
    tz = np.zeros((grid.ny, grid.nz + 1))
    xz = u.v_z[:, 1:-1] * dz
    tz[:, 1:-1] = (bernoulli(xz) * n[:, 1:] - bernoulli(-xz) * n[:, :-1]) / dz

    ty = np.zeros((grid.ny + 1, grid.nz))
    xy = u.v_y[1:-1, :] * dy
    ty[1:-1, :] = (bernoulli(xy) * n[1:, :] - bernoulli(-xy) * n[:-1, :]) / dy

    out = n + dt * ((tz[:, 1:] - tz[:, :-1]) / dz + (ty[1:, :] - ty[:-1, :]) / dy)
    np.maximum(out, 0.0, out=out)
    return out


def marginal_y(f: Field2D) -> np.ndarray:
    """nu(t, y): column sums times dz."""
    return np.sum(f.values, axis=1) * f.grid.dz


def second_moment_2d(f: Field2D) -> float:
    """I(t) = 1/2 int |x|^2 n, midpoint sum."""
    y = f.grid.y_centers
    z = f.grid.z_centers
    w = 0.5 * (y * y)[:, None] + 0.5 * (z * z)[None, :]
    return float(np.sum(w * f.values)) * f.grid.dy * f.grid.dz


def blowup_criterion_2d(I0: float, M: float, C: float) -> bool:
    """Small second moment sufficient condition: I0 <= C M^3 in two
    dimensions (exponent (N+1)/(N-1) at N = 2)."""
    if not C > 0.0:
        raise ValueError(f"criterion constant must be positive, got {C}")
    return I0 <= C * M ** 3


def criterion_exponent(N: int) -> float:
    """(N+1)/(N-1): documented for tables, fixed to 3 in the solver."""
    if N < 2:
        raise ValueError("the criterion needs N >= 2")
    return (N + 1) / (N - 1)


def lp_norm(f: Field2D, p: float) -> float:
    if p < 1.0:
        raise ValueError(f"p must be at least 1, got {p}")
    cell = f.grid.dy * f.grid.dz
    return float(np.sum(f.values ** p) * cell) ** (1.0 / p)


def entropy_2d(f: Field2D) -> float:
    n = f.values
    live = n > 1e-300
    if not np.any(live):
        return 0.0
    nl = n[live]
    return float(np.sum(nl * np.log(nl))) * f.grid.dy * f.grid.dz


def z_moment_2d(f: Field2D) -> float:
    z = f.grid.z_centers
    return float(np.sum(f.values * z[None, :])) * f.grid.dy * f.grid.dz


def project_initial_2d(
    ic: InitialCondition, grid: Grid2D, sigma_y: float, center_y: float
) -> Field2D:
    """Separable initial data: the configured z-profile times a Gaussian
    bump in y, rescaled to the exact target mass."""
    zgrid = make_grid_1d(grid.z_max, grid.nz)
    h = np.maximum(_cell_averages(ic, zgrid), 0.0)
    yf = grid.y_faces
    root2 = math.sqrt(2.0)
    prim = np.array(
        [math.erf((v - center_y) / (root2 * sigma_y)) for v in yf]
    )
    g = np.diff(prim) / grid.dy
    vals = np.maximum(g[:, None] * h[None, :], 0.0)
    raw = float(np.sum(vals)) * grid.dy * grid.dz
    if raw <= 0.0:
        raise InputError("2D initial profile has no mass on the grid")
    vals *= ic.target_mass / raw
    return Field2D(grid, vals, 0.0)


def run_2d(
    cfg: RunConfig,
) -> tuple[list[DiagnosticsRecord], BlowUpReport, Field2D]:
    """Driver for both 2D cases; the advection closure is picked by model."""
    grid = cfg.grid_2d()
    ic = cfg.initial_condition()
    sigma_y = cfg.ic.get("sigma_y", (cfg.y_max - cfg.y_min) / 8.0)
    center_y = cfg.ic.get("center_y", 0.5 * (cfg.y_min + cfg.y_max))
    f = project_initial_2d(ic, grid, sigma_y, center_y)
    potential = cfg.model == "potential2d"
    kernel = PotentialKernel(grid) if potential else None

    caps = DetectionCaps(cfg.density_cap, cfg.trace_cap, cfg.dt_floor)
    ensure_initial_state_clear(
        float(np.max(f.values)), float(np.max(trace_row(f))), caps
    )
    report = BlowUpReport()
    I0 = second_moment_2d(f)
    predicted = (
        blowup_criterion_2d(I0, cfg.mass, cfg.C_2d) if potential else None
    )

    def velocity(state: Field2D) -> Velocity2D:
        tr = trace_row(state)
        if potential:
            return kernel.assemble(tr)
        return velocity_transversal(tr, grid)

    def record(state: Field2D, u: Velocity2D) -> DiagnosticsRecord:
        tr = trace_row(state)
        extras = {
            "l2_norm": lp_norm(state, 2.0),
            "marginal": marginal_y(state).tolist(),
        }
        if potential:
            extras["criterion_predicts_blowup"] = predicted
            extras["div_residual"] = divergence_residual(u, grid)
        return DiagnosticsRecord(
            t=state.t,
            mass=state.mass,
            trace=float(np.max(tr)),
            J=z_moment_2d(state),
            I=second_moment_2d(state),
            entropy=entropy_2d(state),
            max_density=float(np.max(state.values)),
            boundary_mass_fraction=boundary_mass_fraction(state.values, grid.nz),
            extras=extras,
        )

    u = velocity(f)
    records = [record(f, u)]
    k_out = 1
    t_end = cfg.t_end
    int_moment_rhs = 0.0
    zc = grid.z_centers

    while f.t < t_end and not report.detected:
        u = velocity(f)
        dt = stable_dt_2d(grid, u, cfg.cfl)
        if dt < caps.dt_floor:
            report = BlowUpReport(True, f.t, "dt_floor", None)
            break
        next_out = min(k_out * cfg.output_every, t_end)
        clipped = min(dt, next_out - f.t)
        if cfg.track_balance:
            # transversal second-moment law: dI/dt = 2M - int z n(y,0) n(y,z)
            tr = trace_row(f)
            coupling = float(np.sum(tr[:, None] * f.values * zc[None, :]))
            coupling *= grid.dy * grid.dz
            int_moment_rhs += (2.0 * f.mass - coupling) * clipped
        vals = _step_values(f.values, grid, u, clipped)
        t_new = next_out if clipped < dt else f.t + dt
        f = Field2D(grid, vals, t_new)

        crit = fired_detector(
            float(np.max(vals)), float(np.max(trace_row(f))), dt, caps
        )
        if crit is not None:
            report = BlowUpReport(True, f.t, crit, None)
            records.append(record(f, u))
            break
        if f.t >= next_out - 1e-12 * max(1.0, next_out):
            rec = record(f, u)
            rec.extras["int_moment_rhs"] = int_moment_rhs
            records.append(rec)
            int_moment_rhs = 0.0
            k_out += 1

    return records, report, f
