"""Uniform cell-centered grids, nonnegative density fields, initial-condition
families, and the midpoint-rule quadrature used by every monitor.

All solvers in this package share the same storage convention: a field is the
vector of cell averages on a uniform mesh, mass is the plain midpoint sum, and
initial data is rescaled after projection so the discrete mass matches the
requested total exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Union

import numpy as np
from scipy import special

from .errors import InputError, NumericOverflowError

# exp argument beyond which float64 overflows
_EXP_OVERFLOW = 709.0


@dataclass(frozen=True)
class Grid1D:
    """Uniform cell-centered mesh on the truncated half-line (0, z_max)."""

    z_max: float
    n_cells: int

    def __post_init__(self):
        if not (self.z_max > 0.0 and math.isfinite(self.z_max)):
            raise ValueError(f"z_max must be positive and finite, got {self.z_max}")
        if self.n_cells < 4:
            raise ValueError(f"n_cells must be at least 4, got {self.n_cells}")

    @property
    def dz(self) -> float:
        return self.z_max / self.n_cells

    @property
    def centers(self) -> np.ndarray:
        return (np.arange(self.n_cells) + 0.5) * self.dz

    @property
    def faces(self) -> np.ndarray:
        return np.arange(self.n_cells + 1) * self.dz


@dataclass(frozen=True)
class Grid2D:
    """Uniform cell-centered mesh on the box (y_min, y_max) x (0, z_max)."""

    y_min: float
    y_max: float
    z_max: float
    ny: int
    nz: int

    def __post_init__(self):
        if not (self.y_max > self.y_min):
            raise ValueError(f"need y_max > y_min, got ({self.y_min}, {self.y_max})")
        if not (self.z_max > 0.0 and math.isfinite(self.z_max)):
            raise ValueError(f"z_max must be positive and finite, got {self.z_max}")
        if self.ny < 4 or self.nz < 4:
            raise ValueError(f"ny and nz must be at least 4, got ({self.ny}, {self.nz})")

    @property
    def dy(self) -> float:
        return (self.y_max - self.y_min) / self.ny

    @property
    def dz(self) -> float:
        return self.z_max / self.nz

    @property
    def y_centers(self) -> np.ndarray:
        return self.y_min + (np.arange(self.ny) + 0.5) * self.dy

    @property
    def z_centers(self) -> np.ndarray:
        return (np.arange(self.nz) + 0.5) * self.dz

    @property
    def y_faces(self) -> np.ndarray:
        return self.y_min + np.arange(self.ny + 1) * self.dy

    @property
    def z_faces(self) -> np.ndarray:
        return np.arange(self.nz + 1) * self.dz


def make_grid_1d(z_max: float, n_cells: int) -> Grid1D:
    return Grid1D(float(z_max), int(n_cells))


def make_grid_2d(y_min: float, y_max: float, z_max: float, ny: int, nz: int) -> Grid2D:
    return Grid2D(float(y_min), float(y_max), float(z_max), int(ny), int(nz))


@dataclass
class DensityField:
    """Nonnegative cell-averaged density attached to a 1D grid."""

    grid: Grid1D
    values: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.shape != (self.grid.n_cells,):
            raise ValueError(
                f"values shape {self.values.shape} does not match "
                f"{self.grid.n_cells} cells"
            )
        if np.any(self.values < 0.0) or not np.all(np.isfinite(self.values)):
            raise ValueError("density values must be nonnegative and finite")
        if self.time < 0.0:
            raise ValueError(f"time must be nonnegative, got {self.time}")

    @property
    def mass(self) -> float:
        return float(np.sum(self.values)) * self.grid.dz

    def copy(self) -> "DensityField":
        return DensityField(self.grid, self.values.copy(), self.time)


# Weight selector accepted by weighted_integral: a named moment, an
# exponential rate, a sampled array, or a callable of z.
Weight = Union[str, tuple, np.ndarray, Callable[[np.ndarray], np.ndarray]]


def weight_values(w: Weight, z: np.ndarray, z_max: float) -> np.ndarray:
    if isinstance(w, str):
        if w == "one":
            return np.ones_like(z)
        if w == "z":
            return z.copy()
        if w == "half_z_squared":
            return 0.5 * z * z
        raise ValueError(f"unknown weight selector {w!r}")
    if isinstance(w, tuple):
        kind, alpha = w
        if kind != "exp":
            raise ValueError(f"unknown weight selector {w!r}")
        alpha = float(alpha)
        if alpha * z_max > _EXP_OVERFLOW:
            raise NumericOverflowError(
                f"exp({alpha}*z) overflows double precision on a domain with "
                f"z_max={z_max}"
            )
        return np.exp(alpha * z)
    if callable(w):
        vals = np.asarray(w(z), dtype=np.float64)
    else:
        vals = np.asarray(w, dtype=np.float64)
    if vals.shape != z.shape:
        raise ValueError("sampled weight length does not match cell count")
    if not np.all(np.isfinite(vals)):
        raise ValueError("weight must be finite on all cell centers")
    return vals


def weighted_integral(f: DensityField, w: Weight = "one") -> float:
    """Midpoint-rule integral sum(w(z_i) * n_i) * dz."""
    z = f.grid.centers
    wv = weight_values(w, z, f.grid.z_max)
    out = float(np.dot(wv, f.values)) * f.grid.dz
    if not math.isfinite(out):
        raise NumericOverflowError(
            f"weighted integral overflowed (z_max={f.grid.z_max})"
        )
    return out


def first_moment(f: DensityField) -> float:
    return weighted_integral(f, "z")


def half_second_moment(f: DensityField) -> float:
    return weighted_integral(f, "half_z_squared")


def exponential_moment(f: DensityField, alpha: float) -> float:
    return weighted_integral(f, ("exp", alpha))


@dataclass(frozen=True)
class InitialCondition:
    """One of the built-in initial profiles, rescaled to a target mass.

    kind: "exponential" (rate alpha), "half_gaussian" (sigma, shift),
    "step" (width), or "table" (two-column file, linearly interpolated).
    """

    kind: str
    target_mass: float
    alpha: float = 1.0
    sigma: float = 1.0
    shift: float = 0.0
    width: float = 1.0
    path: str = ""
    length_scale: float = field(default=1.0)

    def __post_init__(self):
        if self.kind not in ("exponential", "half_gaussian", "step", "table"):
            raise ValueError(f"unknown initial condition kind {self.kind!r}")
        if not (self.target_mass > 0.0):
            raise ValueError(f"target_mass must be positive, got {self.target_mass}")
        if self.kind == "exponential" and not (self.alpha > 0.0):
            raise ValueError(f"exponential rate must be positive, got {self.alpha}")
        if self.kind == "half_gaussian" and not (self.sigma > 0.0):
            raise ValueError(f"sigma must be positive, got {self.sigma}")
        if self.kind == "step" and not (self.width > 0.0):
            raise ValueError(f"step width must be positive, got {self.width}")
        if not (self.length_scale > 0.0):
            raise ValueError(f"length_scale must be positive, got {self.length_scale}")

    def is_non_increasing(self) -> bool:
        """True when the profile family is non-increasing in z by construction."""
        if self.kind in ("exponential", "step"):
            return True
        if self.kind == "half_gaussian":
            return self.shift <= 0.0
        return False


def read_table(path: str) -> tuple[np.ndarray, np.ndarray]:
    """Read a whitespace-separated two-column "z value" file, '#' comments."""
    p = Path(path)
    try:
        raw = p.read_text()
    except OSError as exc:
        raise InputError(f"cannot read table file {path!r}: {exc}") from exc
    zs, vs = [], []
    for lineno, line in enumerate(raw.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        parts = body.split()
        if len(parts) != 2:
            raise InputError(f"{path}:{lineno}: expected two columns, got {len(parts)}")
        try:
            z, v = float(parts[0]), float(parts[1])
        except ValueError as exc:
            raise InputError(f"{path}:{lineno}: non-numeric entry") from exc
        zs.append(z)
        vs.append(v)
    if len(zs) < 2:
        raise InputError(f"{path}: need at least two sample points")
    z = np.asarray(zs)
    v = np.asarray(vs)
    order = np.argsort(z, kind="stable")
    z, v = z[order], v[order]
    if np.any(np.diff(z) <= 0.0):
        raise InputError(f"{path}: duplicate z samples")
    if np.any(v < 0.0):
        raise InputError(f"{path}: negative density values")
    return z, v


def _cell_averages(ic: InitialCondition, grid: Grid1D) -> np.ndarray:
    faces = grid.faces
    s = ic.length_scale
    if ic.kind == "exponential":
        # exact cell averages of exp(-a z): (F(z_l) - F(z_r)) / dz, F = exp(-a z)/a
        a = ic.alpha / s
        prim = -np.exp(-a * faces) / a
        return np.diff(prim) / grid.dz
    if ic.kind == "step":
        w = ic.width * s
        covered = np.clip(w - faces[:-1], 0.0, grid.dz)
        return covered / grid.dz
    if ic.kind == "half_gaussian":
        sig = ic.sigma * s
        mu = ic.shift * s
        root2 = math.sqrt(2.0)
        prim = special.erf((faces - mu) / (root2 * sig))
        return np.diff(prim) / grid.dz
    # table: linear interpolation at cell centers, zero outside the samples;
    # the length scale stretches the sampled coordinates like the other kinds
    z, v = read_table(ic.path)
    return np.interp(grid.centers, z * s, v, left=v[0], right=0.0)


def project_initial(ic: InitialCondition, grid: Grid1D) -> DensityField:
    """Cell averages of the chosen profile, rescaled to the target mass
    (relative 1e-12). A rescale within an ulp of unity is skipped so that
    re-projecting a field's own table reproduces it bit for bit."""
    vals = _cell_averages(ic, grid)
    vals = np.maximum(vals, 0.0)
    raw_mass = float(np.sum(vals)) * grid.dz
    if raw_mass <= 0.0:
        raise InputError("initial profile has no mass on the grid")
    scale = ic.target_mass / raw_mass
    if abs(scale - 1.0) > 1e-12:
        vals = vals * scale
    return DensityField(grid, vals, 0.0)
