"""Reference profiles the trajectories are measured against.

Four families appear as attractors or stationary states across the models:
the half-line exponentials a*exp(-a z), the confined profile
a*exp(-a y - y^2/2) of the self-similar frame, the two-trace exponentials on
a finite interval, and the boundary-exchange equilibrium.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import DensityField, Grid1D


@dataclass(frozen=True)
class ReferenceProfile:
    """A strictly positive profile sampled on a grid.

    kind is one of "exp_halfline", "rescaled_G", "interval", "exchange";
    nominal_mass is the continuum mass of the family member (1 for
    exp_halfline, P(alpha) for rescaled_G, 1 for the non-constant interval
    branch, gamma for exchange).
    """

    kind: str
    grid: Grid1D
    values: np.ndarray
    nominal_mass: float

    def __post_init__(self):
        if np.any(self.values <= 0.0):
            raise ValueError(
                f"reference profile {self.kind!r} is not strictly positive on "
                "the grid; shrink the domain or the decay rate"
            )

    @property
    def mass(self) -> float:
        return float(np.sum(self.values)) * self.grid.dz

    def normalized_to(self, mass: float) -> "ReferenceProfile":
        """Same shape rescaled so the discrete mass equals `mass` exactly."""
        scale = mass / self.mass
        return ReferenceProfile(self.kind, self.grid, self.values * scale, mass)

    def as_field(self, time: float = 0.0) -> DensityField:
        return DensityField(self.grid, self.values.copy(), time)


def exp_halfline(alpha: float, grid: Grid1D) -> ReferenceProfile:
    """h_a(z) = a exp(-a z), unit continuum mass."""
    if not alpha > 0.0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    vals = alpha * np.exp(-alpha * grid.centers)
    return ReferenceProfile("exp_halfline", grid, vals, 1.0)


def rescaled_G(alpha: float, grid: Grid1D) -> ReferenceProfile:
    """G_a(y) = a exp(-a y - y^2/2); continuum mass P(a)."""
    from .rescaled1d import mass_map_P

    if not alpha > 0.0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    y = grid.centers
    vals = alpha * np.exp(-alpha * y - 0.5 * y * y)
    return ReferenceProfile("rescaled_G", grid, vals, mass_map_P(alpha))


def interval_profile(alpha: float, beta: float, grid: Grid1D) -> ReferenceProfile:
    """h(z) = a exp(-(a - b) z) on (0, L); mass 1 on the non-constant branch."""
    if not (alpha > 0.0 and beta > 0.0):
        raise ValueError(f"traces must be positive, got ({alpha}, {beta})")
    vals = alpha * np.exp(-(alpha - beta) * grid.centers)
    nominal = alpha * grid.z_max if abs(alpha - beta) < 1e-14 else 1.0
    return ReferenceProfile("interval", grid, vals, nominal)


def exchange_profile(nu: float, gamma: float, grid: Grid1D) -> ReferenceProfile:
    """Boundary-exchange equilibrium gamma*nu*exp(-nu z); mass gamma."""
    if not (nu > 0.0 and gamma > 0.0):
        raise ValueError(f"nu and gamma must be positive, got ({nu}, {gamma})")
    vals = gamma * nu * np.exp(-nu * grid.centers)
    return ReferenceProfile("exchange", grid, vals, gamma)
