"""Functionals, identities, and inequality monitors evaluated on solver states.

Conventions shared by every functional here:
  * 0*log(0) = 0; cells below 1e-300 are treated as exactly empty.
  * Integrals are midpoint sums over cells, gradient-type integrands live on
    faces. The Fisher information uses square-root differences, so it is
    nonnegative, vanishes on constants, and is robust at vacuum.
  * The interior-face part of the Fisher sum dominates the telescoped trace
    estimate through a discrete Cauchy-Schwarz inequality, so the trace
    monitor is sign-exact in exact arithmetic; the two endpoint corrections
    (extrapolated, also nonnegative) restore second-order consistency
    without breaking that sign.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from .core import DensityField, first_moment
from .errors import SupportMismatchError
from .reference import ReferenceProfile

_EMPTY = 1e-300

ProfileLike = Union[ReferenceProfile, DensityField, np.ndarray]


def _profile_values(g: ProfileLike) -> np.ndarray:
    if isinstance(g, ReferenceProfile):
        return g.values
    if isinstance(g, DensityField):
        return g.values
    return np.asarray(g, dtype=np.float64)


def entropy(f: DensityField) -> float:
    """sum(n_i log n_i) dz with the 0 log 0 = 0 convention."""
    n = f.values
    live = n > _EMPTY
    if not np.any(live):
        return 0.0
    nl = n[live]
    return float(np.sum(nl * np.log(nl))) * f.grid.dz


def positive_part_entropy(f: DensityField) -> float:
    """sum(n_i (log n_i)_+) dz."""
    n = f.values
    live = n > 1.0
    if not np.any(live):
        return 0.0
    nl = n[live]
    return float(np.sum(nl * np.log(nl))) * f.grid.dz


def relative_entropy(f: DensityField, g: ProfileLike) -> float:
    """sum(f_i log(f_i / g_i)) dz; arguments must carry equal mass.

    Nonnegative by Jensen whenever the discrete masses agree; masses are
    required to match to relative 1e-6.
    """
    gv = _profile_values(g)
    n = f.values
    if gv.shape != n.shape:
        raise ValueError("field and reference live on different grids")
    dz = f.grid.dz
    mf = float(np.sum(n)) * dz
    mg = float(np.sum(gv)) * dz
    if abs(mf - mg) > 1e-6 * max(mf, mg):
        raise ValueError(
            f"relative entropy needs equal masses, got {mf} vs {mg}"
        )
    live = n > _EMPTY
    if np.any(gv[live] <= 0.0):
        raise SupportMismatchError(
            "reference vanishes on cells carrying density"
        )
    nl = n[live]
    return float(np.sum(nl * (np.log(nl) - np.log(gv[live])))) * dz


def _sqrt_face_slopes(f: DensityField) -> np.ndarray:
    """(sqrt(n_k) - sqrt(n_{k-1})) / dz at the interior faces."""
    root = np.sqrt(f.values)
    return np.diff(root) / f.grid.dz


def fisher_dissipation(f: DensityField) -> float:
    """Discrete form of int n (d/dz log n)^2 dz = 4 int (d/dz sqrt(n))^2 dz.

    Interior faces contribute 4 D_k^2 dz; the boundary values of the
    integrand are linear extrapolations of the face slopes, each entering
    with trapezoid weight dz/2. Both corrections are squares, so the total
    never drops below the plain face sum.
    """
    if f.grid.n_cells < 3:
        raise ValueError("need at least 3 cells for the Fisher sum")
    d = _sqrt_face_slopes(f)
    dz = f.grid.dz
    interior = 4.0 * float(np.dot(d, d)) * dz
    g_left = 4.0 * (2.0 * d[0] - d[1]) ** 2
    g_right = 4.0 * (2.0 * d[-1] - d[-2]) ** 2
    return interior + 0.5 * dz * (g_left + g_right)


def telescoped_trace(f: DensityField) -> float:
    """max(n_0 - n_last, 0): the boundary estimate paired with the Fisher sum.

    Satisfies trace^2 <= mass * fisher_dissipation exactly in exact
    arithmetic (Cauchy-Schwarz on the face differences), which is what the
    trace inequality monitor audits.
    """
    return max(float(f.values[0] - f.values[-1]), 0.0)


def check_trace_inequality(f: DensityField, trace: float) -> float:
    """Residual mass * fisher - trace^2 of the boundary trace inequality."""
    if trace < 0.0:
        raise ValueError(f"trace must be nonnegative, got {trace}")
    return f.mass * fisher_dissipation(f) - trace * trace


def check_carleman_bound(f: DensityField, alpha: float) -> float:
    """Residual RHS - LHS of
    int f (log f)_+ <= int f (log f + alpha z) + 1/(alpha e)."""
    if not alpha > 0.0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    lhs = positive_part_entropy(f)
    rhs = entropy(f) + alpha * first_moment(f) + 1.0 / (alpha * math.e)
    return rhs - lhs


def l1_distance(f: DensityField, g: ProfileLike) -> float:
    gv = _profile_values(g)
    return float(np.sum(np.abs(f.values - gv))) * f.grid.dz


def check_csiszar_kullback(f: DensityField, g: ProfileLike) -> float:
    """Residual 4 H(f||g) - ||f - g||_1^2 after normalizing both to mass 1."""
    gv = _profile_values(g)
    dz = f.grid.dz
    mf = float(np.sum(f.values)) * dz
    mg = float(np.sum(gv)) * dz
    if mf <= 0.0 or mg <= 0.0:
        raise ValueError("both arguments must carry positive mass")
    fn = DensityField(f.grid, f.values / mf, f.time)
    gn = gv / mg
    h = relative_entropy(fn, gn)
    d1 = float(np.sum(np.abs(fn.values - gn))) * dz
    return 4.0 * h - d1 * d1


def lyapunov_rescaled(
    u: DensityField, alpha: float, M: float
) -> tuple[float, dict[str, float]]:
    """Lyapunov functional of the self-similar frame for subcritical mass:
    L = H(u || G_alpha) + (J - alpha (1 - M))^2 / (2 (1 - M)).

    Vanishes exactly at the stationary profile; nonnegative by Jensen plus
    the square. alpha must solve the mass condition P(alpha) = M.
    """
    from .reference import rescaled_G

    if not (0.0 < M < 1.0):
        raise ValueError(f"rescaled Lyapunov needs 0 < M < 1, got {M}")
    mass = u.mass
    if abs(mass - M) > 1e-6 * max(mass, M):
        raise ValueError(
            f"field mass {mass} does not match the profile mass {M}"
        )
    ref = rescaled_G(alpha, u.grid).normalized_to(mass)
    H = relative_entropy(u, ref)
    J = first_moment(u)
    moment_term = (J - alpha * (1.0 - M)) ** 2 / (2.0 * (1.0 - M))
    return H + moment_term, {"H": H, "moment_term": moment_term}


def lyapunov_exchange(n: DensityField, mu: float, M: float) -> float:
    """Lyapunov functional of the boundary-exchange model (unit detachment):
    L = m H(n/m || h) + (mu - nu)^2 / 2 + mu log(mu/nu) + m log m,
    with nu = M - 1 and h = nu exp(-nu z) normalized on the grid.
    """
    from .reference import exchange_profile

    if not M > 1.0:
        raise ValueError(f"exchange Lyapunov needs M > 1, got {M}")
    if not mu > 0.0:
        raise ValueError(f"mu must be positive, got {mu}")
    m = n.mass
    if m <= 0.0:
        raise ValueError("cytoplasmic mass must be positive")
    if abs(mu + m - M) > 1e-6 * M:
        raise ValueError(
            f"mass budget violated: mu + m = {mu + m} but M = {M}"
        )
    nu = M - 1.0
    h = exchange_profile(nu, 1.0, n.grid).normalized_to(1.0)
    scaled = DensityField(n.grid, n.values / m, n.time)
    mH = m * relative_entropy(scaled, h)
    return (
        mH
        + 0.5 * (mu - nu) ** 2
        + mu * math.log(mu / nu)
        + m * math.log(m)
    )


def _face_drift_dissipation(f: DensityField, drift_at_face) -> float:
    """sum over faces of sqrt(n_l n_r) ((dlog n)/dz + drift)^2 dz.

    Faces adjacent to an empty cell contribute zero, matching the vacuum
    convention of the continuum integrand.
    """
    n = f.values
    dz = f.grid.dz
    left, right = n[:-1], n[1:]
    live = (left > _EMPTY) & (right > _EMPTY)
    if not np.any(live):
        return 0.0
    slope = (np.log(right[live]) - np.log(left[live])) / dz
    faces = f.grid.faces[1:-1][live]
    weight = np.sqrt(left[live] * right[live])
    s = slope + drift_at_face(faces)
    return float(np.sum(weight * s * s)) * dz


def dissipation_rescaled(u: DensityField, M: float, trace: float) -> float:
    """Dissipation of the rescaled Lyapunov functional:
    int u (d log u + y + u(0))^2 + (dJ/dtau)^2 / (1 - M),
    with dJ/dtau evaluated through the moment law (1 - M) u(0) - J.
    """
    if not (0.0 < M < 1.0):
        raise ValueError(f"rescaled dissipation needs 0 < M < 1, got {M}")
    flow = _face_drift_dissipation(u, lambda y: y + trace)
    dJ = (1.0 - M) * trace - first_moment(u)
    return flow + dJ * dJ / (1.0 - M)


def dissipation_exchange(
    n: DensityField, mu: float, M: float, trace: float
) -> tuple[float, dict[str, float]]:
    """Four-term dissipation of the exchange Lyapunov functional
    (unit detachment rate). Every term is individually nonnegative."""
    if not M > 1.0:
        raise ValueError(f"exchange dissipation needs M > 1, got {M}")
    m = n.mass
    nu = M - 1.0
    flow = _face_drift_dissipation(n, lambda z: trace / m)
    relax = m * (trace / m - mu) ** 2
    tr = max(trace, _EMPTY)
    mu_f = max(mu, _EMPTY)
    kinetics = (tr - mu_f) * (math.log(tr) - math.log(mu_f))
    anchor = mu * (mu - nu) ** 2
    terms = {
        "flow": flow,
        "relaxation": relax,
        "kinetics": kinetics,
        "anchor": anchor,
    }
    return flow + relax + kinetics + anchor, terms


@dataclass
class DiagnosticsRecord:
    """One output row: time plus every monitored functional.

    Optional entries stay None when the model does not define them; the
    serializer prints them as empty cells.
    """

    t: float
    mass: float
    trace: float
    J: float
    I: float
    entropy: float
    max_density: float
    boundary_mass_fraction: float
    J_alpha: Optional[float] = None
    rel_entropy: Optional[float] = None
    lyapunov: Optional[float] = None
    dissipation: Optional[float] = None
    extras: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.mass > 0.0:
            raise ValueError(f"recorded mass must be positive, got {self.mass}")
        if self.rel_entropy is not None and self.rel_entropy < -1e-9:
            raise ValueError(
                f"relative entropy fell below the Jensen floor: {self.rel_entropy}"
            )


CARLEMAN_RATES = (0.5, 1.0, 2.0)

TRACE_TOL = -1e-9
CARLEMAN_TOL = -1e-9
CSISZAR_KULLBACK_TOL = -1e-8
DISSIPATION_TOL = -1e-9


def audit_monitors(
    f: DensityField, reference: Optional[ProfileLike] = None
) -> dict[str, float]:
    """Evaluate the inequality monitors on a recorded state and raise if any
    residual falls below its tolerance.

    The trace inequality is audited with the telescoped boundary estimate,
    the one that satisfies the discrete Cauchy-Schwarz bound exactly.
    """
    out: dict[str, float] = {}
    tr = telescoped_trace(f)
    trace_res = check_trace_inequality(f, tr)
    out["trace_residual"] = trace_res
    if trace_res < TRACE_TOL:
        raise RuntimeError(f"trace inequality violated: residual {trace_res}")

    s = entropy(f)
    s_plus = positive_part_entropy(f)
    j = first_moment(f)
    carleman = min(
        s + a * j + 1.0 / (a * math.e) - s_plus for a in CARLEMAN_RATES
    )
    out["carleman_min"] = carleman
    if carleman < CARLEMAN_TOL:
        raise RuntimeError(f"Carleman bound violated: residual {carleman}")

    if reference is not None:
        ck = check_csiszar_kullback(f, reference)
        out["ck_residual"] = ck
        if ck < CSISZAR_KULLBACK_TOL:
            raise RuntimeError(
                f"Csiszar-Kullback inequality violated: residual {ck}"
            )
    return out


def boundary_mass_fraction(values: np.ndarray, axis_cells: int) -> float:
    """Fraction of the total mass held by the last 10% of cells along z."""
    tail = max(1, axis_cells // 10)
    total = float(np.sum(values))
    if total <= 0.0:
        return 0.0
    if values.ndim == 1:
        return float(np.sum(values[-tail:])) / total
    return float(np.sum(values[:, -tail:])) / total
