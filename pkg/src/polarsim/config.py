"""Run configuration: ingestion, validation, and defaults.

Configs are flat snake_case JSON. Only `model`, `mass`, and `t_end` are
required; everything else receives a documented default. Validation errors
name the offending key so the CLI and the service can surface it directly.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, asdict
from pathlib import Path
from typing import Any, Optional

from .core import Grid1D, Grid2D, InitialCondition, make_grid_1d, make_grid_2d
from .errors import ConfigError

MODELS = (
    "bks1d",
    "rescaled1d",
    "exchange1d",
    "interval1d",
    "range1d",
    "transversal2d",
    "potential2d",
)

MODELS_1D = ("bks1d", "rescaled1d", "exchange1d", "interval1d", "range1d")
MODELS_2D = ("transversal2d", "potential2d")

IC_KINDS = ("exponential", "half_gaussian", "step", "table")

SWEEP_PARAMS = {
    "mass": "mass",
    "alpha": "alpha",
    "L": "L",
    "gamma": "gamma",
    "C_2d": "C_2d",
    "J0-scale": "j0_scale",
}

_KNOWN_KEYS = {
    "model", "mass", "gamma", "alpha", "L", "C_2d",
    "z_max", "n_cells", "y_min", "y_max", "ny", "nz",
    "ic", "j0_scale", "mu0",
    "t_end", "cfl", "dt_floor", "output_every",
    "density_cap", "trace_cap",
    "seed", "track_balance",
}

_IC_KEYS = {"kind", "alpha", "sigma", "shift", "width", "path", "sigma_y", "center_y"}


@dataclass(frozen=True)
class RunConfig:
    model: str
    mass: float
    t_end: float
    gamma: float = 1.0
    alpha: Optional[float] = None
    L: Optional[float] = None
    C_2d: Optional[float] = None
    z_max: float = 0.0
    n_cells: int = 400
    y_min: float = -6.0
    y_max: float = 6.0
    ny: int = 64
    nz: int = 64
    ic: dict = field(default_factory=lambda: {"kind": "exponential", "alpha": 1.0})
    j0_scale: float = 1.0
    mu0: float = 0.0
    cfl: float = 0.45
    dt_floor: float = 1e-12
    output_every: float = 0.0
    density_cap: float = 0.0
    trace_cap: float = 0.0
    seed: int = 0
    track_balance: bool = False

    def grid_1d(self) -> Grid1D:
        return make_grid_1d(self.z_max, self.n_cells)

    def grid_2d(self) -> Grid2D:
        return make_grid_2d(self.y_min, self.y_max, self.z_max, self.ny, self.nz)

    def initial_condition(self) -> InitialCondition:
        kw = {
            k: v
            for k, v in self.ic.items()
            if k in ("alpha", "sigma", "shift", "width", "path")
        }
        return InitialCondition(
            kind=self.ic["kind"],
            target_mass=self.mass,
            length_scale=self.j0_scale,
            **kw,
        )

    def echo(self) -> dict:
        return asdict(self)


def _require(raw: dict, key: str) -> Any:
    if key not in raw:
        raise ConfigError(f"missing required config key {key!r}")
    return raw[key]


def _positive(raw: dict, key: str, value: float) -> float:
    try:
        out = float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"config key {key!r} must be a number, got {value!r}")
    if not (out > 0.0 and math.isfinite(out)):
        raise ConfigError(f"config key {key!r} must be positive, got {value!r}")
    return out


def build_config(raw: dict) -> RunConfig:
    """Validate a raw mapping and fill defaults."""
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(raw) - _KNOWN_KEYS
    if unknown:
        raise ConfigError(f"unknown config key {sorted(unknown)[0]!r}")

    model = _require(raw, "model")
    if model not in MODELS:
        raise ConfigError(f"unknown model {model!r} for key 'model'")
    mass = _positive(raw, "mass", _require(raw, "mass"))
    t_end = _positive(raw, "t_end", _require(raw, "t_end"))

    gamma = _positive(raw, "gamma", raw.get("gamma", 1.0))
    mu0 = float(raw.get("mu0", 0.0))
    if mu0 < 0.0 or mu0 >= mass:
        raise ConfigError(
            f"config key 'mu0' must lie in [0, mass), got {mu0} with mass {mass}"
        )
    j0_scale = _positive(raw, "j0_scale", raw.get("j0_scale", 1.0))
    cfl = _positive(raw, "cfl", raw.get("cfl", 0.45))
    if cfl > 1.0:
        raise ConfigError(f"config key 'cfl' must lie in (0, 1], got {cfl}")
    dt_floor = _positive(raw, "dt_floor", raw.get("dt_floor", 1e-12))
    output_every = _positive(raw, "output_every", raw.get("output_every", t_end / 200.0))

    alpha = raw.get("alpha")
    if alpha is not None:
        alpha = _positive(raw, "alpha", alpha)
    L = raw.get("L")
    if L is not None:
        L = _positive(raw, "L", L)
    C_2d = raw.get("C_2d")
    if C_2d is not None:
        C_2d = _positive(raw, "C_2d", C_2d)

    if model == "interval1d":
        if L is None:
            raise ConfigError("model 'interval1d' requires config key 'L'")
        z_max = L
    else:
        z_max = _positive(raw, "z_max", raw.get("z_max", 30.0 / mass))
    if model == "range1d" and alpha is None:
        raise ConfigError("model 'range1d' requires config key 'alpha'")
    if model == "potential2d" and C_2d is None:
        raise ConfigError("model 'potential2d' requires config key 'C_2d'")
    if model == "rescaled1d" and mass >= 1.0:
        raise ConfigError("model 'rescaled1d' requires subcritical 'mass' < 1")

    try:
        n_cells = int(raw.get("n_cells", 400))
    except (TypeError, ValueError):
        raise ConfigError("config key 'n_cells' must be an integer")
    if n_cells < 4:
        raise ConfigError(f"config key 'n_cells' must be at least 4, got {n_cells}")

    y_min = float(raw.get("y_min", -6.0))
    y_max = float(raw.get("y_max", 6.0))
    try:
        ny = int(raw.get("ny", 64))
        nz = int(raw.get("nz", 64))
    except (TypeError, ValueError):
        raise ConfigError("config keys 'ny'/'nz' must be integers")
    if model in MODELS_2D:
        if not y_max > y_min:
            raise ConfigError("config key 'y_max' must exceed 'y_min'")
        if ny < 4 or nz < 4:
            raise ConfigError("config keys 'ny'/'nz' must be at least 4")

    ic_raw = raw.get("ic", {"kind": "exponential", "alpha": 1.0})
    if not isinstance(ic_raw, dict):
        raise ConfigError("config key 'ic' must be an object")
    bad = set(ic_raw) - _IC_KEYS
    if bad:
        raise ConfigError(f"unknown initial-condition key {sorted(bad)[0]!r}")
    kind = ic_raw.get("kind", "exponential")
    if kind not in IC_KINDS:
        raise ConfigError(f"unknown initial-condition kind {kind!r} for key 'ic'")
    if kind == "table" and not ic_raw.get("path"):
        raise ConfigError("initial-condition kind 'table' requires key 'path'")
    ic = {"kind": kind}
    for key in ("alpha", "sigma", "shift", "width", "sigma_y", "center_y"):
        if key in ic_raw:
            ic[key] = float(ic_raw[key])
    if "path" in ic_raw:
        ic["path"] = str(ic_raw["path"])

    if model in MODELS_2D:
        dz = z_max / nz
        domain = (y_max - y_min) * z_max
    else:
        dz = z_max / n_cells
        domain = z_max
    density_cap = _positive(raw, "density_cap", raw.get("density_cap", 1e6 * mass / domain))
    # the discrete trace saturates near M x*(M)/dz once the profile
    # concentrates at grid scale; an eighth of M/dz sits above the critical
    # attractors yet below every super-critical saturation level
    trace_cap = _positive(raw, "trace_cap", raw.get("trace_cap", 0.125 * mass / dz))

    if model == "range1d" and alpha * z_max > 700.0:
        raise ConfigError(
            "config key 'alpha': exp(alpha*z_max) overflows; shrink alpha or z_max"
        )

    try:
        seed = int(raw.get("seed", 0))
    except (TypeError, ValueError):
        raise ConfigError("config key 'seed' must be an integer")

    return RunConfig(
        model=model,
        mass=mass,
        t_end=t_end,
        gamma=gamma,
        alpha=alpha,
        L=L,
        C_2d=C_2d,
        z_max=z_max,
        n_cells=n_cells,
        y_min=y_min,
        y_max=y_max,
        ny=ny,
        nz=nz,
        ic=ic,
        j0_scale=j0_scale,
        mu0=mu0,
        cfl=cfl,
        dt_floor=dt_floor,
        output_every=output_every,
        density_cap=density_cap,
        trace_cap=trace_cap,
        seed=seed,
        track_balance=bool(raw.get("track_balance", False)),
    )


def parse_config(path: str | Path) -> RunConfig:
    """Read and validate a JSON config file."""
    p = Path(path)
    try:
        raw = json.loads(p.read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path!r}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path!r} is not valid JSON: {exc}") from exc
    return build_config(raw)


def with_param(cfg: RunConfig, param: str, value: float) -> RunConfig:
    """Copy a config with one sweep parameter replaced.

    The base config is already fully resolved, so grid and detection
    settings stay fixed across the sweep; only the named physics parameter
    moves.
    """
    if param not in SWEEP_PARAMS:
        raise ConfigError(f"unknown sweep parameter {param!r}")
    raw = {k: v for k, v in cfg.echo().items() if v is not None}
    raw[SWEEP_PARAMS[param]] = value
    return build_config(raw)
