"""Pydantic request/response models for the HTTP service.

The config model mirrors the flat JSON schema of the file-based interface;
deep validation (cross-field requirements, derived defaults) stays in
``polarsim.config.build_config`` so the CLI and the service cannot drift
apart.
"""

from __future__ import annotations

from typing import Optional

from pydantic import BaseModel, ConfigDict, Field


class ConfigModel(BaseModel):
    model_config = ConfigDict(extra="forbid", protected_namespaces=())

    model: str
    mass: float
    t_end: float
    gamma: Optional[float] = None
    alpha: Optional[float] = None
    L: Optional[float] = None
    C_2d: Optional[float] = None
    z_max: Optional[float] = None
    n_cells: Optional[int] = None
    y_min: Optional[float] = None
    y_max: Optional[float] = None
    ny: Optional[int] = None
    nz: Optional[int] = None
    ic: Optional[dict] = None
    j0_scale: Optional[float] = None
    mu0: Optional[float] = None
    cfl: Optional[float] = None
    dt_floor: Optional[float] = None
    output_every: Optional[float] = None
    density_cap: Optional[float] = None
    trace_cap: Optional[float] = None
    seed: Optional[int] = None
    track_balance: Optional[bool] = None

    def to_raw(self) -> dict:
        return {k: v for k, v in self.model_dump().items() if v is not None}


class RecordModel(BaseModel):
    t: float
    mass: float
    trace: float
    J: float
    I: float
    J_alpha: Optional[float] = None
    entropy: float
    rel_entropy: Optional[float] = None
    lyapunov: Optional[float] = None
    dissipation: Optional[float] = None
    max_density: float
    boundary_mass_fraction: float


class BlowUpModel(BaseModel):
    detected: bool
    t_detect: Optional[float] = None
    criterion: Optional[str] = None
    analytic_bound: Optional[float] = None


class TerminalFieldModel(BaseModel):
    kind: str
    z: list[float]
    values: list
    y: Optional[list[float]] = None


class RunRequest(BaseModel):
    config: ConfigModel


class RunResponse(BaseModel):
    records: list[RecordModel]
    blowup: BlowUpModel
    terminal_field: TerminalFieldModel
    config_echo: dict


class SweepRequest(BaseModel):
    config: ConfigModel
    param: str
    values: list[float]


class SweepRowModel(BaseModel):
    param: str
    value: float
    detected: bool
    t_detect: Optional[float] = None
    criterion: Optional[str] = None
    terminal: RecordModel


class SweepResponse(BaseModel):
    rows: list[SweepRowModel]


class BisectRequest(BaseModel):
    config: ConfigModel
    m_lo: float
    m_hi: float
    tol: float = Field(gt=0.0)


class ProbeModel(BaseModel):
    mass: float
    detected: bool


class BisectResponse(BaseModel):
    estimate: float
    m_lo: float
    m_hi: float
    probes: list[ProbeModel]


class HealthResponse(BaseModel):
    status: str
    version: str
