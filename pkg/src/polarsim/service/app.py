"""FastAPI service wrapping the solver suite.

Endpoints mirror the CLI subcommands: POST /run, POST /sweep, POST /bisect,
plus GET /health. Config problems map to 400, a bad bisection bracket to
409; payloads are identical to what the CLI writes, so a thin client can
serialize responses to the standard output files.
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException

from .. import __version__
from ..config import build_config
from ..errors import BracketError, ConfigError
from ..runner import bisect_critical_mass, run, sweep
from .models import (
    BisectRequest,
    BisectResponse,
    HealthResponse,
    RunRequest,
    RunResponse,
    SweepRequest,
    SweepResponse,
)


def create_app() -> FastAPI:
    app = FastAPI(
        title="polarsim",
        version=__version__,
        description="Boundary-coupled drift-diffusion solver service",
    )

    @app.get("/health", response_model=HealthResponse)
    def health() -> dict:
        return {"status": "ok", "version": __version__}

    @app.post("/run", response_model=RunResponse)
    def run_endpoint(req: RunRequest) -> dict:
        cfg = _config_or_400(req.config.to_raw())
        try:
            result = run(cfg)
        except ConfigError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        return result.to_payload()

    @app.post("/sweep", response_model=SweepResponse)
    def sweep_endpoint(req: SweepRequest) -> dict:
        cfg = _config_or_400(req.config.to_raw())
        try:
            rows = sweep(cfg, req.param, req.values)
        except ConfigError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        return {"rows": [r.to_payload() for r in rows]}

    @app.post("/bisect", response_model=BisectResponse)
    def bisect_endpoint(req: BisectRequest) -> dict:
        cfg = _config_or_400(req.config.to_raw())
        try:
            result = bisect_critical_mass(cfg, req.m_lo, req.m_hi, req.tol)
        except ConfigError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        except BracketError as exc:
            raise HTTPException(status_code=409, detail=str(exc))
        return result.to_payload()

    return app


def _config_or_400(raw: dict):
    try:
        return build_config(raw)
    except ConfigError as exc:
        raise HTTPException(status_code=400, detail=str(exc))


app = create_app()
