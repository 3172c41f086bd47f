"""HTTP service wrapping the core package.

Calibration tables are expensive to build and cheap to share, so the
service keeps an in-memory registry (optionally preloaded from a
directory of table JSON files) and serves scan/fit/test requests
against it.  Long batch experiments belong to the CLI, not here.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Dict, List, Literal, Optional

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from . import ar1, innovations as innov, limits
from .errors import (
    CalibrationRequiredError,
    ConfigError,
    DataError,
    DegenerateSeriesError,
    EpiscanError,
    ParameterError,
)
from .inference import HeavyTailMode, LightTailMode, fit_ar1, run_test, validate_mode
from .stats import scan_statistic


class SimulateRequest(BaseModel):
    model: dict
    innovation: dict
    epidemic: Optional[dict] = None
    n: int = Field(ge=1)
    seed: int = 0
    replicate: int = 0


class SimulateResponse(BaseModel):
    y: List[float]
    eps: List[float]
    tau: List[float]
    z: List[float]
    phi: float


class ScanRequest(BaseModel):
    x: List[float]
    alpha: float
    k_min: Literal[0, 1] = 0
    scale_ratio: Optional[float] = None


class ScanResponse(BaseModel):
    value: float
    k_hat: int
    ell_hat: int
    alpha: float
    k_min: int


class FitRequest(BaseModel):
    y: List[float]


class FitResponse(BaseModel):
    phi_hat: float
    sigma_hat: float
    denominator: float
    residuals: List[float]


class CalibrateRequest(BaseModel):
    alpha: float
    grid_n: int = 2048
    reps: int = 10_000
    seed: int = 0


class TableSummary(BaseModel):
    alpha: float
    grid_n: int
    reps: int
    master_seed: int
    quantiles: Dict[str, float]
    sample_digest: str


class CriticalValueRequest(BaseModel):
    alpha: float
    level: float = Field(gt=0, lt=1)


class CriticalValueResponse(BaseModel):
    alpha: float
    level: float
    critical_value: float


class TestRequest(BaseModel):
    y: List[float]
    alpha: float
    level: float = 0.05
    mode: dict
    k_min: Literal[0, 1] = 0
    scale_ratio: Optional[float] = None


def _mode_from_payload(mode: dict):
    kind = mode.get("kind")
    if kind == "light_tail":
        return LightTailMode(p=float(mode.get("p", 2.0)), sigma=mode.get("sigma"))
    if kind == "heavy_tail":
        spec = (
            innov.spec_from_json(mode["innovation"]) if "innovation" in mode else None
        )
        if "p" not in mode:
            raise ConfigError("heavy_tail mode requires p")
        return HeavyTailMode(p=float(mode["p"]), b_n=mode.get("b_n"), spec=spec)
    raise ConfigError(f"mode.kind must be light_tail or heavy_tail, got {kind!r}")


def create_app(tables_dir: Optional[str] = None) -> FastAPI:
    app = FastAPI(title="episcan", version="0.1.0")
    registry: Dict[float, limits.CriticalValueTable] = {}

    if tables_dir:
        for path in sorted(Path(tables_dir).glob("*.json")):
            table = limits.load_table(path)
            registry[table.alpha] = table

    _status = {
        ParameterError: 422,
        ConfigError: 422,
        DegenerateSeriesError: 422,
        CalibrationRequiredError: 409,
        DataError: 400,
    }

    @app.exception_handler(EpiscanError)
    async def _handle(request: Request, exc: EpiscanError):
        code = next(
            (c for t, c in _status.items() if isinstance(exc, t)), 500
        )
        return JSONResponse(
            status_code=code,
            content={"error": type(exc).__name__, "message": str(exc)},
        )

    @app.get("/health")
    def health():
        return {"status": "ok", "tables": sorted(registry)}

    @app.post("/simulate", response_model=SimulateResponse)
    def simulate(req: SimulateRequest):
        model = ar1.model_from_json(req.model)
        spec = innov.spec_from_json(req.innovation)
        epidemic = (
            ar1.EpidemicSpec.from_json(req.epidemic)
            if req.epidemic is not None
            else ar1.EpidemicSpec.null()
        )
        eps = innov.sample_innovations(
            spec, req.n, innov.Stream(req.seed, req.replicate)
        )
        bundle = ar1.simulate(model, epidemic, eps)
        return SimulateResponse(
            y=bundle.y.tolist(),
            eps=bundle.eps.tolist(),
            tau=bundle.tau.tolist(),
            z=bundle.z.tolist(),
            phi=ar1.resolve_phi(model, req.n),
        )

    @app.post("/scan", response_model=ScanResponse)
    def scan(req: ScanRequest):
        res = scan_statistic(
            req.x, req.alpha, k_min=req.k_min, scale_ratio=req.scale_ratio
        )
        return ScanResponse(**json.loads(res.to_json()))

    @app.post("/fit", response_model=FitResponse)
    def fit(req: FitRequest):
        res = fit_ar1(req.y)
        return FitResponse(
            phi_hat=res.phi_hat,
            sigma_hat=res.sigma_hat,
            denominator=res.denominator,
            residuals=res.residuals.tolist(),
        )

    @app.post("/calibrate", response_model=TableSummary)
    def calibrate(req: CalibrateRequest):
        table = limits.build_table(req.alpha, req.grid_n, req.reps, req.seed)
        registry[table.alpha] = table
        return _summary(table)

    @app.get("/tables", response_model=List[TableSummary])
    def tables():
        return [_summary(t) for _, t in sorted(registry.items())]

    @app.post("/critical-value", response_model=CriticalValueResponse)
    def critical(req: CriticalValueRequest):
        table = registry.get(req.alpha)
        if table is None:
            raise CalibrationRequiredError(
                f"no table for alpha={req.alpha}; POST /calibrate first"
            )
        value = limits.critical_value(table, req.alpha, 1.0 - req.level)
        return CriticalValueResponse(
            alpha=req.alpha, level=req.level, critical_value=value
        )

    @app.post("/test")
    def test(req: TestRequest):
        mode = _mode_from_payload(req.mode)
        validate_mode(req.alpha, mode)
        table = registry.get(req.alpha) if isinstance(mode, LightTailMode) else None
        if isinstance(mode, LightTailMode) and table is None:
            raise CalibrationRequiredError(
                f"no table for alpha={req.alpha}; POST /calibrate first"
            )
        report = run_test(
            req.y,
            req.alpha,
            mode,
            level=req.level,
            table=table,
            k_min=req.k_min,
            scale_ratio=req.scale_ratio,
        )
        return json.loads(report.to_json())

    def _summary(table: limits.CriticalValueTable) -> TableSummary:
        return TableSummary(
            alpha=table.alpha,
            grid_n=table.grid_n,
            reps=table.reps,
            master_seed=table.master_seed,
            quantiles={repr(q): v for q, v in table.quantiles.items()},
            sample_digest=table.sample_digest,
        )

    return app
