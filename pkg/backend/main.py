"""
FastAPI Application for HexHeight
Thin HTTP wrappers over the orchestrator used by the command line
"""
import logging
from typing import Any, Dict

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from fastapi.middleware.cors import CORSMiddleware

from backend.api_models import (
    AvgDRequest,
    ErrorResponse,
    EvalLRequest,
    FourierRequest,
    HealthResponse,
    HolderRequest,
    ReportResponse,
    ThetaRequest,
    TripleRequest,
)
from backend.config import settings
from backend.errors import HexHeightError, InvalidTripleError, TheoremCheckFailed
from backend.orchestrator import orchestrator
from backend.state import OutputFormat, RunConfig, Subcommand
from backend.utils.report_writer import to_json_value
from backend.utils.run_logger import configure_logging

configure_logging()
logger = logging.getLogger(__name__)

VERSION = "1.0.0"

# Create FastAPI app
app = FastAPI(
    title="HexHeight API",
    description="Bernoulli local heights, Fourier coefficients and theorem checks",
    version=VERSION,
)

# Add CORS middleware (for development)
app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],  # For development only
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)


def _error(status_code: int, exc: Exception) -> JSONResponse:
    body = ErrorResponse(error=type(exc).__name__, detail=str(exc))
    return JSONResponse(status_code=status_code, content=body.model_dump())


@app.exception_handler(TheoremCheckFailed)
async def theorem_check_failed_handler(request: Request, exc: TheoremCheckFailed):
    logger.error("check failed on %s: %s", request.url.path, exc)
    return _error(500, exc)


@app.exception_handler(InvalidTripleError)
async def invalid_triple_handler(request: Request, exc: InvalidTripleError):
    return _error(422, exc)


@app.exception_handler(HexHeightError)
async def domain_error_handler(request: Request, exc: HexHeightError):
    return _error(400, exc)


@app.exception_handler(ValueError)
async def value_error_handler(request: Request, exc: ValueError):
    return _error(400, exc)


def _run(subcommand: Subcommand, params: Dict[str, Any], **flags: Any) -> ReportResponse:
    """Run one subcommand; domain errors reach the exception handlers above"""
    config = RunConfig(
        subcommand=subcommand,
        params=params,
        seed=settings.default_seed,
        output_format=OutputFormat.JSON_LINES,
        **flags,
    )
    report = orchestrator.run(config)
    for check in report.failed:
        logger.warning("%s: check %s failed %s", subcommand.value, check.name, check.detail)
    columns = orchestrator.columns(subcommand)
    rows = [{col: to_json_value(row.get(col)) for col in columns} for row in report.rows]
    return ReportResponse(
        subcommand=subcommand.value,
        seed=report.seed,
        rows=rows,
        checks_failed=len(report.failed),
        failed_checks=[check.name for check in report.failed],
    )


@app.get("/api/health", response_model=HealthResponse)
async def health_check():
    """Health check endpoint"""
    return HealthResponse(status="healthy", version=VERSION)


@app.post("/api/reduce", response_model=ReportResponse)
def reduce_triple(request: TripleRequest):
    """Gauss normalization with the recorded basis change"""
    return _run(Subcommand.REDUCE, request.model_dump())


@app.post("/api/eval-l", response_model=ReportResponse)
def eval_l(request: EvalLRequest):
    """L at a rational point, with region and minimizing offsets"""
    return _run(Subcommand.EVAL_L, request.model_dump())


@app.post("/api/fourier", response_model=ReportResponse)
def fourier_table(request: FourierRequest):
    """Closed-form coefficient table, optionally against the quadrature oracle"""
    params = request.model_dump(include={"a", "b", "c", "M"})
    return _run(Subcommand.FOURIER, params, oracle=request.oracle, grid_exponent=request.grid_exponent)


@app.post("/api/avg-d", response_model=ReportResponse)
def avg_d(request: AvgDRequest):
    """Closed-form d-average against direct torsion enumeration"""
    return _run(Subcommand.AVG_D, request.model_dump())


@app.post("/api/theta", response_model=ReportResponse)
def theta(request: ThetaRequest):
    """Tropical theta transformation and invariance identities"""
    return _run(Subcommand.THETA, request.model_dump())


@app.post("/api/holder", response_model=ReportResponse)
def holder(request: HolderRequest):
    """Holder-type inequality with its intermediate and sharper bounds"""
    return _run(Subcommand.HOLDER, request.model_dump())


if __name__ == "__main__":
    import uvicorn
    uvicorn.run(app, host="0.0.0.0", port=8000)
