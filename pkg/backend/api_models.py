"""
API Request/Response Models for HexHeight
Pydantic schemas for FastAPI endpoints
"""
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field


class TripleRequest(BaseModel):
    """Integer triple (a, b, c) of a positive-definite form"""
    a: int = Field(description="Coefficient of x^2")
    b: int = Field(description="Half the coefficient of x y")
    c: int = Field(description="Coefficient of y^2")

    model_config = ConfigDict(json_schema_extra={"example": {"a": 2, "b": 1, "c": 5}})


class EvalLRequest(TripleRequest):
    x: str = Field(description='Rational "p/q"')
    y: str = Field(description='Rational "p/q"')

    model_config = ConfigDict(json_schema_extra={"example": {"a": 2, "b": 1, "c": 2, "x": "1/3", "y": "1/3"}})


class FourierRequest(TripleRequest):
    M: int = Field(default=6, ge=0, le=30, description="Table covers |m|, |n| <= M")
    oracle: bool = Field(default=False, description="Add quadrature oracle columns")
    grid_exponent: int = Field(default=11, ge=6, le=13)

    model_config = ConfigDict(json_schema_extra={"example": {"a": 2, "b": 1, "c": 5, "M": 2, "oracle": False}})


class AvgDRequest(TripleRequest):
    x: str
    y: str
    d: int = Field(ge=1, description="Multiple of 2 Delta(a, b, c)")

    model_config = ConfigDict(
        json_schema_extra={"example": {"a": 1, "b": 0, "c": 1, "x": "1/3", "y": "0", "d": 2}}
    )


class ThetaRequest(BaseModel):
    Q: List[List[str]] = Field(description="Symmetric positive-definite rational matrix")
    w: List[str] = Field(description="Rational vector")
    n: List[int] = Field(description="Integer translation")

    model_config = ConfigDict(
        json_schema_extra={"example": {"Q": [["1", "0"], ["0", "1"]], "w": ["0", "0"], "n": [1, 0]}}
    )


class HolderRequest(BaseModel):
    alpha: float = Field(gt=0)
    beta: float = Field(gt=0)
    e: List[float] = Field(min_length=1, description="e[0] must be the largest entry")

    model_config = ConfigDict(json_schema_extra={"example": {"alpha": 1.0, "beta": 1.0, "e": [2, 1, 1]}})


class ReportResponse(BaseModel):
    """Rows of one subcommand in their JSON-lines form"""
    subcommand: str
    seed: Optional[int] = None
    rows: List[Dict[str, Any]]
    checks_failed: int = Field(default=0, description="Theorem-backed checks that failed")
    failed_checks: List[str] = Field(default_factory=list, description="Names of the failed checks, in run order")

    model_config = ConfigDict(
        json_schema_extra={
            "example": {
                "subcommand": "avg-d",
                "seed": None,
                "rows": [{"x": "1/3", "y": "0/1", "d": 2, "closed_form": "7/36",
                          "direct": "7/36", "equal": True}],
                "checks_failed": 0,
                "failed_checks": [],
            }
        }
    )


class ErrorResponse(BaseModel):
    """Error response for API endpoints"""
    error: str = Field(description="Error type")
    detail: str = Field(description="Detailed error message")

    model_config = ConfigDict(
        json_schema_extra={"example": {"error": "NotNormalizedError", "detail": "(5,1,2) is not normalized"}}
    )


class HealthResponse(BaseModel):
    """Health check response"""
    status: str = Field(description="Service status")
    version: str = Field(description="API version")

    model_config = ConfigDict(json_schema_extra={"example": {"status": "healthy", "version": "1.0.0"}})
