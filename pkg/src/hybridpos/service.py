"""HTTP service exposing scenario validation, evaluation and the oracle suite."""

from __future__ import annotations

from fastapi import FastAPI, HTTPException

from . import oracle, scenario
from .errors import (HybridPosError, ScenarioParseError,
                     ScenarioValidationError, UnknownScenarioError)
from .schemas import (EvaluateRequest, EvaluateResponse, OracleReport,
                      ScenarioSpec, ValidateResponse)

app = FastAPI(
    title="hybridpos",
    description="Position/velocity error bounds for hybrid GNSS + 5G positioning",
    version="0.1.0",
)


@app.get("/health")
def health() -> dict:
    return {"status": "ok"}


@app.get("/scenarios/builtin/{name}", response_model=ScenarioSpec)
def get_builtin(name: str) -> ScenarioSpec:
    try:
        return scenario.builtin_scenario(name)
    except UnknownScenarioError as exc:
        raise HTTPException(status_code=404, detail=str(exc))


@app.post("/scenarios/validate", response_model=ValidateResponse)
def validate(payload: dict) -> ValidateResponse:
    try:
        scenario.validate_scenario(payload)
    except (ScenarioParseError, ScenarioValidationError) as exc:
        return ValidateResponse(valid=False, errors=[str(exc)])
    return ValidateResponse(valid=True)


@app.post("/evaluate", response_model=EvaluateResponse)
def evaluate(request: EvaluateRequest) -> EvaluateResponse:
    try:
        spec = (request.scenario if request.scenario is not None
                else scenario.builtin_scenario(request.builtin))
    except UnknownScenarioError as exc:
        raise HTTPException(status_code=404, detail=str(exc))
    try:
        rows = scenario.evaluate(spec, request.selector)
    except HybridPosError as exc:
        raise HTTPException(status_code=422, detail=str(exc))
    return EvaluateResponse(rows=rows)


@app.post("/oracle", response_model=OracleReport)
def run_oracles() -> OracleReport:
    return oracle.run_oracle_suite()
