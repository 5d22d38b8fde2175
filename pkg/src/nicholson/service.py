"""HTTP face of the toolkit: a FastAPI app wrapping the analysis pipeline.

Run it with ``uvicorn nicholson.service:app``; the bundled CLI talks to the
same app in-process, so no running server is needed for local work.
"""

from __future__ import annotations

from typing import Literal, Optional

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from .classify import classify_dynamics
from .equilibrium import NewtonError
from .matrices import SingularMatrixError, SpectralConvergenceError
from .model import validate_system
from .pipeline import run_reproduction, run_sweep, simulate_scenario
from .scenarios import (
    FIGURE_PRESETS,
    ScenarioError,
    scenario_from_dict,
    scenario_to_dict,
)
from .simulate import HistoryError, IntegrationError

app = FastAPI(
    title="nicholson",
    description="Threshold classification and simulation of n-patch Nicholson systems",
)

NUMERIC_ERRORS = (
    IntegrationError,
    NewtonError,
    SpectralConvergenceError,
    SingularMatrixError,
)


class HistoryModel(BaseModel):
    kind: Literal["constant", "sampled"] = "constant"
    value: Optional[list[float]] = None
    times: Optional[list[float]] = None
    values: Optional[list[list[float]]] = None
    admissibility: Literal["C+", "C0+"] = "C0+"


class ScenarioModel(BaseModel):
    name: str = "scenario"
    n: int = Field(ge=1)
    m: int = Field(ge=1)
    d: list[float]
    a: list[list[float]]
    beta: list[list[float]]
    tau: list[list[float]]
    enforce_mortality_form: bool = True
    history: Optional[HistoryModel] = None
    t_end: float = 500.0
    dt: Optional[float] = None


class ViolationModel(BaseModel):
    rule: str
    message: str


class ValidationResponse(BaseModel):
    ok: bool
    violations: list[ViolationModel]
    derived_mortalities: Optional[list[float]] = None
    tau_max: Optional[float] = None


class ClassifyResponse(BaseModel):
    name: str
    report: dict


class SimulateRequest(BaseModel):
    scenario: ScenarioModel
    t_end: Optional[float] = None
    dt: Optional[float] = None
    label_tol: float = 1e-3


class SimulateResponse(BaseModel):
    name: str
    csv: str
    tail: dict
    labels: list[str]
    x_star: Optional[list[float]] = None


class ReproduceRequest(BaseModel):
    figure_id: str


class ReproduceResponse(BaseModel):
    manifest: dict
    csv: str
    matched: bool


class SweepRequest(BaseModel):
    scenario: ScenarioModel
    patch: int = Field(ge=0)
    delay_index: int = Field(ge=0, default=0)
    tau_from: float = Field(gt=0)
    tau_to: float = Field(gt=0)
    steps: int = Field(ge=1)
    t_end: Optional[float] = None
    dt: Optional[float] = None
    label_tol: float = 1e-3


class SweepRow(BaseModel):
    tau: float
    label: str
    amplitude: float


class SweepResponse(BaseModel):
    patch: int
    delay_index: int
    rows: list[SweepRow]


def _scenario_of(model: ScenarioModel):
    try:
        return scenario_from_dict(model.model_dump(exclude_none=True))
    except (ScenarioError, HistoryError) as exc:
        raise HTTPException(status_code=400, detail={"kind": "parse", "message": str(exc)})


@app.get("/health")
def health() -> dict:
    return {"status": "ok"}


@app.post("/validate", response_model=ValidationResponse)
def validate_endpoint(scenario: ScenarioModel) -> ValidationResponse:
    sc = _scenario_of(scenario)
    report = validate_system(sc.system)
    data = report.to_dict()
    return ValidationResponse(
        ok=data["ok"],
        violations=[ViolationModel(**v) for v in data["violations"]],
        derived_mortalities=data["derived_mortalities"],
        tau_max=data["tau_max"],
    )


@app.post("/classify", response_model=ClassifyResponse)
def classify_endpoint(scenario: ScenarioModel) -> ClassifyResponse:
    sc = _scenario_of(scenario)
    validation = validate_system(sc.system)
    if not validation.ok:
        raise HTTPException(
            status_code=400,
            detail={"kind": "invalid-system", "violations": validation.to_dict()["violations"]},
        )
    try:
        report = classify_dynamics(sc.system)
    except NUMERIC_ERRORS as exc:
        raise HTTPException(status_code=500, detail={"kind": "numeric", "message": str(exc)})
    return ClassifyResponse(name=sc.name, report=report.to_dict())


@app.post("/simulate", response_model=SimulateResponse)
def simulate_endpoint(request: SimulateRequest) -> SimulateResponse:
    sc = _scenario_of(request.scenario)
    validation = validate_system(sc.system)
    if not validation.ok:
        raise HTTPException(
            status_code=400,
            detail={"kind": "invalid-system", "violations": validation.to_dict()["violations"]},
        )
    try:
        outcome = simulate_scenario(sc, t_end=request.t_end, dt=request.dt,
                                    label_tol=request.label_tol)
    except (HistoryError, ValueError) as exc:
        raise HTTPException(status_code=400, detail={"kind": "invalid-request", "message": str(exc)})
    except NUMERIC_ERRORS as exc:
        raise HTTPException(status_code=500, detail={"kind": "numeric", "message": str(exc)})
    return SimulateResponse(
        name=sc.name,
        csv=outcome.trajectory.to_csv(),
        tail=outcome.tail,
        labels=outcome.labels,
        x_star=outcome.x_star,
    )


@app.get("/presets")
def presets_endpoint() -> dict:
    return {
        "figures": [
            {
                "figure_id": preset.figure_id,
                "pair": preset.pair,
                "note": preset.note,
                "label_tolerance": preset.label_tol,
                "expected_labels": [list(e) for e in preset.expected_labels],
                "scenario": scenario_to_dict(preset.scenario),
            }
            for preset in FIGURE_PRESETS.values()
        ]
    }


@app.post("/reproduce", response_model=ReproduceResponse)
def reproduce_endpoint(request: ReproduceRequest) -> ReproduceResponse:
    try:
        outcome = run_reproduction(request.figure_id)
    except KeyError as exc:
        raise HTTPException(status_code=400, detail={"kind": "parse", "message": str(exc)})
    except NUMERIC_ERRORS as exc:
        raise HTTPException(status_code=500, detail={"kind": "numeric", "message": str(exc)})
    return ReproduceResponse(manifest=outcome.manifest, csv=outcome.csv, matched=outcome.matched)


@app.post("/sweep", response_model=SweepResponse)
def sweep_endpoint(request: SweepRequest) -> SweepResponse:
    sc = _scenario_of(request.scenario)
    try:
        rows = run_sweep(
            sc,
            patch=request.patch,
            delay_index=request.delay_index,
            tau_from=request.tau_from,
            tau_to=request.tau_to,
            steps=request.steps,
            t_end=request.t_end,
            dt=request.dt,
            label_tol=request.label_tol,
        )
    except (HistoryError, ValueError) as exc:
        raise HTTPException(status_code=400, detail={"kind": "invalid-request", "message": str(exc)})
    except NUMERIC_ERRORS as exc:
        raise HTTPException(status_code=500, detail={"kind": "numeric", "message": str(exc)})
    return SweepResponse(
        patch=request.patch,
        delay_index=request.delay_index,
        rows=[SweepRow(**row) for row in rows],
    )
