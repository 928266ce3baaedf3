"""HTTP face of the toolkit.

Every operation the CLI offers is a route here; the CLI itself is a
thin client that posts to this app, either in process or over the
network. Endpoints return domain verdicts (violated, not certified,
left the float range) as 200 responses with a status field so callers
can distinguish them from malformed requests, which get 400/422.
"""

from __future__ import annotations

import numpy as np
from fastapi import FastAPI, HTTPException

from .. import __version__
from ..blowup import gain_from_json
from ..decay import GainMatrix, InterconnectionSpec, check_theorem_conditions, weighted_decay_rate
from ..errors import (
    DomainError,
    InvalidBlowUp,
    MissingSignal,
    NonFiniteState,
    NoQuadraticFloor,
    NotDiagonallyStable,
    SpecMismatch,
    TimeOutOfHorizon,
)
from ..sim import (
    IntegratorOptions,
    TimeHorizon,
    Trajectory,
    certify_pt_exp,
    integrate,
    read_csv_columns,
    terminal_metrics,
    trajectory_to_csv,
)
from ..systems import build_preset, preset_catalog, scalar_benchmark_field
from .schemas import (
    CertifyRequest,
    CertifyResponse,
    DecayRateRequest,
    DecayRateResponse,
    HealthResponse,
    PresetInfo,
    SimulateRequest,
    SimulateResponse,
    VerifyRequest,
    VerifyResponse,
)

# Faults in the request itself: unknown names, inconsistent shapes,
# values outside preconditions. Everything here maps to HTTP 400.
_INPUT_FAULTS = (
    SpecMismatch,
    InvalidBlowUp,
    DomainError,
    TimeOutOfHorizon,
    MissingSignal,
    NoQuadraticFloor,
    ValueError,
)


def _reject(exc: Exception) -> HTTPException:
    return HTTPException(
        status_code=400,
        detail={"error": type(exc).__name__, "message": str(exc)},
    )


def _trajectory_from_csv(text: str) -> Trajectory:
    times, cols = read_csv_columns(text)
    names = tuple(cols)
    states = np.column_stack([cols[n] for n in names])
    return Trajectory(times, names, states, {}, {}, {}, {})


def create_app() -> FastAPI:
    app = FastAPI(title="ptstab", version=__version__)

    @app.get("/health", response_model=HealthResponse)
    def health() -> HealthResponse:
        return HealthResponse(status="ok", version=__version__)

    @app.get("/presets", response_model=list[PresetInfo])
    def presets() -> list[PresetInfo]:
        return [PresetInfo(**entry) for entry in preset_catalog()]

    @app.post("/simulate", response_model=SimulateResponse)
    def simulate(req: SimulateRequest) -> SimulateResponse:
        if (req.preset is None) == (req.system is None):
            raise _reject(
                SpecMismatch("exactly one of preset or system must be given")
            )
        try:
            if req.preset is not None:
                run = build_preset(req.preset, req.config)
                field, horizon = run.field, run.horizon
                x0, options = run.x0, run.options
                figure, config, residuals = run.figure, run.config, run.residuals
            else:
                phi = gain_from_json(req.system.phi.to_json())
                horizon = TimeHorizon(
                    float(req.config.get("T", phi.T)),
                    None
                    if req.config.get("Tbar") is None
                    else float(req.config["Tbar"]),
                )
                field = scalar_benchmark_field(phi, req.system.scale, req.system.v0)
                x0 = np.array([req.system.v0])
                options = IntegratorOptions(
                    h0=None
                    if req.config.get("h0") is None
                    else float(req.config["h0"]),
                    kappa=float(req.config.get("kappa", 1e-2)),
                    terminal_gap=None
                    if req.config.get("terminalGap") is None
                    else float(req.config["terminalGap"]),
                )
                figure = {
                    "x": "t",
                    "panels": [
                        {"title": "decay", "columns": ["v", "V", "env"], "logy": True}
                    ],
                }
                config = {
                    "system": "scalar",
                    "T": horizon.T,
                    "Tbar": horizon.Tbar,
                    "scale": req.system.scale,
                    "v0": req.system.v0,
                }
                residuals = None
        except _INPUT_FAULTS as exc:
            raise _reject(exc) from exc

        try:
            traj = integrate(field, horizon, x0, options)
        except NonFiniteState as exc:
            return SimulateResponse(
                status="non_finite_state",
                preset=req.preset,
                detail=str(exc),
                t=exc.t,
                metadata={"config": config},
            )
        except _INPUT_FAULTS as exc:
            raise _reject(exc) from exc

        metadata = {
            "config": config,
            "integrator": traj.meta,
            "figure": figure,
            "columns": traj.column_names(),
        }
        if req.checkResiduals and residuals is not None:
            metadata["residuals"] = {
                name: {
                    "satisfied": rep.satisfied,
                    "maxViolation": rep.max_violation,
                }
                for name, rep in residuals(traj).items()
            }
        metrics = terminal_metrics(traj)
        if req.format == "csv":
            return SimulateResponse(
                status="ok",
                preset=req.preset,
                csv=trajectory_to_csv(traj),
                metadata=metadata,
                metrics=metrics,
            )
        names = traj.column_names()
        series = {"t": traj.times.tolist()}
        for name in names[1:]:
            series[name] = traj.signal(name).tolist()
        return SimulateResponse(
            status="ok",
            preset=req.preset,
            table={"names": names, "series": series},
            metadata=metadata,
            metrics=metrics,
        )

    @app.post("/verify", response_model=VerifyResponse)
    def verify(req: VerifyRequest) -> VerifyResponse:
        if (req.preset is None) == (req.spec is None):
            raise _reject(SpecMismatch("exactly one of preset or spec must be given"))
        try:
            if req.preset is not None:
                run = build_preset(req.preset)
                if run.interconnection is None:
                    raise SpecMismatch(
                        f"preset {req.preset!r} has no interconnection description"
                    )
                spec = run.interconnection
            else:
                spec = InterconnectionSpec.from_json(req.spec.model_dump())
        except _INPUT_FAULTS as exc:
            raise _reject(exc) from exc
        report = check_theorem_conditions(spec)
        return VerifyResponse(
            status="certified" if report.certified else "not_certified",
            report=report.to_json(),
        )

    @app.post("/decay-rate", response_model=DecayRateResponse)
    def decay_rate(req: DecayRateRequest) -> DecayRateResponse:
        try:
            matrix = GainMatrix(
                tuple(req.a), tuple(tuple(row) for row in req.b)
            )
        except _INPUT_FAULTS as exc:
            raise _reject(exc) from exc
        try:
            result = weighted_decay_rate(matrix)
        except NotDiagonallyStable as exc:
            return DecayRateResponse(
                status="not_diagonally_stable", detail=str(exc)
            )
        return DecayRateResponse(status="ok", result=result.to_json())

    @app.post("/certify", response_model=CertifyResponse)
    def certify(req: CertifyRequest) -> CertifyResponse:
        try:
            rate = gain_from_json(req.rate.to_json())
            traj = _trajectory_from_csv(req.csv)
            report = certify_pt_exp(
                traj,
                req.signal,
                rate,
                onset=req.onset,
                onset_search=req.onsetSearch,
                c_cap=req.cCap,
            )
        except _INPUT_FAULTS as exc:
            raise _reject(exc) from exc
        return CertifyResponse(status=report.verdict, report=report.to_json())

    return app


app = create_app()
