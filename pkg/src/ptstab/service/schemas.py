"""Request and response shapes for the HTTP service.

Wire keys are camelCase to match the JSON emitted by the core report
types. Domain outcomes (a violated certificate, an unstable matrix, a
run that left the float range) are successful responses with a status
field; HTTP 400/422 is reserved for requests that are malformed or
fail a precondition.
"""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field


class GainTerm(BaseModel):
    model_config = ConfigDict(extra="forbid")

    k: int = Field(ge=0)
    c: float


class GainSpec(BaseModel):
    """A blow-up gain: offset + sum of c * xi**k terms, diverging at T."""

    model_config = ConfigDict(extra="forbid")

    T: float = Field(gt=0.0)
    offset: float = 0.0
    terms: list[GainTerm]

    def to_json(self) -> dict:
        return {
            "T": self.T,
            "offset": self.offset,
            "terms": [{"k": t.k, "c": t.c} for t in self.terms],
        }


class ScalarSystemSpec(BaseModel):
    """Inline one-dimensional benchmark v' = -scale * phi * v."""

    model_config = ConfigDict(extra="forbid")

    kind: Literal["scalar"] = "scalar"
    phi: GainSpec
    scale: float = 2.0
    v0: float = 1.0


class SimulateRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    preset: Optional[str] = None
    system: Optional[ScalarSystemSpec] = None
    config: dict = Field(default_factory=dict)
    format: Literal["csv", "json"] = "csv"
    checkResiduals: bool = False


class SimulateResponse(BaseModel):
    status: Literal["ok", "non_finite_state"]
    preset: Optional[str] = None
    csv: Optional[str] = None
    table: Optional[dict] = None
    metadata: dict = Field(default_factory=dict)
    metrics: Optional[dict] = None
    detail: Optional[str] = None
    t: Optional[float] = None


class SystemEntry(BaseModel):
    model_config = ConfigDict(extra="forbid")

    phi: GainSpec
    a: float


class CouplingSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    p_coeffs: list[float]
    phi3: dict


class InterconnectionPayload(BaseModel):
    model_config = ConfigDict(extra="forbid")

    topology: str
    systems: list[SystemEntry]
    b: list[list[float]]
    coupling: Optional[CouplingSpec] = None


class VerifyRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    preset: Optional[str] = None
    spec: Optional[InterconnectionPayload] = None


class VerifyResponse(BaseModel):
    status: Literal["certified", "not_certified"]
    report: dict


class DecayRateRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    a: list[float]
    b: list[list[float]]


class DecayRateResponse(BaseModel):
    status: Literal["ok", "not_diagonally_stable"]
    result: Optional[dict] = None
    detail: Optional[str] = None


class CertifyRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    csv: str
    signal: str
    rate: GainSpec
    onset: float = 0.0
    onsetSearch: bool = False
    cCap: float = Field(default=1e12, gt=0.0)


class CertifyResponse(BaseModel):
    status: Literal["certified", "violated"]
    report: dict


class PresetInfo(BaseModel):
    name: str
    summary: str
    defaults: dict
    columns: list[str]


class HealthResponse(BaseModel):
    status: Literal["ok"]
    version: str
