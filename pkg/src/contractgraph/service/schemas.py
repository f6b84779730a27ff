"""Pydantic request/response models for the scoring service."""
from __future__ import annotations

from pydantic import BaseModel, Field


class NodePayload(BaseModel):
    id: str
    type: str
    properties: dict[str, str] = Field(default_factory=dict)


class EdgePayload(BaseModel):
    source: str
    target: str
    type: str


class MiniGraphPayload(BaseModel):
    nodes: list[NodePayload] = Field(default_factory=list)
    edges: list[EdgePayload] = Field(default_factory=list)
    source_clause: str = ""


class ParseRequest(BaseModel):
    text: str
    source_clause: str = ""


class ParseResponse(BaseModel):
    classification: str
    diagnostics: list[str]
    minigraph: dict | None = None


class ScoreRequest(BaseModel):
    gold: MiniGraphPayload
    prediction: str
    step: int | None = None


class ScoreResponse(BaseModel):
    breakdown: dict
    gates: dict
    step: int | None = None


class GroupRequest(BaseModel):
    rewards: list[float]


class GroupResponse(BaseModel):
    advantages: list[float]


class GateResetResponse(BaseModel):
    gates: dict


class AssembleRequest(BaseModel):
    contract_id: str
    minigraphs: list[MiniGraphPayload]


class AssembleResponse(BaseModel):
    graph: dict
    report: dict


class LintRequest(BaseModel):
    graph: dict
    thresholds: dict | None = None


class PathsRequest(BaseModel):
    graph: dict
    source: str
    target: str
    max_paths: int = 10
    max_len: int = 12


class PathsResponse(BaseModel):
    paths: list[list[str]]


class ExportRequest(BaseModel):
    graph: dict
    format: str


class ExportResponse(BaseModel):
    format: str
    content: str


class AltTestRequest(BaseModel):
    table: dict
    epsilon: float = 0.1
    q: float = 0.05


class StopIndexRequest(BaseModel):
    text: str
    prompt_length: int = 0


class StopIndexResponse(BaseModel):
    stop_index: int | None = None


class TokenAllowedRequest(BaseModel):
    token: str


class TokenAllowedResponse(BaseModel):
    allowed: bool


class HealthResponse(BaseModel):
    status: str
