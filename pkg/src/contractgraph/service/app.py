"""FastAPI application wrapping the core package for trainer integration.

One process holds one gate state: the staged reward schedule is training-run
state, so a training run should own its service instance. A lock keeps
score requests sequential, which keeps gate evolution deterministic even
under concurrent clients.
"""
from __future__ import annotations

import threading

from fastapi import FastAPI, HTTPException
from fastapi.responses import JSONResponse

from .. import alttest, export, guards, linter, reward
from ..assemble import graph_from_obj, graph_to_obj, merge_minigraphs
from ..errors import ContractGraphError
from ..ingest import minigraph_from_json, minigraph_to_obj, parse_minigraph
from . import schemas


def _to_minigraph(payload: schemas.MiniGraphPayload):
    obj = {
        "nodes": [node.model_dump() for node in payload.nodes],
        "edges": [edge.model_dump() for edge in payload.edges],
    }
    return minigraph_from_json(obj, source_clause=payload.source_clause)


def create_app(config: reward.RewardConfig | None = None) -> FastAPI:
    app = FastAPI(title="contractgraph scoring service", version="0.1.0")
    app.state.config = config or reward.RewardConfig()
    app.state.gate_state = reward.GateState(config=app.state.config)
    app.state.gate_lock = threading.Lock()

    @app.exception_handler(ContractGraphError)
    async def _domain_error(request, exc: ContractGraphError):  # noqa: ANN001
        return JSONResponse(status_code=422, content={"detail": str(exc)})

    @app.get("/health", response_model=schemas.HealthResponse)
    def health() -> schemas.HealthResponse:
        return schemas.HealthResponse(status="ok")

    @app.post("/parse", response_model=schemas.ParseResponse)
    def parse(request: schemas.ParseRequest) -> schemas.ParseResponse:
        outcome = parse_minigraph(request.text, request.source_clause)
        return schemas.ParseResponse(
            classification=outcome.classification.value,
            diagnostics=outcome.diagnostics,
            minigraph=minigraph_to_obj(outcome.minigraph) if outcome.minigraph else None,
        )

    @app.post("/score", response_model=schemas.ScoreResponse)
    def score(request: schemas.ScoreRequest) -> schemas.ScoreResponse:
        gold = _to_minigraph(request.gold)
        with app.state.gate_lock:
            scores, _ = reward.score_prediction(gold, request.prediction, app.state.config)
            breakdown, app.state.gate_state = reward.gated_reward_step(
                scores, app.state.gate_state
            )
            gates = app.state.gate_state.summary()
        return schemas.ScoreResponse(breakdown=breakdown.to_obj(), gates=gates, step=request.step)

    @app.post("/score/reset", response_model=schemas.GateResetResponse)
    def reset_gates() -> schemas.GateResetResponse:
        with app.state.gate_lock:
            app.state.gate_state = reward.GateState(config=app.state.config)
            gates = app.state.gate_state.summary()
        return schemas.GateResetResponse(gates=gates)

    @app.post("/group", response_model=schemas.GroupResponse)
    def group(request: schemas.GroupRequest) -> schemas.GroupResponse:
        return schemas.GroupResponse(advantages=reward.group_advantages(request.rewards))

    @app.post("/assemble", response_model=schemas.AssembleResponse)
    def assemble(request: schemas.AssembleRequest) -> schemas.AssembleResponse:
        minigraphs = [_to_minigraph(payload) for payload in request.minigraphs]
        graph, report = merge_minigraphs(request.contract_id, minigraphs)
        return schemas.AssembleResponse(graph=graph_to_obj(graph), report=report.to_obj())

    @app.post("/lint")
    def lint(request: schemas.LintRequest) -> dict:
        graph = graph_from_obj(request.graph)
        thresholds = (
            linter.LintThresholds.from_obj(request.thresholds)
            if request.thresholds is not None
            else None
        )
        return linter.lint_report(graph, thresholds).to_obj()

    @app.post("/paths", response_model=schemas.PathsResponse)
    def paths(request: schemas.PathsRequest) -> schemas.PathsResponse:
        graph = graph_from_obj(request.graph)
        found = linter.find_paths(
            graph, request.source, request.target, request.max_paths, request.max_len
        )
        return schemas.PathsResponse(paths=found)

    @app.post("/export", response_model=schemas.ExportResponse)
    def export_endpoint(request: schemas.ExportRequest) -> schemas.ExportResponse:
        graph = graph_from_obj(request.graph)
        return schemas.ExportResponse(
            format=request.format, content=export.export_graph(graph, request.format)
        )

    @app.post("/alt-test")
    def run_alt_test(request: schemas.AltTestRequest) -> dict:
        table = alttest.AnnotationTable.from_obj(request.table)
        report = alttest.alt_test(table, epsilon=request.epsilon, q=request.q)
        return report.to_obj()

    @app.post("/guards/stop-index", response_model=schemas.StopIndexResponse)
    def stop_index(request: schemas.StopIndexRequest) -> schemas.StopIndexResponse:
        if request.prompt_length < 0 or request.prompt_length > len(request.text):
            raise HTTPException(status_code=422, detail="prompt_length out of range")
        return schemas.StopIndexResponse(
            stop_index=guards.json_stop_index(request.text, request.prompt_length)
        )

    @app.post("/guards/token-allowed", response_model=schemas.TokenAllowedResponse)
    def token_allowed(request: schemas.TokenAllowedRequest) -> schemas.TokenAllowedResponse:
        return schemas.TokenAllowedResponse(allowed=guards.token_allowed(request.token))

    return app
