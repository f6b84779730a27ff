import json
import random

import pytest
from fastapi.testclient import TestClient

from contractgraph.service import create_app
from graphgen import annotation_panel

GOLD = {
    "nodes": [
        {"id": "c", "type": "CLAUSE", "properties": {"id": "1"}},
        {"id": "t", "type": "DEFINED_TERM", "properties": {"term": "Confidential Information"}},
    ],
    "edges": [{"source": "c", "target": "t", "type": "USES"}],
    "source_clause": "1",
}


@pytest.fixture()
def client():
    return TestClient(create_app())


def test_health(client):
    response = client.get("/health")
    assert response.status_code == 200
    assert response.json() == {"status": "ok"}


def test_parse_endpoint(client):
    response = client.post("/parse", json={"text": '{"nodes":[],"edges":['})
    assert response.status_code == 200
    body = response.json()
    assert body["classification"] == "REPAIRED"
    assert body["minigraph"] == {"nodes": [], "edges": []}


def test_score_identity_and_gate_progression(client):
    payload = {"gold": GOLD, "prediction": json.dumps({"nodes": GOLD["nodes"], "edges": GOLD["edges"]}), "step": 1}
    first = client.post("/score", json=payload).json()
    assert first["breakdown"]["structure"] == 1.0
    assert first["breakdown"]["total"] == 1.0  # stage 0: structure only
    assert first["step"] == 1
    second = client.post("/score", json=payload).json()
    assert second["gates"]["stage"] >= first["gates"]["stage"]
    reset = client.post("/score/reset").json()
    assert reset["gates"]["stage"] == 0


def test_group_endpoint(client):
    response = client.post("/group", json={"rewards": [2, 4, 4, 6]})
    advantages = response.json()["advantages"]
    assert advantages[1] == advantages[2] == 0.0
    assert advantages[0] == pytest.approx(-(2**0.5))

    bad = client.post("/group", json={"rewards": [1]})
    assert bad.status_code == 422


def test_assemble_and_lint_endpoints(client):
    assemble = client.post(
        "/assemble",
        json={
            "contract_id": "svc",
            "minigraphs": [
                {"nodes": GOLD["nodes"], "edges": GOLD["edges"], "source_clause": "1"},
                {
                    "nodes": [{"id": "c2", "type": "CLAUSE", "properties": {"id": "2"}}],
                    "edges": [{"source": "c2", "target": "1", "type": "REFERENCES"}],
                    "source_clause": "2",
                },
            ],
        },
    )
    assert assemble.status_code == 200
    body = assemble.json()
    assert body["graph"]["contract_id"] == "svc"
    assert body["report"]["nodes_out"] == len(body["graph"]["nodes"])

    lint = client.post("/lint", json={"graph": body["graph"]})
    assert lint.status_code == 200
    report = lint.json()
    assert report["node_count"] == body["report"]["nodes_out"]
    assert report["depth_unit"] == "edges"

    thresholds = client.post(
        "/lint", json={"graph": body["graph"], "thresholds": {"max_depth": 0}}
    ).json()
    assert any(f["rule"] == "max-depth" for f in thresholds["findings"])


def test_export_endpoint(client):
    graph = client.post(
        "/assemble",
        json={
            "contract_id": "svc",
            "minigraphs": [{"nodes": GOLD["nodes"], "edges": GOLD["edges"], "source_clause": "1"}],
        },
    ).json()["graph"]
    response = client.post("/export", json={"graph": graph, "format": "dot"})
    assert response.status_code == 200
    assert 'digraph "svc"' in response.json()["content"]
    bad = client.post("/export", json={"graph": graph, "format": "svg"})
    assert bad.status_code == 422


def test_alt_test_endpoint(client):
    table = annotation_panel(random.Random(8), 20, "consensus")
    response = client.post("/alt-test", json={"table": table, "epsilon": 0.0, "q": 0.05})
    assert response.status_code == 200
    assert response.json()["passed"] is True

    short = annotation_panel(random.Random(9), 5, "consensus")
    del short["humans"]["h3"]
    bad = client.post("/alt-test", json={"table": short})
    assert bad.status_code == 422


def test_paths_endpoint(client):
    graph = client.post(
        "/assemble",
        json={
            "contract_id": "svc",
            "minigraphs": [
                {
                    "nodes": [
                        {"id": "a", "type": "CLAUSE", "properties": {"id": "a"}},
                        {"id": "b", "type": "CLAUSE", "properties": {"id": "b"}},
                    ],
                    "edges": [{"source": "a", "target": "b", "type": "REFERENCES"}],
                    "source_clause": "a",
                }
            ],
        },
    ).json()["graph"]
    response = client.post(
        "/paths", json={"graph": graph, "source": "CLAUSE|a", "target": "CLAUSE|b"}
    )
    assert response.json()["paths"] == [["CLAUSE|a", "CLAUSE|b"]]


def test_guard_endpoints(client):
    stop = client.post(
        "/guards/stop-index", json={"text": 'ab{"x":[1]}tail', "prompt_length": 2}
    )
    assert stop.json()["stop_index"] == 11
    nothing = client.post("/guards/stop-index", json={"text": '{"x":', "prompt_length": 0})
    assert nothing.json()["stop_index"] is None
    out_of_range = client.post("/guards/stop-index", json={"text": "ab", "prompt_length": 5})
    assert out_of_range.status_code == 422

    assert client.post("/guards/token-allowed", json={"token": " 30"}).json()["allowed"] is True
    assert client.post("/guards/token-allowed", json={"token": "é"}).json()["allowed"] is False


def test_validation_errors_are_422(client):
    response = client.post("/score", json={"prediction": "x"})
    assert response.status_code == 422
    bad_graph = client.post("/lint", json={"graph": {"contract_id": ""}})
    assert bad_graph.status_code == 422
