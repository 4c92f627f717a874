from __future__ import annotations

import json
import time

import pytest
from fastapi.testclient import TestClient

from priorank.data import worked_example_path
from priorank.service import create_app

SAMPLE_PROJECT = json.loads(worked_example_path().read_text())


def wait_until_settled(client: TestClient, session_id: str, timeout: float = 10.0) -> dict:
    deadline = time.time() + timeout
    while time.time() < deadline:
        state = client.get(f"/sessions/{session_id}").json()
        if not state["solving"]:
            return state
        time.sleep(0.02)
    raise AssertionError("solve never settled")


@pytest.fixture
def client(tmp_path):
    app = create_app(data_dir=tmp_path / "data")
    with TestClient(app) as test_client:
        yield test_client


def create_sample_session(client, budget=100, **extra):
    response = client.post("/sessions", json={"project": SAMPLE_PROJECT, "budget": budget, **extra})
    assert response.status_code == 201, response.text
    return response.json()


class TestHealth:
    def test_healthz(self, client):
        assert client.get("/healthz").json() == {"status": "ok"}


class TestCreateSession:
    def test_sample_project_initial_state(self, client):
        body = create_sample_session(client, budget=100)
        state = body["state"]
        assert state["cost"] == 2
        assert state["solution_count"] == 3
        assert len(state["pending"]) == 2
        assert state["status"] == "active"
        assert state["budget"] == {"max": 100, "used": 0, "remaining": 100}
        assert {tuple(p["pair"]) for p in state["pending"]} == {("R1", "R3"), ("R3", "R4")}

    def test_budget_zero_is_terminal_with_ranking(self, client):
        body = create_sample_session(client, budget=0)
        state = body["state"]
        assert state["status"] == "budget_exhausted"
        assert state["ranking"] == ["R2", "R1", "R3", "R4", "R5"]

    def test_invalid_project_lists_issues(self, client):
        bad = {"schema_version": 1, "requirements": [], "dependencies": []}
        response = client.post("/sessions", json={"project": bad, "budget": 10})
        assert response.status_code == 400
        assert response.json()["errors"]

    def test_cyclic_hard_edges_rejected_naming_cycle(self, client):
        project = {
            "schema_version": 1,
            "requirements": [
                {"id": "A", "title": "", "priority": 1},
                {"id": "B", "title": "", "priority": 1},
            ],
            "extra_graphs": [
                {
                    "name": "arch",
                    "edges": [
                        {"before": "A", "after": "B", "hard": True},
                        {"before": "B", "after": "A", "hard": True},
                    ],
                }
            ],
        }
        response = client.post("/sessions", json={"project": project, "budget": 10})
        assert response.status_code == 422
        assert set(response.json()["cycle"]) == {"A", "B"}

    def test_gold_metrics_exposed(self, client):
        state = create_sample_session(client, budget=0)["state"]
        assert state["metrics"]["disagreement_gs"] == 0
        assert state["metrics"]["avg_distance_gs"] == 0.0


class TestGetState:
    def test_unknown_session(self, client):
        assert client.get("/sessions/nope").status_code == 404

    def test_state_reflects_submitted_pairs(self, client):
        body = create_sample_session(client)
        session_id = body["session_id"]
        responses = [
            {"pair": ["R3", "R4"], "verdict": "second_precedes"},
            {"pair": ["R1", "R3"], "verdict": "second_precedes"},
        ]
        client.post(f"/sessions/{session_id}/responses", json={"responses": responses})
        state = wait_until_settled(client, session_id)
        assert state["budget"]["used"] == 2
        assert len(state["history"]) == 2


class TestSubmit:
    def test_full_batch_triggers_resolve(self, client):
        body = create_sample_session(client)
        session_id = body["session_id"]
        responses = [
            {"pair": ["R3", "R4"], "verdict": "second_precedes"},
            {"pair": ["R1", "R3"], "verdict": "second_precedes"},
        ]
        reply = client.post(f"/sessions/{session_id}/responses", json={"responses": responses})
        assert reply.status_code == 200
        state = wait_until_settled(client, session_id)
        assert state["iteration"] == 2
        # the analyst sided against the dependency knowledge: cost rises
        assert state["cost"] == 3

    def test_undecided_everywhere_keeps_cost(self, client):
        body = create_sample_session(client)
        session_id = body["session_id"]
        responses = [
            {"pair": ["R1", "R3"], "verdict": "undecided"},
            {"pair": ["R3", "R4"], "verdict": "undecided"},
        ]
        client.post(f"/sessions/{session_id}/responses", json={"responses": responses})
        state = wait_until_settled(client, session_id)
        assert state["cost"] == 2
        assert state["status"] == "plateau"
        assert state["budget"]["used"] == 2

    def test_partial_batch_stays_pending(self, client):
        body = create_sample_session(client)
        session_id = body["session_id"]
        reply = client.post(
            f"/sessions/{session_id}/responses",
            json={"responses": [{"pair": ["R1", "R3"], "verdict": "first_precedes"}]},
        )
        state = reply.json()["state"]
        assert state["solving"] is False
        assert [tuple(p["pair"]) for p in state["pending"]] == [("R3", "R4")]

    def test_double_submit_same_pair_conflicts(self, client):
        body = create_sample_session(client)
        session_id = body["session_id"]
        payload = {"responses": [{"pair": ["R1", "R3"], "verdict": "first_precedes"}]}
        assert client.post(f"/sessions/{session_id}/responses", json=payload).status_code == 200
        assert client.post(f"/sessions/{session_id}/responses", json=payload).status_code == 409

    def test_unknown_pair_conflicts(self, client):
        body = create_sample_session(client)
        session_id = body["session_id"]
        payload = {"responses": [{"pair": ["R2", "R5"], "verdict": "first_precedes"}]}
        assert client.post(f"/sessions/{session_id}/responses", json=payload).status_code == 409

    def test_concurrent_submit_rejected_with_retry(self, client):
        body = create_sample_session(client)
        session_id = body["session_id"]
        # take the per-session mutation lock the way an in-flight request would
        managed = client.app.state.sessions[session_id]
        assert managed.lock.acquire(blocking=False)
        try:
            payload = {"responses": [{"pair": ["R1", "R3"], "verdict": "first_precedes"}]}
            reply = client.post(f"/sessions/{session_id}/responses", json=payload)
            assert reply.status_code == 409
            assert reply.json()["retry"] is True
        finally:
            managed.lock.release()

    def test_bad_verdict_rejected(self, client):
        body = create_sample_session(client)
        session_id = body["session_id"]
        payload = {"responses": [{"pair": ["R1", "R3"], "verdict": "maybe"}]}
        assert client.post(f"/sessions/{session_id}/responses", json=payload).status_code == 400


class TestRanking:
    def test_active_session_has_no_ranking(self, client):
        body = create_sample_session(client)
        assert client.get(f"/sessions/{body['session_id']}/ranking").status_code == 409

    def test_terminal_ranking_matches_state(self, client):
        body = create_sample_session(client, budget=2)
        session_id = body["session_id"]
        responses = [
            {"pair": ["R3", "R4"], "verdict": "second_precedes"},
            {"pair": ["R1", "R3"], "verdict": "second_precedes"},
        ]
        client.post(f"/sessions/{session_id}/responses", json={"responses": responses})
        state = wait_until_settled(client, session_id)
        assert state["status"] == "budget_exhausted"
        ranking = client.get(f"/sessions/{session_id}/ranking").json()
        assert ranking["ranking"] == state["ranking"]
        assert ranking["cost"] == 3

    def test_unknown_session_ranking(self, client):
        assert client.get("/sessions/nope/ranking").status_code == 404


class TestPersistence:
    def test_sessions_survive_restart(self, tmp_path):
        data = tmp_path / "store"
        app = create_app(data_dir=data)
        with TestClient(app) as client:
            body = create_sample_session(client, budget=0)
            session_id = body["session_id"]

        fresh = create_app(data_dir=data)
        with TestClient(fresh) as client:
            state = client.get(f"/sessions/{session_id}").json()
            assert state["status"] == "budget_exhausted"
            assert state["ranking"] == ["R2", "R1", "R3", "R4", "R5"]
