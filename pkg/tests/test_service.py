"""HTTP surface: request/response contracts and error mapping."""

import numpy as np
import pytest
from fastapi.testclient import TestClient

from nicholson.service import app


@pytest.fixture(scope="module")
def client():
    with TestClient(app) as c:
        yield c


def ex22_payload(**overrides):
    payload = {
        "name": "example-2.2",
        "n": 2, "m": 1,
        "d": [3.0, 2.0],
        "a": [[0.0, 1.0], [1.0, 0.0]],
        "beta": [[1.0], [3.0]],
        "tau": [[5.0], [10.0]],
        "history": {"kind": "constant", "value": [1.0, 1.0], "admissibility": "C0+"},
        "t_end": 80.0,
    }
    payload.update(overrides)
    return payload


def test_health(client):
    resp = client.get("/health")
    assert resp.status_code == 200
    assert resp.json() == {"status": "ok"}


def test_validate_ok(client):
    resp = client.post("/validate", json=ex22_payload())
    assert resp.status_code == 200
    body = resp.json()
    assert body["ok"] is True
    assert body["derived_mortalities"] == [2.0, 1.0]
    assert body["tau_max"] == 10.0


def test_validate_reports_violations(client):
    resp = client.post("/validate", json=ex22_payload(beta=[[0.0], [3.0]]))
    assert resp.status_code == 200
    body = resp.json()
    assert body["ok"] is False
    assert any(v["rule"] == "birth-on-every-patch" for v in body["violations"])


def test_validate_malformed_payload(client):
    resp = client.post("/validate", json={"n": 2})
    assert resp.status_code == 422


def test_classify_report_shape(client):
    resp = client.post("/classify", json=ex22_payload())
    assert resp.status_code == 200
    report = resp.json()["report"]
    assert report["verdict_zero"] == "ZeroUnstable"
    assert report["per_patch"]["kind"] == "AllPatchesPersistent"
    assert report["gas_certificate"] == "A2Prime_xStarLe2"
    assert report["equilibrium"]["index"] == 1
    assert len(report["bounds"]["upper"]) == 2


def test_classify_rejects_invalid_system(client):
    resp = client.post("/classify", json=ex22_payload(beta=[[0.0], [3.0]]))
    assert resp.status_code == 400
    assert resp.json()["detail"]["kind"] == "invalid-system"


def test_classify_deterministic(client):
    a = client.post("/classify", json=ex22_payload())
    b = client.post("/classify", json=ex22_payload())
    assert a.content == b.content


def test_simulate(client):
    resp = client.post("/simulate", json={"scenario": ex22_payload(), "t_end": 60.0})
    assert resp.status_code == 200
    body = resp.json()
    lines = body["csv"].strip().split("\n")
    assert lines[0] == "t,x1,x2"
    assert len(lines) == 6002    # 60 / 0.01 steps + header + initial node
    assert body["labels"] == ["ConvergedToPositive", "ConvergedToPositive"]
    assert body["x_star"] is not None


def test_simulate_bad_history(client):
    payload = ex22_payload(history={"kind": "constant", "value": [-1.0, 1.0]})
    resp = client.post("/simulate", json={"scenario": payload})
    assert resp.status_code == 400


def test_simulate_oversized_step(client):
    resp = client.post("/simulate", json={"scenario": ex22_payload(), "dt": 2.0})
    assert resp.status_code == 400


def test_presets_catalog(client):
    resp = client.get("/presets")
    assert resp.status_code == 200
    figures = resp.json()["figures"]
    assert [f["figure_id"] for f in figures] == ["1a", "1b", "2a", "2b", "3a", "3b"]
    for fig in figures:
        assert fig["scenario"]["n"] in (2, 3)
        assert len(fig["expected_labels"]) == fig["scenario"]["n"]


def test_reproduce_unknown_figure(client):
    resp = client.post("/reproduce", json={"figure_id": "9z"})
    assert resp.status_code == 400
    assert resp.json()["detail"]["kind"] == "parse"


def test_reproduce_figure_1a(client):
    resp = client.post("/reproduce", json={"figure_id": "1a"})
    assert resp.status_code == 200
    body = resp.json()
    assert body["matched"] is True
    manifest = body["manifest"]
    assert manifest["figure_id"] == "1a"
    assert manifest["observed_labels"] == ["ConvergedToPositive", "ConvergedToPositive"]
    assert manifest["trajectory_csv"] == "trajectory.csv"
    assert body["csv"].startswith("t,x1,x2\n")


def test_sweep_zero_length(client):
    body = {
        "scenario": ex22_payload(t_end=60.0),
        "patch": 1, "delay_index": 0,
        "tau_from": 10.0, "tau_to": 10.0, "steps": 1,
    }
    resp = client.post("/sweep", json=body)
    assert resp.status_code == 200
    rows = resp.json()["rows"]
    assert len(rows) == 1
    assert rows[0]["tau"] == 10.0


def test_sweep_rows_sorted(client):
    body = {
        "scenario": ex22_payload(t_end=60.0),
        "patch": 1, "delay_index": 0,
        "tau_from": 9.0, "tau_to": 5.0, "steps": 3,
    }
    resp = client.post("/sweep", json=body)
    assert resp.status_code == 200
    taus = [row["tau"] for row in resp.json()["rows"]]
    assert taus == sorted(taus)
    assert len(taus) == 3
