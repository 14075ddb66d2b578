import json
import math
import time

import pytest
from fastapi.testclient import TestClient

from fairplai.service import MEDIA_TYPE, create_app
from fairplai.store import Store

SCHEMA_DOC = {
    "columns": [
        {"name": "age", "kind": "numeric", "bounds": [18, 90]},
        {"name": "hours", "kind": "numeric", "bounds": [0, 99]},
        {"name": "sex", "kind": "categorical", "categories": ["f", "m"]},
        {"name": "income", "kind": "binary"},
    ],
    "label": "income",
    "protected": ["sex"],
}


def _csv_bytes(n=400, seed=3):
    import numpy as np
    rng = np.random.default_rng(seed)
    lines = ["age,hours,sex,income"]
    for i in range(n):
        sex = "m" if i % 2 else "f"
        age = int(rng.integers(18, 90))
        hours = int(rng.integers(10, 80))
        y = int((age + hours + (8 if sex == "m" else 0)
                 + rng.normal(0, 12)) > 95)
        lines.append(f"{age},{hours},{sex},{y}")
    return "\n".join(lines).encode()


@pytest.fixture(scope="module")
def client(tmp_path_factory):
    store = Store(tmp_path_factory.mktemp("svc-store"))
    app = create_app(store=store, max_workers=2)
    with TestClient(app, raise_server_exceptions=False) as c:
        yield c


@pytest.fixture(scope="module")
def dataset_id(client):
    r = client.post("/v1/datasets", files={
        "csv": ("d.csv", _csv_bytes(), "text/csv"),
        "schema": ("d.json", json.dumps(SCHEMA_DOC).encode(),
                   "application/json")})
    assert r.status_code == 201
    assert r.headers["content-type"].startswith(MEDIA_TYPE)
    return r.json()["id"]


def _wait_for(client, job_id, timeout=120):
    deadline = time.monotonic() + timeout
    while time.monotonic() < deadline:
        job = client.get(f"/v1/jobs/{job_id}").json()
        if job["status"] in ("done", "failed"):
            return job
        time.sleep(0.1)
    raise AssertionError("job did not finish")


@pytest.fixture(scope="module")
def frontier_id(client, dataset_id):
    grid = {"epsilons": [1.0, "Infinity"],
            "constraints": [None,
                            {"kind": "DemographicParity", "delta": 0.05}],
            "model_kinds": ["logreg"], "seeds": [0, 1],
            "intervention": "postprocess+dp"}
    r = client.post("/v1/frontiers",
                    json={"dataset_id": dataset_id, "grid": grid,
                          "master_seed": 5})
    assert r.status_code == 202
    job = _wait_for(client, r.json()["job_id"])
    assert job["status"] == "done", job["error"]
    assert job["progress"] == {"done": 4, "total": 4}
    return job["result"]


def test_dataset_round_trip(client, dataset_id):
    r = client.get(f"/v1/datasets/{dataset_id}")
    assert r.status_code == 200
    body = r.json()
    assert body["label"] == "income"
    assert body["protected"] == ["sex"]
    assert body["rows"] == 400


def test_unknown_ids_are_404(client):
    assert client.get("/v1/datasets/" + "0" * 64).status_code == 404
    assert client.get("/v1/jobs/job-999999").status_code == 404
    assert client.get("/v1/frontiers/" + "0" * 64).status_code == 404
    assert client.get("/v1/contracts/" + "0" * 64).status_code == 404


def test_frontier_document(client, frontier_id):
    r = client.get(f"/v1/frontiers/{frontier_id}")
    assert r.status_code == 200
    doc = r.json()["frontier"]
    assert len(doc["points"]) == 4
    # infinities cross the wire as string sentinels
    eps = {p["epsilon"] for p in doc["points"]}
    assert eps == {1.0, "Infinity"}


def test_frontier_pareto_and_csv(client, frontier_id):
    r = client.get(f"/v1/frontiers/{frontier_id}",
                   params={"pareto": "accuracy,epsilon"})
    assert r.status_code == 200
    assert 1 <= len(r.json()["frontier"]["points"]) <= 4
    r = client.get(f"/v1/frontiers/{frontier_id}", params={"format": "csv"})
    assert r.json()["csv"].startswith("point_id,")
    r = client.get(f"/v1/frontiers/{frontier_id}", params={"pareto": "speed"})
    assert r.status_code == 400


def test_invalid_grid_is_422(client, dataset_id):
    r = client.post("/v1/frontiers", json={
        "dataset_id": dataset_id,
        "grid": {"epsilons": [], "constraints": [None],
                 "model_kinds": ["logreg"], "seeds": [0]}})
    assert r.status_code == 422
    assert r.json()["error"] == "InvalidGrid"


def test_lexicon_endpoint(client):
    body = client.get("/v1/lexicon").json()
    assert body["version"] == "lexicon-v1"
    assert body["fairness_descriptors"]["strict"] == 0.03
    assert body["privacy_descriptors"]["strong"] == [0.5, 1.0]


def test_policy_translation(client, frontier_id):
    r = client.post(f"/v1/frontiers/{frontier_id}/policy", json={
        "prompt": ("equal outcomes across groups, lenient, "
                   "epsilon between 0.5 and 2, at least 60% accuracy")})
    assert r.status_code == 200
    body = r.json()
    tup = body["tuple"]
    assert tup["criterion"] == "DemographicParity"
    assert tup["delta"] == 0.1
    assert body["provenance"]["metric"] == "given"
    assert "percentage points" in body["explanation"]
    assert set(body["candidates"]["explanations"]) \
        == set(body["candidates"]["ids"])


def test_policy_unrecognized_intent_has_span(client, frontier_id):
    r = client.post(f"/v1/frontiers/{frontier_id}/policy",
                    json={"prompt": "make it maximally fair"})
    assert r.status_code == 422
    body = r.json()
    assert body["error"] == "UnrecognizedIntent"
    assert "maximally fair" in body["span"]


def test_policy_attribute_mismatch_is_422(client, frontier_id):
    tup = {"criterion": "DemographicParity", "delta": 0.1,
           "epsilon_band": [0.5, 2.0], "attributes": ["race"],
           "metric": {"name": "accuracy", "minimum": 0.6},
           "pi": {"kind": "constraint_first", "order": None}}
    r = client.post(f"/v1/frontiers/{frontier_id}/policy",
                    json={"tuple": tup})
    assert r.status_code == 422
    assert r.json()["error"] == "AttributeMismatch"


def _policy_body(client, frontier_id):
    return client.post(f"/v1/frontiers/{frontier_id}/policy", json={
        "prompt": ("equal outcomes across groups, lenient, "
                   "epsilon between 0.5 and 2, at least 60% accuracy")}).json()


def test_selection_contract_and_audit(client, frontier_id):
    body = _policy_body(client, frontier_id)
    assert body["candidates"]["ids"], body["candidates"]["diagnostics"]
    r = client.post(f"/v1/frontiers/{frontier_id}/selection", json={
        "tuple": body["tuple"],
        "frontier_digest": body["frontier_digest"]})
    assert r.status_code == 201
    contract_id = r.json()["contract_id"]
    contract = r.json()["contract"]
    assert contract["chosen_id"] in body["candidates"]["ids"]

    got = client.get(f"/v1/contracts/{contract_id}").json()["contract"]
    assert got == contract
    audit = client.get(f"/v1/contracts/{contract_id}/audit").json()
    assert audit["passed"] is True


def test_selection_infeasible_choice_is_409(client, frontier_id):
    body = _policy_body(client, frontier_id)
    r = client.post(f"/v1/frontiers/{frontier_id}/selection", json={
        "tuple": body["tuple"], "chosen_id": "p9999"})
    assert r.status_code == 409
    assert r.json()["error"] == "InfeasibleChoice"


def test_selection_stale_frontier_is_409(client, frontier_id):
    body = _policy_body(client, frontier_id)
    r = client.post(f"/v1/frontiers/{frontier_id}/selection", json={
        "tuple": body["tuple"], "frontier_digest": "0" * 64})
    assert r.status_code == 409
    assert r.json()["error"] == "StaleFrontier"
