"""HTTP adapter fidelity: responses mirror direct engine calls exactly."""

from __future__ import annotations

import pytest
from fastapi.testclient import TestClient

from erl.catalog import lint_catalog
from erl.scoring import ScoringConfig, score_session
from erl.service import create_app
from erl.store import SessionStore

from conftest import (
    BEST_CASE_ANSWERS,
    answer_three_blocks,
    make_three_block_catalog,
)

CONFIG = ScoringConfig()


@pytest.fixture
def client(tmp_path, security_catalog):
    store = SessionStore(tmp_path / "store", security_catalog)
    app = create_app({"demo": security_catalog}, store, CONFIG)
    with TestClient(app) as c:
        c.store = store
        yield c


def start_session_via_http(client, use_case_id="sketcher"):
    response = client.post(
        "/v1/sessions",
        json={
            "catalog_id": "demo",
            "selected_blocks": ["security"],
            "metadata": {"use_case_id": use_case_id, "session_date": "2025-01-15"},
        },
    )
    assert response.status_code == 201, response.text
    return response.json()


# --- catalogs ------------------------------------------------------------------


def test_list_catalogs(client):
    [entry] = client.get("/v1/catalogs").json()
    assert entry["catalog_id"] == "demo"
    assert entry["indicator_count"] == 10
    assert entry["blocks"] == [{"block_id": "security", "title": "Security", "indicator_count": 10}]


def test_catalog_detail_includes_weights(client):
    detail = client.get("/v1/catalogs/demo").json()
    rows = {r["number"]: r for r in detail["blocks"][0]["indicators"]}
    assert rows["2.2.1"]["no_score"] == "-0.280"
    assert rows["2"]["layer"] == "relevance"


def test_lint_endpoint_equals_library(client, security_catalog):
    via_http = client.get("/v1/catalogs/demo/lint").json()
    assert via_http == lint_catalog(security_catalog).to_json_dict()


def test_unknown_catalog_is_422(client):
    response = client.get("/v1/catalogs/ghost")
    assert response.status_code == 422
    assert response.json()["code"] == "UnknownBlock"


# --- session lifecycle -------------------------------------------------------------


def test_create_session_unknown_block_is_422(client):
    response = client.post(
        "/v1/sessions",
        json={
            "catalog_id": "demo",
            "selected_blocks": ["ghost"],
            "metadata": {"use_case_id": "uc"},
        },
    )
    assert response.status_code == 422
    assert response.json()["code"] == "UnknownBlock"


def test_create_session_empty_selection_is_422(client):
    response = client.post(
        "/v1/sessions",
        json={"catalog_id": "demo", "selected_blocks": [], "metadata": {"use_case_id": "uc"}},
    )
    assert response.status_code == 422
    assert response.json()["code"] == "EmptySelection"


def test_scripted_full_session_matches_direct_engine(client, security_catalog):
    created = start_session_via_http(client)
    session_id = created["session"]["session_id"]
    assert created["next"]["indicator_id"] == "2"
    assert created["next"]["progress"] == {"answered": 0, "reachable_remaining_upper_bound": 10}

    for number, verdict in BEST_CASE_ANSWERS:
        next_payload = client.get(f"/v1/sessions/{session_id}/next").json()
        assert next_payload["indicator_id"] == number
        response = client.post(
            f"/v1/sessions/{session_id}/answers",
            json={
                "indicator": number,
                "verdict": verdict,
                "unsure": False,
                "comment": f"re {number}",
                "expected_seq": next_payload["seq"],
            },
        )
        assert response.status_code == 200, response.text

    final = client.get(f"/v1/sessions/{session_id}/next").json()
    assert final["done"] is True

    via_http = client.get(f"/v1/sessions/{session_id}/score").json()

    # independent route: replay the stored event log and score directly
    stored = client.store.load_session("sketcher", session_id)
    assert via_http == score_session(stored, CONFIG).to_json_dict()
    assert via_http["global_score"] == "3.720"
    assert via_http["erl"] == {"level": 4, "label": "Control Over Ethics Issues"}

    session_json = client.get(f"/v1/sessions/{session_id}").json()
    assert session_json == stored.to_json_dict()


def test_out_of_order_answer_is_409(client):
    created = start_session_via_http(client)
    session_id = created["session"]["session_id"]
    response = client.post(
        f"/v1/sessions/{session_id}/answers",
        json={"indicator": "2.4.1", "verdict": "yes", "unsure": False},
    )
    assert response.status_code == 409
    assert response.json()["code"] == "OutOfOrderAnswer"


def test_stale_seq_is_409(client):
    created = start_session_via_http(client)
    session_id = created["session"]["session_id"]
    seq = created["next"]["seq"]
    good = client.post(
        f"/v1/sessions/{session_id}/answers",
        json={"indicator": "2", "verdict": "yes", "expected_seq": seq},
    )
    assert good.status_code == 200
    stale = client.post(
        f"/v1/sessions/{session_id}/answers",
        json={"indicator": "2.1", "verdict": "yes", "expected_seq": seq},
    )
    assert stale.status_code == 409
    assert stale.json()["code"] == "StaleSequence"


def test_revise_via_patch(client):
    created = start_session_via_http(client)
    session_id = created["session"]["session_id"]
    client.post(f"/v1/sessions/{session_id}/answers", json={"indicator": "2", "verdict": "no"})
    response = client.patch(
        f"/v1/sessions/{session_id}/answers/2",
        json={"verdict": "yes", "comment": "reconsidered"},
    )
    assert response.status_code == 200
    assert response.json()["next"]["indicator_id"] == "2.1"


def test_patch_unanswered_is_409(client):
    created = start_session_via_http(client)
    session_id = created["session"]["session_id"]
    response = client.patch(f"/v1/sessions/{session_id}/answers/2.1", json={"verdict": "no"})
    assert response.status_code == 409
    assert response.json()["code"] == "NeverAnswered"


def test_unknown_session_is_404(client):
    assert client.get("/v1/sessions/ghost/next").status_code == 404


def test_malformed_body_is_422(client):
    created = start_session_via_http(client)
    session_id = created["session"]["session_id"]
    response = client.post(
        f"/v1/sessions/{session_id}/answers",
        json={"indicator": "2", "verdict": "maybe"},
    )
    assert response.status_code == 422
    assert response.json()["code"] == "BadRequest"


def test_use_case_binding_checked_at_start(client):
    created = start_session_via_http(client)
    session_id = created["session"]["session_id"]
    for number, verdict in BEST_CASE_ANSWERS:
        client.post(f"/v1/sessions/{session_id}/answers", json={"indicator": number, "verdict": verdict})

    # same use case, different block selection: refused before any question
    response = client.post(
        "/v1/sessions",
        json={
            "catalog_id": "demo",
            "selected_blocks": ["security", "security"],
            "metadata": {"use_case_id": "sketcher"},
        },
    )
    assert response.status_code == 422
    assert response.json()["code"] == "CatalogMismatch"


# --- comparisons over the store ------------------------------------------------------


@pytest.fixture
def cobot_client(tmp_path):
    catalog = make_three_block_catalog()
    store = SessionStore(tmp_path / "store", catalog)
    config = ScoringConfig(mode="block_min")
    first = answer_three_blocks(catalog, False, session_id="first", session_date="2025-03-01")
    second = answer_three_blocks(catalog, True, session_id="second", session_date="2025-12-01")
    store.save_session("cobot", first, config)
    store.save_session("cobot", second, config)
    app = create_app({"cobot": catalog}, store, config)
    with TestClient(app) as c:
        c.store = store
        yield c


def test_timeline_endpoint_equals_library(cobot_client):
    via_http = cobot_client.get("/v1/usecases/cobot/timeline").json()
    assert via_http == cobot_client.store.timeline("cobot").to_json_dict()
    assert [p["global_score"] for p in via_http["points"]] == ["1.705", "2.300"]


def test_compare_endpoint_equals_library(cobot_client):
    via_http = cobot_client.get("/v1/compare", params={"from": "first", "to": "second"}).json()
    assert via_http == cobot_client.store.diff_sessions("first", "second").to_json_dict()
    deltas = {d["block_id"]: d["delta"] for d in via_http["block_deltas"]}
    assert deltas["ai-act"] == "1.000"


def test_compare_missing_params_is_422(cobot_client):
    assert cobot_client.get("/v1/compare", params={"from": "first"}).status_code == 422


def test_score_mode_override(cobot_client):
    report = cobot_client.get("/v1/sessions/second/score", params={"mode": "global_sum"}).json()
    # 4.000 - 2.295 + 1.000 - 1.700 - 0.900 (one shared baseline, unclamped)
    assert report["global_score"] == "0.105"


def test_bearer_token_enforced(tmp_path, security_catalog):
    store = SessionStore(tmp_path / "store", security_catalog)
    app = create_app({"demo": security_catalog}, store, CONFIG, token="sesame")
    with TestClient(app) as client:
        assert client.get("/v1/catalogs").status_code == 401
        ok = client.get("/v1/catalogs", headers={"Authorization": "Bearer sesame"})
        assert ok.status_code == 200
