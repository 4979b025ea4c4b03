import json

import pytest
from fastapi.testclient import TestClient

from watermix.mixnet import save_model, model_file_hash
from watermix.palette import build_lut, load_lut
from watermix.dataset import write_corpus
from watermix.service import (
    ServiceConfig,
    ServiceState,
    canonical_json,
    create_app,
    create_app_from_config,
    match_payload,
    mix_payload,
)
from watermix.spectra import GRID_QUANTITIES_UL, expand_primaries
from watermix.palette import match_color, mix_preview
from watermix.colorimetry import SRGB8


@pytest.fixture(scope="module")
def artifacts(tmp_path_factory, corpus, quick_model):
    root = tmp_path_factory.mktemp("svc")
    write_corpus(root / "corpus", corpus)
    model_path = root / "model.bin"
    save_model(model_path, quick_model)
    entries = [
        e for e in expand_primaries(corpus.records)
        if e.quantity.ul in set(GRID_QUANTITIES_UL[::15])
    ]
    lut_path = root / "palette.lut"
    build_lut(
        quick_model, corpus.records, corpus.substrate,
        model_hash=model_file_hash(model_path), entries=entries, out_path=lut_path,
    )
    return root


@pytest.fixture(scope="module")
def client(artifacts):
    cfg = ServiceConfig(
        corpus_dir=str(artifacts / "corpus"),
        model_path=str(artifacts / "model.bin"),
        lut_path=str(artifacts / "palette.lut"),
    )
    return TestClient(create_app_from_config(cfg), raise_server_exceptions=False)


def test_health_reports_ready(client):
    response = client.get("/api/health")
    assert response.status_code == 200
    body = response.json()
    assert body["ready"] == {"corpus": True, "model": True, "lut": True}
    assert body["model_hash"]


def test_pigments_lists_thirteen(client):
    body = client.get("/api/pigments").json()
    assert len(body["pigments"]) == 13
    first = body["pigments"][0]
    assert first["name"] == "cadmium red"
    assert len(first["swatches"]) == 76
    assert len(first["quantities_ml"]) == 76


def test_match_round_trip_equals_engine_bytes(client, artifacts):
    lut = load_lut(artifacts / "palette.lut")
    response = client.post("/api/match", json={"rgb": [64, 108, 57], "top_k": 3})
    assert response.status_code == 200
    recipes = match_color(lut, SRGB8(64, 108, 57), top_k=3)
    expected = canonical_json(match_payload(recipes, lut.model_hash))
    assert response.content == expected


def test_match_payload_fields(client):
    body = client.post("/api/match", json={"rgb": [64, 108, 57]}).json()
    recipe = body["recipes"][0]
    assert set(recipe) >= {"pigment_a", "pigment_b", "q_a_ml", "q_b_ml", "delta_e", "ratio_gap"}


def test_mix_round_trip_equals_engine_bytes(client, corpus, quick_model):
    response = client.post("/api/mix", json={"pa": 1, "qa": 0.02, "pb": 8, "qb": 0.01})
    assert response.status_code == 200
    swatches, spectrum = mix_preview(
        quick_model, corpus.records, corpus.substrate, 1, 0.02, 8, 0.01
    )
    expected = canonical_json(mix_payload(swatches, spectrum, 1, 0.02, 8, 0.01))
    assert response.content == expected
    assert len(response.json()["spectrum"]) == 41


def test_mix_rejects_zero_quantity(client):
    response = client.post("/api/mix", json={"pa": 1, "qa": 0.0, "pb": 8, "qb": 0.01})
    assert response.status_code == 400
    assert response.json()["error"]["type"] == "bad_request"


def test_mix_rejects_off_grid_quantity(client):
    response = client.post("/api/mix", json={"pa": 1, "qa": 0.011, "pb": 8, "qb": 0.01})
    assert response.status_code == 400
    assert response.json()["error"]["type"] == "domain_error"


def test_malformed_body_is_400(client):
    response = client.post("/api/match", json={"rgb": "notalist"})
    assert response.status_code == 400


def test_match_without_lut_is_409(corpus, quick_model):
    state = ServiceState(corpus=corpus, model=quick_model)
    bare = TestClient(create_app(state), raise_server_exceptions=False)
    response = bare.post("/api/match", json={"rgb": [1, 2, 3]})
    assert response.status_code == 409
    assert response.json()["error"]["type"] == "not_ready"
    health = bare.get("/api/health").json()
    assert health["ready"]["lut"] is False


def test_match_rejects_out_of_range_channel(client):
    response = client.post("/api/match", json={"rgb": [0, 0, 300]})
    assert response.status_code == 400


def test_responses_are_stable_across_requests(client):
    first = client.post("/api/match", json={"rgb": [10, 20, 30]}).content
    second = client.post("/api/match", json={"rgb": [10, 20, 30]}).content
    assert first == second


def test_restart_with_same_files_reproduces_responses(artifacts):
    cfg = ServiceConfig(
        corpus_dir=str(artifacts / "corpus"),
        model_path=str(artifacts / "model.bin"),
        lut_path=str(artifacts / "palette.lut"),
    )
    first = TestClient(create_app_from_config(cfg))
    second = TestClient(create_app_from_config(cfg))  # fresh state, same files
    for request in ({"rgb": [64, 108, 57]}, {"rgb": [10, 200, 130], "top_k": 4}):
        assert (
            first.post("/api/match", json=request).content
            == second.post("/api/match", json=request).content
        )
    assert first.get("/api/pigments").content == second.get("/api/pigments").content


def test_service_config_from_file(tmp_path):
    path = tmp_path / "svc.json"
    path.write_text(json.dumps({
        "host": "0.0.0.0", "port": 9999, "corpus_dir": "/nope",
        "cors_origins": ["http://localhost:5173"],
    }))
    cfg = ServiceConfig.from_file(path)
    assert cfg.port == 9999
    assert cfg.cors_origins == ["http://localhost:5173"]
    state = ServiceState.from_config(cfg)
    assert state.corpus is None
