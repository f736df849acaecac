import pytest
from fastapi.testclient import TestClient

from embed_serve.bindings import (
    MULTILINGUAL_SENTENCE_MODEL,
    UnsupportedLanguageError,
    binding_for_language,
)
from embed_serve.service import create_app


@pytest.fixture
def client(encoder):
    return TestClient(create_app(encoder, max_batch=3, max_concurrent=2))


def test_healthz(client):
    response = client.get("/healthz")
    assert response.status_code == 200
    assert response.json() == {"status": "ok"}


def test_sentence_shape_contract(client, encoder):
    response = client.post("/embed", json={"texts": ["hello"], "level": "sentence"})
    assert response.status_code == 200
    body = response.json()
    assert body["dim"] == encoder.dim
    assert len(body["items"]) == 1
    assert len(body["items"][0]["sentence_vector"]) == encoder.dim


def test_identical_texts_get_identical_vectors(client):
    response = client.post(
        "/embed", json={"texts": ["same text", "same text"], "level": "sentence"}
    )
    items = response.json()["items"]
    assert items[0]["sentence_vector"] == items[1]["sentence_vector"]


def test_token_level_invariant(client):
    response = client.post(
        "/embed", json={"texts": ["a considerably long sentence"], "level": "token"}
    )
    assert response.status_code == 200
    item = response.json()["items"][0]
    assert len(item["wordpieces"]) == len(item["token_vectors"])
    assert all(len(vec) == response.json()["dim"] for vec in item["token_vectors"])


def test_batch_order_preserved(client, encoder):
    texts = ["one", "two", "three"]
    response = client.post("/embed", json={"texts": texts, "level": "sentence"})
    items = response.json()["items"]
    expected = encoder.encode_sentences(texts)
    assert [item["sentence_vector"] for item in items] == expected


def test_malformed_body_is_400(client):
    response = client.post(
        "/embed", content=b"{not json", headers={"Content-Type": "application/json"}
    )
    assert response.status_code == 400
    assert client.post("/embed", json=["list"]).status_code == 400
    assert client.post("/embed", json={"texts": "str"}).status_code == 400
    assert client.post("/embed", json={"texts": []}).status_code == 400
    assert (
        client.post("/embed", json={"texts": ["x"], "level": "word"}).status_code == 400
    )


def test_oversized_batch_is_413(client):
    response = client.post(
        "/embed", json={"texts": ["a", "b", "c", "d"], "level": "sentence"}
    )
    assert response.status_code == 413


def test_busy_service_is_429(encoder):
    exhausted = TestClient(create_app(encoder, max_batch=3, max_concurrent=0))
    response = exhausted.post("/embed", json={"texts": ["x"], "level": "sentence"})
    assert response.status_code == 429


def test_binding_routes_languages():
    assert binding_for_language("en").sentence_model != MULTILINGUAL_SENTENCE_MODEL
    assert binding_for_language("de").sentence_model == MULTILINGUAL_SENTENCE_MODEL
    assert binding_for_language("zh-CN").sentence_model == MULTILINGUAL_SENTENCE_MODEL
    assert binding_for_language("de").token_layer == 9


@pytest.mark.parametrize("lang", ["fi", "gu", "kk", "lt"])
def test_unsupported_languages_refused(lang):
    with pytest.raises(UnsupportedLanguageError):
        binding_for_language(lang)
