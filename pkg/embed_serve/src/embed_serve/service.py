"""The /embed HTTP service.

Implements the fixed wire protocol: POST /embed with
``{"texts": [...], "level": "sentence"|"token"}`` returns
``{"dim": d, "items": [...]}`` where each item carries either a
``sentence_vector`` or ``wordpieces`` + ``token_vectors``.  Errors: 400 for
malformed requests, 413 when the batch exceeds the binding's limit, 429
when all inference slots are busy.  GET /healthz reports liveness.
"""

from __future__ import annotations

import threading

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse


def _error(status: int, message: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"error": message})


def create_app(encoder, max_batch: int = 64, max_concurrent: int = 4) -> FastAPI:
    """Build the service around any encoder object.

    The encoder must provide ``encode_sentences(texts)`` and
    ``encode_tokens(texts)``; inference is serialized per slot via a
    semaphore, and requests beyond the available slots get 429.
    """
    app = FastAPI(title="embed-serve")
    slots = threading.Semaphore(max_concurrent)

    @app.get("/healthz")
    def healthz():
        return {"status": "ok"}

    @app.post("/embed")
    async def embed(request: Request):
        try:
            body = await request.json()
        except Exception:
            return _error(400, "request body is not valid JSON")
        if not isinstance(body, dict):
            return _error(400, "request body must be a JSON object")
        texts = body.get("texts")
        level = body.get("level", "sentence")
        if not isinstance(texts, list) or not all(isinstance(t, str) for t in texts):
            return _error(400, "'texts' must be a list of strings")
        if not texts:
            return _error(400, "'texts' must not be empty")
        if level not in ("sentence", "token"):
            return _error(400, "'level' must be 'sentence' or 'token'")
        if len(texts) > max_batch:
            return _error(413, f"batch of {len(texts)} exceeds limit {max_batch}")
        if not slots.acquire(blocking=False):
            return _error(429, "all inference slots busy, retry later")
        try:
            if level == "sentence":
                vectors = encoder.encode_sentences(texts)
                items = [{"sentence_vector": vec} for vec in vectors]
                dim = len(vectors[0])
            else:
                encoded = encoder.encode_tokens(texts)
                items = [
                    {"wordpieces": pieces, "token_vectors": matrix}
                    for pieces, matrix in encoded
                ]
                dim = len(encoded[0][1][0]) if encoded[0][1] else 0
        finally:
            slots.release()
        return {"dim": dim, "items": items}

    return app
