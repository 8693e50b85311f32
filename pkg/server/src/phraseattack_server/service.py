"""FastAPI implementation of the model wire protocol (version 1).

Endpoint and payload definitions live in the engine's
``docs/wire_protocol_v1.md``; this module is the live-model counterpart of
the engine's mock backends. Per-request failures return the error
envelope; the server stays up.
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .infill import sample_fills
from .models import ModelSet, classify_probs, cmlm_token_prob, sequence_perplexity
from .parser import parse_to_ptb


class UnknownLabelError(KeyError):
    pass


def create_app(model_set: ModelSet) -> FastAPI:
    app = FastAPI(title="phraseattack model server", version="1")
    model_set.eval()

    @app.exception_handler(Exception)
    async def handle_any(request: Request, exc: Exception):  # pragma: no cover - safety net
        return JSONResponse(status_code=500, content={"code": "internal", "message": str(exc)})

    @app.exception_handler(KeyError)
    async def handle_unknown_label(request: Request, exc: KeyError):
        return JSONResponse(status_code=422, content={"code": "unknown_label", "message": str(exc)})

    @app.exception_handler(ValueError)
    async def handle_bad_request(request: Request, exc: ValueError):
        return JSONResponse(status_code=400, content={"code": "bad_request", "message": str(exc)})

    @app.get("/v1/health")
    def health():
        return {"status": "ok"}

    def _classify_one(payload: dict) -> dict:
        segments = payload.get("segments")
        if not isinstance(segments, list) or not segments:
            raise ValueError("classify needs a non-empty 'segments' list")
        return {"probs": classify_probs(model_set, segments)}

    @app.post("/v1/classify")
    async def classify(request: Request):
        return _classify_one(await request.json())

    @app.post("/v1/classify_batch")
    async def classify_batch(request: Request):
        payload = await request.json()
        return {"results": [_classify_one(item) for item in payload.get("items", [])]}

    @app.post("/v1/infill")
    async def infill(request: Request):
        payload = await request.json()
        max_fill_len = int(payload["max_fill_len"])
        num_samples = int(payload["num_samples"])
        top_k = int(payload["top_k"])
        if max_fill_len < 1 or num_samples < 1 or top_k < 1:
            raise ValueError("max_fill_len, num_samples and top_k must be >= 1")
        # global torch seeding: serialize sampled generation for determinism
        with model_set.generation_lock:
            fills = sample_fills(
                model_set.infiller,
                model_set.vocab,
                list(payload.get("left", [])),
                list(payload.get("right", [])),
                max_fill_len,
                num_samples,
                top_k,
                int(payload.get("seed", 0)),
            )
        return {"fills": fills}

    def _cmlm_one(payload: dict) -> dict:
        prob = cmlm_token_prob(
            model_set,
            list(payload["tokens"]),
            int(payload["masked_index"]),
            str(payload["label"]),
            context_before=list(payload.get("context_before", [])) or None,
            context_after=list(payload.get("context_after", [])) or None,
        )
        return {"prob": prob}

    @app.post("/v1/cmlm")
    async def cmlm(request: Request):
        return _cmlm_one(await request.json())

    @app.post("/v1/cmlm_batch")
    async def cmlm_batch(request: Request):
        payload = await request.json()
        return {"results": [_cmlm_one(item) for item in payload.get("items", [])]}

    @app.post("/v1/parse")
    async def parse(request: Request):
        payload = await request.json()
        tokens = payload.get("tokens")
        if not isinstance(tokens, list) or not tokens:
            raise ValueError("parse needs a non-empty 'tokens' list")
        return {"tree": parse_to_ptb([str(t) for t in tokens])}

    @app.post("/v1/perplexity")
    async def perplexity(request: Request):
        payload = await request.json()
        tokens = payload.get("tokens")
        if not isinstance(tokens, list) or not tokens:
            raise ValueError("perplexity needs a non-empty 'tokens' list")
        return {"ppl": sequence_perplexity(model_set, [str(t) for t in tokens])}

    return app


def run_server(model_set: ModelSet, host: str = "127.0.0.1", port: int = 8723) -> None:
    import uvicorn

    uvicorn.run(create_app(model_set), host=host, port=port, log_level="warning")
