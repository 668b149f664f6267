"""HTTP service exposing the five model roles.

One POST endpoint per role plus a health probe:

    POST /v1/paraphrase   {text, n}                -> {paraphrases}
    POST /v1/nli          {premise, hypothesis}    -> {label, scores}
    POST /v1/srl          {text}                   -> {frames}
    POST /v1/qg           {claim, w, answer_span}  -> {question}
    POST /v1/qa           {question, context}      -> {answer, score}
    GET  /v1/health                                -> {status, roles}

Status discipline: 400 for anything wrong with the request body (malformed
payload or schema violation), 503 for a role whose model is not loaded, 429
when the in-flight request count exceeds the configured queue depth, 502
when a generator's raw output cannot be normalized, 500 for anything else.
Every error body is ``{"error": ..., "detail": ...}``.

The service holds no per-request state: identical requests get identical
responses (echo bindings are pure functions; real checkpoints keep this
property by defaulting to deterministic decoding unless a request opts into
sampling).
"""

from __future__ import annotations

import logging
import threading
from contextlib import contextmanager, nullcontext
from typing import Optional, Sequence

from fastapi import FastAPI, HTTPException, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from starlette.exceptions import HTTPException as StarletteHTTPException

from .bindings import ModelBinding, default_bindings, load_bindings
from .postprocess import PostprocessError
from .wire import (
    HealthResponse,
    NLIRequest,
    NLIResponse,
    ParaphraseRequest,
    ParaphraseResponse,
    QARequest,
    QAResponse,
    QGRequest,
    QGResponse,
    SRLRequest,
    SRLResponse,
)

log = logging.getLogger(__name__)

DEFAULT_QUEUE_DEPTH = 32

_ERROR_RESPONSES = {
    400: {"description": "Malformed or schema-invalid request body"},
    429: {"description": "Server at capacity; retry later"},
    502: {"description": "Model output could not be normalized"},
    503: {"description": "No model loaded for this role"},
}


def create_app(
    bindings: Optional[Sequence[ModelBinding]] = None,
    queue_depth: int = DEFAULT_QUEUE_DEPTH,
) -> FastAPI:
    """Build the application around a binding list.

    Bindings that fail to load leave their role answering 503 while the
    rest of the service stays up; ``None`` means echo bindings everywhere.
    ``queue_depth`` caps concurrent in-flight inference requests — beyond
    it, requests are turned away with 429 rather than queued without bound.
    """
    if queue_depth < 0:
        raise ValueError("queue_depth must be >= 0")
    loaded = load_bindings(default_bindings() if bindings is None else bindings)

    app = FastAPI(title="fivew-sidecar", version="0.1.0")
    app.state.loaded = loaded  # introspection hook for tests and operators
    state_lock = threading.Lock()
    state = {"active": 0}

    # A model that cannot batch takes one request at a time: its role gets a
    # lock and callers queue on it (still counted as in-flight, so the queue
    # depth bounds the wait line too). Batch-capable bindings run unlocked.
    role_locks = {
        role: threading.Lock()
        for role, binding in loaded.bindings.items()
        if binding.max_batch == 1
    }

    def serialized(role: str):
        return role_locks.get(role) or nullcontext()

    @contextmanager
    def admitted():
        with state_lock:
            state["active"] += 1
            admitted_now = state["active"] <= queue_depth
        try:
            if not admitted_now:
                raise HTTPException(
                    status_code=429,
                    detail=f"at capacity ({queue_depth} in-flight requests)",
                    headers={"Retry-After": "1"},
                )
            yield
        finally:
            with state_lock:
                state["active"] -= 1

    def require(role: str):
        impl = loaded.implementations.get(role)
        if impl is None:
            reason = loaded.failures.get(role, "no binding configured")
            raise HTTPException(
                status_code=503, detail=f"role {role!r} unavailable: {reason}"
            )
        return impl

    @app.exception_handler(RequestValidationError)
    async def on_bad_request(request: Request, exc: RequestValidationError) -> JSONResponse:
        first = exc.errors()[0] if exc.errors() else {}
        where = ".".join(str(loc) for loc in first.get("loc", ()) if loc != "body")
        message = first.get("msg", "invalid request body")
        detail = f"{where}: {message}" if where else message
        return JSONResponse(
            status_code=400, content={"error": "invalid request", "detail": detail}
        )

    @app.exception_handler(StarletteHTTPException)
    async def on_http_error(request: Request, exc: StarletteHTTPException) -> JSONResponse:
        return JSONResponse(
            status_code=exc.status_code,
            content={"error": str(exc.detail), "detail": None},
            headers=getattr(exc, "headers", None),
        )

    @app.exception_handler(PostprocessError)
    async def on_bad_model_output(request: Request, exc: PostprocessError) -> JSONResponse:
        log.error("model output rejected: %s", exc)
        return JSONResponse(
            status_code=502,
            content={"error": "model output could not be normalized", "detail": str(exc)},
        )

    @app.exception_handler(Exception)
    async def on_internal_error(request: Request, exc: Exception) -> JSONResponse:
        log.exception("internal error serving %s", request.url.path)
        return JSONResponse(
            status_code=500, content={"error": "internal error", "detail": None}
        )

    @app.get("/v1/health", response_model=HealthResponse)
    def health() -> HealthResponse:
        return HealthResponse(status="ok", roles=loaded.available_roles())

    # Handlers are plain functions (not coroutines) so the framework runs
    # them on its threadpool and the in-flight counter sees real overlap.

    @app.post("/v1/paraphrase", response_model=ParaphraseResponse, responses=_ERROR_RESPONSES)
    def paraphrase(body: ParaphraseRequest) -> ParaphraseResponse:
        impl = require("paraphrase")
        with admitted(), serialized("paraphrase"):
            variants = impl.generate(body.text, body.n, sampling=body.sampling)
        return ParaphraseResponse(paraphrases=variants)

    @app.post("/v1/nli", response_model=NLIResponse, responses=_ERROR_RESPONSES)
    def nli(body: NLIRequest) -> NLIResponse:
        impl = require("nli")
        with admitted(), serialized("nli"):
            label, scores = impl.classify(body.premise, body.hypothesis, sampling=body.sampling)
        return NLIResponse(label=label, scores=list(scores))

    @app.post("/v1/srl", response_model=SRLResponse, responses=_ERROR_RESPONSES)
    def srl(body: SRLRequest) -> SRLResponse:
        impl = require("srl")
        with admitted(), serialized("srl"):
            frames = impl.label(body.text, sampling=body.sampling)
        return SRLResponse(frames=frames)

    @app.post("/v1/qg", response_model=QGResponse, responses=_ERROR_RESPONSES)
    def qg(body: QGRequest) -> QGResponse:
        impl = require("qg")
        with admitted(), serialized("qg"):
            question = impl.generate(body.claim, body.w, body.answer_span, sampling=body.sampling)
        return QGResponse(question=question)

    @app.post("/v1/qa", response_model=QAResponse, responses=_ERROR_RESPONSES)
    def qa(body: QARequest) -> QAResponse:
        impl = require("qa")
        with admitted(), serialized("qa"):
            answer, score = impl.answer(body.question, body.context, sampling=body.sampling)
        return QAResponse(answer=answer, score=score)

    return app
