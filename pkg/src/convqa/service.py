"""Stateless JSON HTTP API.

The client sends the current question, the full conversation history and
any parameter overrides with every request; the server holds no session
state, so responses depend only on the request body and the loaded
artifacts.

  POST /answer    {question, history: [str], params: {...}} -> ranked results
  GET  /defaults  canonical default parameters and strategy names
  GET  /health    version and artifact checksums
"""

from __future__ import annotations

import dataclasses
import time

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from . import __version__
from .conversation import ConversationError, CqStrategy
from .pipeline import Engine, render_result
from .ranker import ParamError, RankerParams

__all__ = ["create_app", "AnswerRequest", "ParamOverrides"]

STRATEGY_LABELS = {
    "cq1": "current+first turns",
    "cq2": "current+previous+first turns",
    "cq3": "all turns proportionate weights",
}


class ParamOverrides(BaseModel):
    """Partial ranker parameters; absent fields fall back to the server
    defaults. Ranges are the constrained UI ranges, checked after merging."""

    alpha: float | None = None
    beta: float | None = None
    window: int | None = None
    h1: float | None = None
    h2: float | None = None
    h3: float | None = None
    h4: float | None = None
    pool_k: int | None = None
    display_k: int | None = None
    strategy: str | None = None
    union: bool | None = None


class AnswerRequest(BaseModel):
    question: str
    history: list[str] = Field(default_factory=list)
    params: ParamOverrides | None = None


def _merge_params(defaults: RankerParams, overrides: ParamOverrides | None) -> RankerParams:
    if overrides is None:
        return defaults
    updates = {}
    for key in ("alpha", "beta", "window", "h1", "h2", "h3", "h4",
                "pool_k", "display_k", "union"):
        value = getattr(overrides, key)
        if value is not None:
            updates[key] = value
    if overrides.strategy is not None:
        try:
            updates["strategy"] = CqStrategy.parse(overrides.strategy)
        except ConversationError as e:
            raise ParamError(str(e)) from None
    return dataclasses.replace(defaults, **updates)


def _params_json(params: RankerParams) -> dict:
    return {
        "alpha": params.alpha,
        "beta": params.beta,
        "window": params.window,
        "h1": params.h1,
        "h2": params.h2,
        "h3": params.h3,
        "h4": params.h4,
        "pool_k": params.pool_k,
        "display_k": params.display_k,
        "strategy": params.strategy.value,
        "union": params.union,
    }


def create_app(engine: Engine) -> FastAPI:
    app = FastAPI(title="convqa", version=__version__)
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.exception_handler(RequestValidationError)
    async def malformed_body(request: Request, exc: RequestValidationError):
        errors = [
            {"field": ".".join(str(p) for p in e["loc"] if p != "body"),
             "message": e["msg"]}
            for e in exc.errors()
        ]
        return JSONResponse(status_code=400, content={"errors": errors})

    @app.post("/answer")
    def answer(req: AnswerRequest):
        if not req.question.strip():
            return JSONResponse(
                status_code=400,
                content={"errors": [{"field": "question", "message": "question is empty"}]})
        try:
            params = _merge_params(engine.defaults, req.params)
            params.validate_ui()
        except ParamError as e:
            return JSONResponse(
                status_code=400,
                content={"errors": [{"field": "params", "message": str(e)}]})
        start = time.perf_counter()
        try:
            ranked, _ = engine.answer(list(req.history) + [req.question], params)
        except ConversationError as e:
            return JSONResponse(
                status_code=400,
                content={"errors": [{"field": "question", "message": str(e)}]})
        results = [
            render_result(engine.corpus.get(s.pid), s)
            for s in ranked[:params.display_k]
        ]
        return {
            "results": results,
            "timing_ms": (time.perf_counter() - start) * 1000.0,
        }

    @app.get("/defaults")
    def defaults():
        return {
            "params": _params_json(engine.defaults),
            "strategies": [
                {"name": name, "label": STRATEGY_LABELS[name]}
                for name in ("cq1", "cq2", "cq3")
            ],
            "ranges": {
                "alpha": [0.5, 1.0],
                "beta": [0.0, 0.1],
                "h": [0.0, 1.0],
            },
        }

    @app.get("/health")
    def health():
        return {
            "status": "ok",
            "version": __version__,
            "artifacts": engine.checksums,
        }

    return app
