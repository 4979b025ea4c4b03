"""HTTP facade over the recipe engine.

The service loads immutable artifacts (corpus, model, lookup table) at
startup and answers stateless queries.  Long-running work (training, LUT
builds) stays on the CLI.  Recipe responses are serialized through the same
canonical encoder the CLI uses, so both paths emit identical bytes.
"""

from __future__ import annotations

import json
import uuid
from dataclasses import dataclass
from pathlib import Path

from fastapi import FastAPI, Request, Response
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from .colorimetry import SRGB8, spectrum_to_srgb8
from .dataset import Corpus, load_corpus
from .errors import DomainError, NotReadyError, WatermixError
from .mixnet import ModelWeights, load_model, model_file_hash
from .palette import Lut, Recipe, load_lut, match_color, mix_preview
from .spectra import GRID_QUANTITIES_UL, PigmentId, QuantityML, interpolate_quantity

SCHEMA_VERSION = 1


def canonical_json(obj) -> bytes:
    """One JSON encoding for every consumer; key order and separators pinned."""
    return (json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False) + "\n").encode()


def match_payload(recipes: list[Recipe], lut_hash: str) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "lut_hash": lut_hash,
        "recipes": [r.to_dict() for r in recipes],
    }


def mix_payload(swatches, spectrum, pa: int, qa: float, pb: int, qb: float) -> dict:
    rgb_a, rgb_b, rgb_mix = swatches
    return {
        "schema_version": SCHEMA_VERSION,
        "pigment_a": {"index": pa, "name": PigmentId(pa).name, "q_ml": qa},
        "pigment_b": {"index": pb, "name": PigmentId(pb).name, "q_ml": qb},
        "swatches": {
            "a": list(rgb_a.as_tuple()),
            "b": list(rgb_b.as_tuple()),
            "mix": list(rgb_mix.as_tuple()),
        },
        "spectrum": [float(v) for v in spectrum],
    }


@dataclass
class ServiceConfig:
    host: str = "127.0.0.1"
    port: int = 8077
    corpus_dir: str | None = None
    model_path: str | None = None
    lut_path: str | None = None
    eval_dir: str | None = None
    cors_origins: list = None
    frontend_dir: str | None = None

    @classmethod
    def from_file(cls, path) -> "ServiceConfig":
        raw = json.loads(Path(path).read_text())
        return cls(
            host=raw.get("host", "127.0.0.1"),
            port=int(raw.get("port", 8077)),
            corpus_dir=raw.get("corpus_dir"),
            model_path=raw.get("model_path"),
            lut_path=raw.get("lut_path"),
            eval_dir=raw.get("eval_dir"),
            cors_origins=raw.get("cors_origins") or [],
            frontend_dir=raw.get("frontend_dir"),
        )


class ServiceState:
    """Artifacts loaded once; every field may be absent until provided."""

    def __init__(self, corpus: Corpus | None = None, model: ModelWeights | None = None,
                 lut: Lut | None = None, model_hash: str = "", lut_hash: str = ""):
        self.corpus = corpus
        self.model = model
        self.lut = lut
        self.model_hash = model_hash
        self.lut_hash = lut_hash

    @classmethod
    def from_config(cls, cfg: ServiceConfig) -> "ServiceState":
        state = cls()
        if cfg.corpus_dir and Path(cfg.corpus_dir).exists():
            state.corpus = load_corpus(cfg.corpus_dir)
        if cfg.model_path and Path(cfg.model_path).exists():
            state.model = load_model(cfg.model_path)
            state.model_hash = model_file_hash(cfg.model_path)
        if cfg.lut_path and Path(cfg.lut_path).exists():
            state.lut = load_lut(cfg.lut_path)
            state.lut_hash = state.lut.model_hash
        return state

    def require(self, **artifacts):
        missing = [name for name, value in artifacts.items() if value is None]
        if missing:
            raise NotReadyError(f"artifacts not loaded: {', '.join(missing)}")


class MatchRequest(BaseModel):
    rgb: list[int] = Field(min_length=3, max_length=3)
    top_k: int = Field(default=1, ge=1, le=50)


class MixRequest(BaseModel):
    pa: int = Field(ge=1, le=13)
    qa: float = Field(gt=0.0)
    pb: int = Field(ge=1, le=13)
    qb: float = Field(gt=0.0)


def create_app(state: ServiceState, cors_origins: list | None = None,
               frontend_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="watermix palette service", version="0.1.0")
    if cors_origins:
        app.add_middleware(
            CORSMiddleware,
            allow_origins=list(cors_origins),
            allow_methods=["*"],
            allow_headers=["*"],
        )

    def error_response(status: int, kind: str, message: str, **extra) -> Response:
        body = {"error": {"type": kind, "message": message, **extra}}
        return Response(
            content=canonical_json(body), media_type="application/json", status_code=status
        )

    @app.exception_handler(RequestValidationError)
    async def on_bad_request(request: Request, exc: RequestValidationError):
        return error_response(400, "bad_request", str(exc.errors()))

    @app.exception_handler(NotReadyError)
    async def on_not_ready(request: Request, exc: NotReadyError):
        return error_response(409, "not_ready", str(exc))

    @app.exception_handler(WatermixError)
    async def on_domain_error(request: Request, exc: WatermixError):
        return error_response(400, "domain_error", str(exc))

    @app.exception_handler(Exception)
    async def on_internal(request: Request, exc: Exception):
        correlation = uuid.uuid4().hex
        return error_response(
            500, "internal", f"internal fault (correlation id {correlation})",
            correlation_id=correlation,
        )

    @app.get("/api/health")
    def health():
        payload = {
            "schema_version": SCHEMA_VERSION,
            "ready": {
                "corpus": state.corpus is not None,
                "model": state.model is not None,
                "lut": state.lut is not None,
            },
            "model_hash": state.model_hash,
            "lut_hash": state.lut_hash,
        }
        return Response(content=canonical_json(payload), media_type="application/json")

    @app.get("/api/pigments")
    def pigments():
        state.require(corpus=state.corpus)
        out = []
        for rec in state.corpus.records:
            swatches = []
            for q_ul in GRID_QUANTITIES_UL:
                refl, _ = interpolate_quantity(rec, QuantityML(q_ul))
                swatches.append(list(spectrum_to_srgb8(refl).as_tuple()))
            out.append({
                "index": rec.pigment.index,
                "name": rec.pigment.name,
                "symbol": rec.pigment.symbol,
                "quantities_ml": [q / 1000.0 for q in GRID_QUANTITIES_UL],
                "swatches": swatches,
            })
        payload = {"schema_version": SCHEMA_VERSION, "pigments": out}
        return Response(content=canonical_json(payload), media_type="application/json")

    @app.post("/api/match")
    def match(request: MatchRequest):
        state.require(lut=state.lut)
        for ch in request.rgb:
            if not 0 <= ch <= 255:
                raise DomainError(f"rgb channel out of range: {ch}")
        recipes = match_color(state.lut, SRGB8(*request.rgb), top_k=request.top_k)
        payload = match_payload(recipes, state.lut_hash)
        return Response(content=canonical_json(payload), media_type="application/json")

    @app.post("/api/mix")
    def mix(request: MixRequest):
        state.require(corpus=state.corpus, model=state.model)
        swatches, spectrum = mix_preview(
            state.model, state.corpus.records, state.corpus.substrate,
            request.pa, request.qa, request.pb, request.qb,
        )
        payload = mix_payload(swatches, spectrum, request.pa, request.qa, request.pb, request.qb)
        return Response(content=canonical_json(payload), media_type="application/json")

    if frontend_dir and Path(frontend_dir).exists():
        app.mount("/", StaticFiles(directory=frontend_dir, html=True), name="frontend")
    return app


def create_app_from_config(cfg: ServiceConfig) -> FastAPI:
    return create_app(
        ServiceState.from_config(cfg),
        cors_origins=cfg.cors_origins,
        frontend_dir=cfg.frontend_dir,
    )
