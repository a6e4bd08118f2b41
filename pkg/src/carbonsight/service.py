"""HTTP service over the pipeline and study harness.

This is the boundary the designer-facing UI consumes: JSON in, JSON
out, images served by content hash with immutable caching. Every error
body carries a stable machine code, a human message, and a correlation
id. Per-session mutations are serialized behind a session lock; the
dataset and backends are loaded once at startup.
"""

from __future__ import annotations

import json
import logging
import re
import uuid
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from fastapi import FastAPI, Request, Response
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .errors import CarbonsightError, ConfigError, SessionNotFound, ValidationError
from .gateway import GeneratedImage, build_backends
from .materials import MaterialDataset, load_dataset
from .pipeline import PipelineConfig
from .study import (
    SessionStore,
    SurveyResponse,
    add_reflection,
    code_reflection,
    create_session,
    finalize_session,
    load_sessions,
    session_to_dict,
    submit_iteration,
    summarize_study,
    summary_to_json,
)

log = logging.getLogger("carbonsight.service")

#: machine code -> HTTP status for the ApiError envelope
HTTP_STATUS: dict[str, int] = {
    "validation_error": 400,
    "parse_error": 400,
    "empty_dataset": 400,
    "empty_description": 400,
    "empty_input": 400,
    "empty_prompt": 400,
    "uncodable_answer": 400,
    "normalization_unsupported": 422,
    "condition_mismatch": 409,
    "nothing_to_finalize": 409,
    "attempt_limit_exceeded": 409,
    "session_closed": 409,
    "incomplete_study": 409,
    "session_not_found": 404,
    "unknown_material": 404,
    "replay_miss": 502,
    "backend_unavailable": 502,
    "extraction_parse_error": 502,
    "pipeline_stage_error": 502,
    "config_error": 500,
    "storage_error": 500,
    "internal_error": 500,
}


@dataclass(frozen=True)
class ServiceConfig:
    dataset_path: Path
    session_dir: Path
    host: str = "127.0.0.1"
    port: int = 8660
    gateway_mode: str = "mock"
    fixture_dir: Path | None = None
    default_condition: str = "T1"
    cors_allowlist: tuple[str, ...] = ()
    max_request_bytes: int = 64 * 1024
    shortlist_k: int = 10
    blocklist: tuple[str, ...] | None = None
    normalize: bool = True

    def pipeline_config(self) -> PipelineConfig:
        return PipelineConfig(
            dataset_path=self.dataset_path,
            gateway_mode=self.gateway_mode,
            fixture_dir=self.fixture_dir,
            blocklist=self.blocklist,
            shortlist_k=self.shortlist_k,
            normalize=self.normalize,
        )

    @property
    def images_dir(self) -> Path:
        return self.session_dir / "images"


_SERVICE_KEYS = {
    "dataset_path",
    "session_dir",
    "host",
    "port",
    "gateway_mode",
    "fixture_dir",
    "default_condition",
    "cors_allowlist",
    "max_request_bytes",
    "shortlist_k",
    "blocklist",
    "normalize",
}


def load_service_config(path: Path | str) -> ServiceConfig:
    try:
        raw = json.loads(Path(path).read_text("utf-8"))
    except OSError as e:
        raise ConfigError(f"cannot read service config {path}: {e}")
    except json.JSONDecodeError as e:
        raise ConfigError(f"service config {path} is not valid JSON: {e.msg}")
    if not isinstance(raw, dict):
        raise ConfigError("service config must be a JSON object")
    unknown = sorted(set(raw) - _SERVICE_KEYS)
    if unknown:
        raise ConfigError(f"unknown service config keys: {', '.join(unknown)}")
    if "dataset_path" not in raw or "session_dir" not in raw:
        raise ConfigError("service config requires dataset_path and session_dir")
    kwargs: dict[str, Any] = dict(raw)
    kwargs["dataset_path"] = Path(raw["dataset_path"])
    kwargs["session_dir"] = Path(raw["session_dir"])
    if raw.get("fixture_dir") is not None:
        kwargs["fixture_dir"] = Path(raw["fixture_dir"])
    if raw.get("cors_allowlist") is not None:
        kwargs["cors_allowlist"] = tuple(raw["cors_allowlist"])
    if raw.get("blocklist") is not None:
        kwargs["blocklist"] = tuple(raw["blocklist"])
    return ServiceConfig(**kwargs)


def validate_config(config: ServiceConfig) -> None:
    """Abort startup on anything the service cannot run with."""
    if not config.dataset_path.is_file():
        raise ConfigError(f"dataset not found: {config.dataset_path}")
    if config.gateway_mode == "replay":
        if config.fixture_dir is None or not Path(config.fixture_dir).is_dir():
            raise ConfigError(
                f"replay mode needs an existing fixture_dir, got {config.fixture_dir}"
            )
    try:
        config.session_dir.mkdir(parents=True, exist_ok=True)
        config.images_dir.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise ConfigError(f"session_dir not writable: {e}")


class ImageStore:
    """Content-addressed image files: <image_id>.<ext>, written once."""

    _EXT = {"png": "png", "jpeg": "jpg"}
    _MEDIA = {"png": "image/png", "jpg": "image/jpeg"}

    def __init__(self, root: Path):
        self.root = root

    def save(self, image: GeneratedImage) -> None:
        import os

        target = self.root / f"{image.image_id}.{self._EXT[image.media_type]}"
        if target.exists():
            return
        self.root.mkdir(parents=True, exist_ok=True)
        tmp = target.with_suffix(target.suffix + ".tmp")
        tmp.write_bytes(image.data)
        os.replace(tmp, target)

    def load(self, image_id: str) -> tuple[bytes, str]:
        if not re.fullmatch(r"[0-9a-f]{64}", image_id):
            raise ValidationError(f"bad image id {image_id!r}")
        for ext, media in self._MEDIA.items():
            path = self.root / f"{image_id}.{ext}"
            if path.exists():
                return path.read_bytes(), media
        raise SessionNotFound(f"no image {image_id}")


# ---------------------------------------------------------------------------
# request bodies


class CreateSessionBody(BaseModel):
    participant_label: str
    condition: str | None = None
    intake: dict[str, Any] = {}


class IterationBody(BaseModel):
    prompt: str


class ReflectionBody(BaseModel):
    text: str


class FinalizeBody(BaseModel):
    satisfaction: str
    sustainability_considered: str
    insights_useful: str | None = None
    free_text: str = ""


def _api_error(status: int, code: str, message: str) -> JSONResponse:
    return JSONResponse(
        status_code=status,
        content={
            "status": status,
            "code": code,
            "message": message,
            "correlation_id": uuid.uuid4().hex,
        },
    )


def create_app(config: ServiceConfig) -> FastAPI:
    validate_config(config)
    with open(config.dataset_path, "rb") as fh:
        dataset: MaterialDataset = load_dataset(fh, source_label=str(config.dataset_path))
    pipeline_config = config.pipeline_config()
    t2i, vlm = build_backends(pipeline_config.gateway_config())
    store = SessionStore(config.session_dir)
    images = ImageStore(config.images_dir)

    app = FastAPI(title="carbonsight", docs_url=None, redoc_url=None)
    if config.cors_allowlist:
        app.add_middleware(
            CORSMiddleware,
            allow_origins=list(config.cors_allowlist),
            allow_methods=["*"],
            allow_headers=["*"],
        )

    @app.exception_handler(CarbonsightError)
    async def _domain_error(request: Request, exc: CarbonsightError):
        status = HTTP_STATUS.get(exc.code, 500)
        if status >= 500:
            log.error("%s %s -> %s: %s", request.method, request.url.path, exc.code, exc)
        return _api_error(status, exc.code, str(exc))

    @app.exception_handler(RequestValidationError)
    async def _body_error(request: Request, exc: RequestValidationError):
        first = exc.errors()[0] if exc.errors() else {}
        where = ".".join(str(p) for p in first.get("loc", ()))
        return _api_error(400, "validation_error", f"invalid request body: {where}")

    @app.middleware("http")
    async def _limit_size(request: Request, call_next):
        length = request.headers.get("content-length")
        if length and int(length) > config.max_request_bytes:
            return _api_error(400, "validation_error", "request body too large")
        return await call_next(request)

    def _load_session(session_id: str):
        return store.load(session_id)

    @app.get("/healthz")
    def healthz():
        return {"status": "ok", "records": len(dataset), "mode": config.gateway_mode}

    @app.post("/sessions", status_code=201)
    def post_session(body: CreateSessionBody):
        session = create_session(
            body.participant_label,
            body.condition or config.default_condition,
            store=store,
            intake=body.intake,
        )
        return session_to_dict(session)

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str):
        return session_to_dict(_load_session(session_id))

    @app.post("/sessions/{session_id}/iterations", status_code=201)
    def post_iteration(session_id: str, body: IterationBody):
        with store.lock_for(session_id):
            session = _load_session(session_id)
            record = submit_iteration(
                session,
                body.prompt,
                pipeline_config,
                dataset=dataset,
                t2i=t2i,
                vlm=vlm,
                store=store,
                image_sink=images.save,
            )
            return {
                "index": record.index,
                "prompt": record.prompt,
                "report": record.report,
                "submitted_at": record.submitted_at,
                "iteration_count": len(session.iterations),
                "attempts_remaining": 5 - len(session.iterations),
            }

    @app.post("/sessions/{session_id}/iterations/{index}/reflection", status_code=201)
    def post_reflection(session_id: str, index: int, body: ReflectionBody):
        with store.lock_for(session_id):
            session = _load_session(session_id)
            reflection = add_reflection(session, index, body.text, store=store)
            return {
                "iteration": reflection.iteration,
                "text": reflection.text,
                "recorded_at": reflection.recorded_at,
            }

    @app.post("/sessions/{session_id}/finalize")
    def post_finalize(session_id: str, body: FinalizeBody):
        survey = SurveyResponse(
            satisfaction=code_reflection(body.satisfaction),
            sustainability_considered=code_reflection(body.sustainability_considered),
            insights_useful=None
            if body.insights_useful is None
            else code_reflection(body.insights_useful),
            free_text=body.free_text,
        )
        with store.lock_for(session_id):
            session = _load_session(session_id)
            finalize_session(session, survey, store=store)
            return session_to_dict(session)

    @app.get("/sessions/{session_id}/summary")
    def get_session_summary(session_id: str):
        session = _load_session(session_id)
        return {
            "session_id": session.session_id,
            "participant_label": session.participant_label,
            "condition": session.condition.value,
            "goal_text": session.goal_text,
            "status": session.status,
            "pairs": [
                {
                    "index": it.index,
                    "prompt": it.prompt,
                    "image_id": it.report["image"]["image_id"],
                    "media_type": it.report["image"]["media_type"],
                    "report": it.report,
                }
                for it in session.iterations
            ],
            "reflections": [
                {"iteration": r.iteration, "text": r.text} for r in session.reflections
            ],
            "final_survey": None
            if session.final_survey is None
            else session_to_dict(session)["final_survey"],
        }

    @app.get("/study/summary")
    def get_study_summary():
        sessions = load_sessions(config.session_dir)
        return summary_to_json(summarize_study(sessions))

    @app.get("/images/{image_id}")
    def get_image(image_id: str):
        data, media = images.load(image_id)
        return Response(
            content=data,
            media_type=media,
            headers={"Cache-Control": "public, max-age=31536000, immutable"},
        )

    return app


def serve(config: ServiceConfig) -> None:
    """Validate, build, and run the service until interrupted."""
    import uvicorn

    app = create_app(config)
    uvicorn.run(app, host=config.host, port=config.port, log_level="info")
