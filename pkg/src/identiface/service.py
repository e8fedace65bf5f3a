"""HTTP inference service backing the UI's offline and online modes.

Endpoints (JSON unless noted):

* ``GET /v1/models`` — loaded-model inventory with label maps and the
  offline-only flag (true for recognition).
* ``POST /v1/predict/{task}`` — body is a PGM/PNG image (raw bytes) or
  ``{"image_base64": ...}``; returns one PredictionResponse.
* ``POST /v1/predict/frame?tasks=a,b`` — one webcam frame classified by
  several tasks at once. Recognition is rejected here (422): it is an
  offline-only model. Subject to the configured frame-rate cap (429).

Error bodies are always ``{"error": {"code": ..., "message": ...}}``.
Models are immutable after load, so concurrent requests share them safely.
"""

from __future__ import annotations

import base64
import binascii
import hashlib
import json
import sys
import time
from collections import deque
from pathlib import Path

from fastapi import FastAPI, Query, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from .config import ServiceConfig
from .errors import FormatError, IdentifaceError
from .imageio import decode_image_bytes
from .manifest import TASKS
from .modelio import load_model


class ServiceError(Exception):
    def __init__(self, status: int, code: str, message: str):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message


class FrameRateLimiter:
    """Sliding one-second window over frame timestamps."""

    def __init__(self, cap: int, clock=time.monotonic):
        self.cap = cap
        self.clock = clock
        self._stamps: deque[float] = deque()

    def admit(self) -> bool:
        now = self.clock()
        while self._stamps and now - self._stamps[0] >= 1.0:
            self._stamps.popleft()
        if len(self._stamps) >= self.cap:
            return False
        self._stamps.append(now)
        return True


def _load_models(config: ServiceConfig) -> dict[str, tuple]:
    models = {}
    for task in sorted(config.model_paths):
        path = config.resolve(task)
        if not Path(path).is_file():
            print(f"warning: {task} model file {path} missing; task will answer 503",
                  file=sys.stderr)
            continue
        model = load_model(path)
        if model.needs_landmarks:
            raise FormatError(
                f"{path}: landmark-feature models cannot serve HTTP image predictions"
            )
        version = hashlib.sha256(Path(path).read_bytes()).hexdigest()[:12]
        models[task] = (model, version)
    return models


def _prediction_payload(task, model, version, pixels, started):
    result = model.predict_pixels(pixels)
    return {
        "task": task,
        "label": result.label,
        "probabilities": {
            model.label_map[i]: float(result.probabilities[i])
            for i in range(len(model.label_map))
        },
        "top2": [[label, pct] for label, pct in result.top2],
        "model_version": version,
        "latency_ms": round((time.perf_counter() - started) * 1000.0, 3),
    }


async def _read_image(request: Request, max_bytes: int):
    body = await request.body()
    if len(body) > max_bytes:
        raise ServiceError(413, "payload_too_large",
                           f"request body exceeds {max_bytes} bytes")
    if not body:
        raise ServiceError(422, "undecodable_image", "empty request body")
    content_type = request.headers.get("content-type", "")
    if content_type.startswith("application/json"):
        try:
            payload = json.loads(body)
            body = base64.b64decode(payload["image_base64"], validate=True)
        except (json.JSONDecodeError, KeyError, TypeError, binascii.Error) as exc:
            raise ServiceError(422, "undecodable_image",
                               f"bad base64 image payload: {exc}") from exc
    try:
        return decode_image_bytes(body, "<upload>")
    except FormatError as exc:
        raise ServiceError(422, "undecodable_image", str(exc)) from exc


def create_app(config: ServiceConfig, clock=time.monotonic, ui_dir=None) -> FastAPI:
    app = FastAPI(title="identiface", docs_url=None, redoc_url=None)
    app.add_middleware(CORSMiddleware, allow_origins=["*"], allow_methods=["*"],
                       allow_headers=["*"])
    models = _load_models(config)
    limiter = FrameRateLimiter(config.frame_rate_cap, clock=clock)

    @app.exception_handler(ServiceError)
    async def _service_error(_request, exc: ServiceError):
        return JSONResponse(
            status_code=exc.status,
            content={"error": {"code": exc.code, "message": exc.message}},
        )

    @app.exception_handler(IdentifaceError)
    async def _engine_error(_request, exc: IdentifaceError):
        return JSONResponse(
            status_code=500,
            content={"error": {"code": exc.code, "message": str(exc)}},
        )

    def _get_model(task: str):
        if task not in TASKS:
            raise ServiceError(404, "unknown_task",
                               f"unknown task {task!r}; expected one of {list(TASKS)}")
        if task not in models:
            raise ServiceError(503, "model_not_loaded",
                               f"no model loaded for task {task!r}")
        return models[task]

    @app.get("/v1/models")
    async def list_models():
        inventory = []
        for task, (model, version) in sorted(models.items()):
            inventory.append(
                {
                    "task": task,
                    "label_map": list(model.label_map),
                    "input": list(model.preprocess.input_shape),
                    "model_version": version,
                    "offline_only": task == "recognition",
                }
            )
        return {"models": inventory, "frame_rate_cap": config.frame_rate_cap}

    # registered before the {task} route so the literal path wins
    @app.post("/v1/predict/frame")
    async def predict_frame(request: Request, tasks: str = Query(default="")):
        started = time.perf_counter()
        names = [t.strip() for t in tasks.split(",") if t.strip()]
        if not names:
            raise ServiceError(400, "no_tasks", "tasks query parameter is empty")
        if "recognition" in names:
            raise ServiceError(
                422,
                "recognition_offline_only",
                "recognition needs high-quality stills and is only available "
                "through the offline endpoint /v1/predict/recognition",
            )
        resolved = [(name, *_get_model(name)) for name in names]
        if not limiter.admit():
            raise ServiceError(429, "frame_rate_exceeded",
                               f"frame rate cap {config.frame_rate_cap}/s exceeded")
        pixels = await _read_image(request, config.max_request_bytes)
        return [
            _prediction_payload(name, model, version, pixels, started)
            for name, model, version in resolved
        ]

    @app.post("/v1/predict/{task}")
    async def predict(task: str, request: Request):
        started = time.perf_counter()
        model, version = _get_model(task)
        pixels = await _read_image(request, config.max_request_bytes)
        return _prediction_payload(task, model, version, pixels, started)

    if ui_dir is not None:
        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app
