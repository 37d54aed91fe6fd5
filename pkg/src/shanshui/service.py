"""Interactive sketch-to-painting HTTP service.

One exclusive model worker consumes a bounded queue; request handlers
block on their job and answer 503 with Retry-After when the queue is
full.  Every successful generation is persisted to the gallery before
the response leaves the handler.
"""

from __future__ import annotations

import base64
import binascii
import io
import queue
import threading
import time
import uuid
from contextlib import asynccontextmanager
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np
import torch
from fastapi import FastAPI, Request
from fastapi.responses import FileResponse, HTMLResponse, JSONResponse
from fastapi.staticfiles import StaticFiles
from PIL import Image, UnidentifiedImageError

from .checkpoint import GeneratorHandle, load_generator
from .errors import DomainError
from .gallery import Gallery, GenerationRecord
from .raster import Raster, resize, save_raster
from .tensors import to_raster, to_tensor

MIN_SKETCH_DIMS = 32


@dataclass(frozen=True)
class ServiceConfig:
    checkpoint: Path
    host: str = "127.0.0.1"
    port: int = 8000
    input_size: int | None = None  # None: use the checkpoint's training size
    queue_capacity: int = 8
    gallery_dir: Path = Path("gallery")
    static_dir: Path | None = None

    def __post_init__(self):
        if self.queue_capacity < 1:
            raise DomainError("queue capacity must be >= 1")


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str, retry_after: int | None = None):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message
        self.retry_after = retry_after


def preprocess_sketch(png_bytes: bytes, size: int) -> torch.Tensor:
    """Decode, composite over white, resize, and scale to [-1, 1]."""
    try:
        img = Image.open(io.BytesIO(png_bytes))
        if img.format != "PNG":
            raise ApiError(400, "bad_request", f"sketch must be PNG, got {img.format}")
        if img.width < MIN_SKETCH_DIMS or img.height < MIN_SKETCH_DIMS:
            raise ApiError(
                400, "bad_request", f"sketch must be at least {MIN_SKETCH_DIMS}px per side"
            )
        if img.mode in ("RGBA", "LA", "PA", "P"):
            base = Image.new("RGBA", img.size, (255, 255, 255, 255))
            base.alpha_composite(img.convert("RGBA"))
            img = base
        img = img.convert("RGB")
        img.load()
    except ApiError:
        raise
    except (UnidentifiedImageError, OSError, SyntaxError, ValueError) as exc:
        raise ApiError(400, "bad_request", f"undecodable sketch image: {exc}") from exc
    raster = resize(Raster(np.asarray(img, dtype=np.uint8)), size)
    return to_tensor(raster)


def translate(handle: GeneratorHandle, sketch: torch.Tensor) -> Raster:
    """Run the generator and denormalize to an 8-bit painting."""
    out = handle.translate(sketch)
    if not torch.isfinite(out).all():
        raise ApiError(500, "model_fault", "generator produced non-finite values")
    return to_raster(out)


class _Job:
    __slots__ = ("sketch", "done", "result", "error")

    def __init__(self, sketch: torch.Tensor):
        self.sketch = sketch
        self.done = threading.Event()
        self.result: Raster | None = None
        self.error: Exception | None = None


class ModelWorker:
    """Single exclusive executor over a bounded job queue."""

    def __init__(self, handle: GeneratorHandle, input_size: int, capacity: int):
        self.handle = handle
        self.input_size = input_size
        self._queue: queue.Queue[_Job | None] = queue.Queue(maxsize=capacity)
        self._in_flight = 0
        self._ready = threading.Event()
        self._thread = threading.Thread(target=self._run, name="model-worker", daemon=True)

    def start(self) -> None:
        self._thread.start()

    def _run(self) -> None:
        # Warm-up on a blank sketch before reporting healthy.
        blank = torch.ones(3, self.input_size, self.input_size)
        self.handle.translate(blank)
        self._ready.set()
        while True:
            job = self._queue.get()
            if job is None:
                break
            self._in_flight = 1
            try:
                job.result = translate(self.handle, job.sketch)
            except Exception as exc:  # surfaced to the waiting handler
                job.error = exc
            finally:
                self._in_flight = 0
                job.done.set()

    def submit(self, sketch: torch.Tensor) -> _Job:
        job = _Job(sketch)
        try:
            self._queue.put_nowait(job)
        except queue.Full:
            raise ApiError(
                503, "queue_full", "generation queue is full, retry shortly", retry_after=1
            ) from None
        return job

    @property
    def ready(self) -> bool:
        return self._ready.is_set()

    @property
    def depth(self) -> int:
        return self._queue.qsize() + self._in_flight

    def stop(self) -> None:
        if self._thread.is_alive():
            self._queue.put(None)  # finish the in-flight job, then exit
            self._thread.join()


def _encode_png(img: Raster) -> bytes:
    buf = io.BytesIO()
    arr = img.data[:, :, 0] if img.channels == 1 else img.data
    Image.fromarray(arr).save(buf, format="PNG")
    return buf.getvalue()


async def _read_sketch_bytes(request: Request) -> bytes:
    content_type = request.headers.get("content-type", "")
    if content_type.startswith("multipart/form-data"):
        form = await request.form()
        upload = form.get("sketch")
        if upload is None:
            raise ApiError(400, "bad_request", "multipart body needs a 'sketch' field")
        return await upload.read() if hasattr(upload, "read") else str(upload).encode()
    if content_type.startswith("application/json"):
        body = await request.json()
        encoded = body.get("sketch_base64") if isinstance(body, dict) else None
        if not isinstance(encoded, str):
            raise ApiError(400, "bad_request", "JSON body needs a 'sketch_base64' string")
        try:
            return base64.b64decode(encoded, validate=True)
        except (binascii.Error, ValueError) as exc:
            raise ApiError(400, "bad_request", f"invalid base64 sketch: {exc}") from exc
    raise ApiError(400, "bad_request", "send multipart form data or JSON")


def create_app(cfg: ServiceConfig, handle: GeneratorHandle | None = None) -> FastAPI:
    """Assemble the service; a prebuilt generator handle bypasses checkpoint loading."""
    if handle is None:
        handle = load_generator(cfg.checkpoint)
    input_size = cfg.input_size or handle.input_size
    worker = ModelWorker(handle, input_size, cfg.queue_capacity)
    gallery = Gallery(cfg.gallery_dir)

    @asynccontextmanager
    async def lifespan(_app: FastAPI):
        worker.start()
        yield
        worker.stop()

    app = FastAPI(title="shanshui", docs_url=None, redoc_url=None, lifespan=lifespan)
    app.state.worker = worker
    app.state.gallery = gallery

    @app.exception_handler(ApiError)
    async def api_error_handler(_request, exc: ApiError):
        headers = {"Retry-After": str(exc.retry_after)} if exc.retry_after else None
        return JSONResponse(
            status_code=exc.status,
            content={"error": {"code": exc.code, "message": exc.message}},
            headers=headers,
        )

    @app.get("/healthz")
    def healthz():
        if not worker.ready:
            raise ApiError(503, "not_ready", "model warm-up in progress")
        return {
            "status": "ok",
            "checkpoint_id": handle.checkpoint_id,
            "queue_depth": worker.depth,
        }

    @app.post("/api/generate")
    async def generate(request: Request):
        t0 = time.perf_counter()
        sketch_png = await _read_sketch_bytes(request)
        if not worker.ready:
            raise ApiError(503, "not_ready", "model warm-up in progress", retry_after=1)
        tensor = preprocess_sketch(sketch_png, input_size)
        job = worker.submit(tensor)
        job.done.wait()
        if job.error is not None:
            if isinstance(job.error, ApiError):
                raise job.error
            raise ApiError(500, "model_fault", f"generation failed: {job.error}")
        painting_png = _encode_png(job.result)
        latency_ms = (time.perf_counter() - t0) * 1000.0

        record_id = uuid.uuid4().hex[:12]
        record = GenerationRecord(
            id=record_id,
            created_at=datetime.now(tz=timezone.utc).isoformat(),
            sketch_path=f"images/{record_id}_sketch.png",
            painting_path=f"images/{record_id}_painting.png",
            checkpoint_id=handle.checkpoint_id,
            latency_ms=latency_ms,
        )
        gallery.add(record, sketch_png, painting_png)
        return {
            "id": record_id,
            "painting_base64": base64.b64encode(painting_png).decode("ascii"),
            "latency_ms": latency_ms,
        }

    @app.get("/api/gallery")
    def gallery_index(page: int = 1, page_size: int = 20):
        if page < 1 or page_size < 1:
            raise ApiError(400, "bad_request", "page and page_size must be >= 1")
        payload = gallery.page(page, page_size)
        for record in payload["records"]:
            record["sketch_url"] = f"/api/gallery/{record['id']}/sketch"
            record["painting_url"] = f"/api/gallery/{record['id']}/painting"
        return payload

    @app.get("/api/gallery/{record_id}/{kind}")
    def gallery_image(record_id: str, kind: str):
        path = gallery.image_path(record_id, kind)
        if path is None:
            raise ApiError(404, "not_found", f"no {kind} for record {record_id}")
        return FileResponse(path, media_type="image/png")

    static_dir = cfg.static_dir
    if static_dir is not None and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="client")
    else:

        @app.get("/", response_class=HTMLResponse)
        def index_placeholder():
            return (
                "<html><body><h1>shanshui</h1>"
                "<p>Drawing client not built; the API lives under /api.</p>"
                "</body></html>"
            )

    return app


def serve(cfg: ServiceConfig, handle: GeneratorHandle | None = None) -> None:
    """Run until terminated; in-flight generation finishes on shutdown."""
    import uvicorn

    app = create_app(cfg, handle)
    uvicorn.run(app, host=cfg.host, port=cfg.port, log_level="info")
