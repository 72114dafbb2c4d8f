"""HTTP job service backing the conservator UI.

Routes are JSON except image/mask GETs, which return PNG bytes. Long
computations run as FIFO jobs on a fixed-size worker pool; mask growing is
synchronous because the UI needs it at interaction latency. All state lives
in the DataStore, so a restart rebuilds the index and re-queues unfinished
jobs.
"""

from __future__ import annotations

import queue
import threading
import traceback
from contextlib import asynccontextmanager
from pathlib import Path

from fastapi import FastAPI, HTTPException, Request, Response
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from . import kernels
from .detect import SeedSet, dilate_mask, grow_region
from .errors import DecodeError, LumenError, OutOfBoundsError
from .exemplar import ExemplarParams, inpaint_exemplar
from .osmosis import OsmosisParams, fuse_multispectral
from .pde import DiffusionMethod, inpaint_diffusion
from .png_io import decode_image_bytes, encode_image_png
from .store import JOB_METHODS, DataStore, RestorationJob, _utcnow

MAX_UPLOAD_BYTES = 64 * 1024 * 1024
_PNG_MAGIC = b"\x89PNG\r\n\x1a\n"


# ---------------------------------------------------------------------------
# job parameter vocabulary (shared with the CLI's --json-report)

def _take(params: dict, key, default, caster, check, what):
    raw = params.get(key, default)
    try:
        val = caster(raw)
    except (TypeError, ValueError):
        raise HTTPException(422, f"{key} must be {what}")
    if not check(val):
        raise HTTPException(422, f"{key} must be {what}")
    return val


def validate_job_params(method: str, params: dict) -> dict:
    """Check the method-specific parameter vocabulary, filling defaults."""
    params = dict(params or {})
    params.pop("method", None)
    out: dict = {"method": method}
    if method in ("harmonic", "tv"):
        out["solver_tol"] = _take(
            params, "solver_tol", 1e-10, float, lambda v: v > 0, "a positive number"
        )
        params.pop("solver_tol", None)
        if method == "tv":
            out["tv_epsilon"] = _take(
                params, "tv_epsilon", 1e-3, float, lambda v: v > 0, "a positive number"
            )
            out["tv_outer_iters"] = _take(
                params, "tv_outer_iters", 30, int, lambda v: v >= 1, "an integer >= 1"
            )
            params.pop("tv_epsilon", None)
            params.pop("tv_outer_iters", None)
    elif method == "exemplar":
        out["patch_size"] = _take(
            params, "patch_size", 9, int,
            lambda v: v >= 3 and v % 2 == 1, "an odd integer >= 3",
        )
        window = params.get("search_window", "full")
        if window != "full":
            try:
                window = int(window)
            except (TypeError, ValueError):
                raise HTTPException(422, "search_window must be 'full' or an integer")
            if window < out["patch_size"]:
                raise HTTPException(422, "search_window must be >= patch_size")
        out["search_window"] = window
        out["data_term_alpha"] = _take(
            params, "data_term_alpha", 1.0, float, lambda v: v > 0, "a positive number"
        )
        for k in ("patch_size", "search_window", "data_term_alpha"):
            params.pop(k, None)
    elif method == "osmosis":
        region = params.pop("region", "full")
        if not isinstance(region, str):
            raise HTTPException(422, "region must be 'full' or a mask id")
        out["region"] = region
        out["dt"] = _take(params, "dt", 1000.0, float, lambda v: v > 0, "a positive number")
        out["steps"] = _take(params, "steps", 500, int, lambda v: v >= 1, "an integer >= 1")
        out["steady_tol"] = _take(
            params, "steady_tol", 1e-8, float, lambda v: v >= 0, "a non-negative number"
        )
        out["offset"] = _take(
            params, "offset", 1.0 / 255.0, float, lambda v: v > 0, "a positive number"
        )
        out["solver_tol"] = _take(
            params, "solver_tol", 1e-12, float, lambda v: v > 0, "a positive number"
        )
        out["presmooth_steps"] = _take(
            params, "presmooth_steps", 0, int, lambda v: v >= 0, "an integer >= 0"
        )
        out["presmooth_dt"] = _take(
            params, "presmooth_dt", 1.0, float, lambda v: v > 0, "a positive number"
        )
        for k in ("dt", "steps", "steady_tol", "offset", "solver_tol",
                  "presmooth_steps", "presmooth_dt"):
            params.pop(k, None)
    else:
        raise HTTPException(422, f"unknown method {method!r}")
    if params:
        raise HTTPException(422, f"unknown parameters for {method}: {sorted(params)}")
    return out


def execute_job(store: DataStore, job: RestorationJob) -> str:
    """Run the library call a job describes; returns the result image id."""
    image = decode_image_bytes(store.get_image_bytes(job.input_image_id))
    params = job.params
    method = job.method
    if method in ("harmonic", "tv"):
        mask = store.get_mask(job.mask_id)
        spec = (
            DiffusionMethod.harmonic()
            if method == "harmonic"
            else DiffusionMethod.total_variation(
                params["tv_epsilon"], params["tv_outer_iters"]
            )
        )
        result = inpaint_diffusion(image, mask, spec, solver_tol=params["solver_tol"])
        out = result.image
    elif method == "exemplar":
        mask = store.get_mask(job.mask_id)
        window = params["search_window"]
        out = inpaint_exemplar(
            image,
            mask,
            ExemplarParams(
                patch_size=params["patch_size"],
                search_window=None if window == "full" else int(window),
                data_term_alpha=params["data_term_alpha"],
            ),
        )
    elif method == "osmosis":
        source = decode_image_bytes(store.get_image_bytes(job.source_image_id))
        region = None
        if params["region"] != "full":
            region = store.get_mask(params["region"])
        out = fuse_multispectral(
            image,
            source,
            region,
            OsmosisParams(
                dt=params["dt"],
                steps=params["steps"],
                steady_tol=params["steady_tol"],
                offset=params["offset"],
                solver_tol=params["solver_tol"],
                presmooth_steps=params["presmooth_steps"],
                presmooth_dt=params["presmooth_dt"],
            ),
        )
    else:  # pragma: no cover - guarded at submit time
        raise ValueError(f"unknown method {method}")
    return store.put_image(encode_image_png(out)).image_id


class JobRunner:
    """Fixed-size worker pool draining a FIFO job queue."""

    def __init__(self, store: DataStore, workers: int) -> None:
        self.store = store
        self.queue: queue.Queue = queue.Queue()
        self.workers = max(1, workers)
        self._threads: list[threading.Thread] = []

    def start(self) -> None:
        # jobs interrupted by a previous shutdown go back on the queue
        for job in self.store.list_jobs():
            if job.status in ("queued", "running"):
                if job.status == "running":
                    job.status = "queued"
                    self.store.save_job(job)
                self.queue.put(job.job_id)
        for i in range(self.workers):
            t = threading.Thread(target=self._worker, name=f"lumen-worker-{i}", daemon=True)
            t.start()
            self._threads.append(t)

    def stop(self) -> None:
        for _ in self._threads:
            self.queue.put(None)
        for t in self._threads:
            t.join(timeout=30)
        self._threads.clear()

    def submit(self, job: RestorationJob) -> None:
        self.queue.put(job.job_id)

    def _worker(self) -> None:
        while True:
            job_id = self.queue.get()
            if job_id is None:
                return
            job = self.store.get_job(job_id)
            if job is None or job.status != "queued":
                continue
            job.status = "running"
            self.store.save_job(job)
            try:
                result_id = execute_job(self.store, job)
                job.status = "done"
                job.result_image_id = result_id
            except LumenError as exc:
                job.status = "failed"
                job.error = str(exc)
            except Exception as exc:  # defensive: keep the worker alive
                job.status = "failed"
                job.error = f"{type(exc).__name__}: {exc}"
                traceback.print_exc()
            job.finished_at = _utcnow()
            self.store.save_job(job)


def _job_json(job: RestorationJob) -> dict:
    return job.to_dict()


def create_app(data_dir, workers: int = 2, ui_dir=None) -> FastAPI:
    """Build the service app; workers start on app startup."""
    store = DataStore(data_dir)
    runner = JobRunner(store, workers)

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        runner.start()
        try:
            yield
        finally:
            runner.stop()

    app = FastAPI(title="lumen restoration service", lifespan=lifespan)
    app.state.store = store
    app.state.runner = runner
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.get("/api/health")
    def health():
        jobs = store.list_jobs()
        return {
            "status": "ok",
            "backend": kernels.BACKEND,
            "jobs": {s: sum(1 for j in jobs if j.status == s)
                     for s in ("queued", "running", "done", "failed")},
        }

    @app.post("/api/images", status_code=201)
    async def upload_image(request: Request):
        body = await request.body()
        if len(body) > MAX_UPLOAD_BYTES:
            raise HTTPException(413, "image exceeds the 64 MB upload cap")
        try:
            meta = store.put_image(body)
        except DecodeError as exc:
            raise HTTPException(400, f"not a decodable image: {exc}")
        return {
            "image_id": meta.image_id,
            "width": meta.width,
            "height": meta.height,
            "channels": meta.channels,
        }

    @app.get("/api/images/{image_id}")
    def get_image(image_id: str):
        data = store.get_image_bytes(image_id)
        if data is None:
            raise HTTPException(404, "unknown image")
        return Response(content=data, media_type="image/png")

    @app.post("/api/masks", status_code=201)
    async def create_mask(request: Request):
        body = await request.body()
        if len(body) > MAX_UPLOAD_BYTES:
            raise HTTPException(413, "mask exceeds the 64 MB upload cap")
        content_type = request.headers.get("content-type", "")
        if content_type.startswith("image/png") or body[:8] == _PNG_MAGIC:
            # painted mask uploaded as PNG
            try:
                mask_id, mask = store.put_mask_bytes(body)
            except DecodeError as exc:
                raise HTTPException(400, f"not a decodable mask: {exc}")
        else:
            import json as _json

            try:
                spec = _json.loads(body)
            except ValueError:
                raise HTTPException(400, "expected JSON or PNG body")
            image_id = spec.get("image_id")
            if not isinstance(image_id, str) or store.get_image_meta(image_id) is None:
                raise HTTPException(404, "unknown image")
            try:
                tolerance = float(spec.get("tolerance"))
            except (TypeError, ValueError):
                raise HTTPException(422, "tolerance must be a number")
            if tolerance < 0:
                raise HTTPException(422, "tolerance must be >= 0")
            seeds_raw = spec.get("seeds", [])
            if not isinstance(seeds_raw, list):
                raise HTTPException(422, "seeds must be a list of {x, y}")
            try:
                seeds = [(int(s["x"]), int(s["y"])) for s in seeds_raw]
            except (TypeError, KeyError, ValueError):
                raise HTTPException(422, "seeds must be a list of {x, y}")
            dilate_radius = spec.get("dilate_radius", 0)
            if not isinstance(dilate_radius, int) or dilate_radius < 0:
                raise HTTPException(422, "dilate_radius must be an integer >= 0")
            image = decode_image_bytes(store.get_image_bytes(image_id))
            try:
                mask = grow_region(image, SeedSet(seeds, tolerance))
            except OutOfBoundsError as exc:
                raise HTTPException(422, str(exc))
            if dilate_radius:
                mask = dilate_mask(mask, dilate_radius)
            mask_id = store.put_mask(mask)
        count = int(mask.bits.sum())
        return {
            "mask_id": mask_id,
            "count_true": count,
            "fraction": count / (mask.width * mask.height),
            "width": mask.width,
            "height": mask.height,
        }

    @app.get("/api/masks/{mask_id}")
    def get_mask(mask_id: str):
        data = store.get_mask_bytes(mask_id)
        if data is None:
            raise HTTPException(404, "unknown mask")
        return Response(content=data, media_type="image/png")

    @app.post("/api/jobs", status_code=202)
    async def submit_job(request: Request):
        import json as _json

        try:
            spec = _json.loads(await request.body())
        except ValueError:
            raise HTTPException(400, "expected a JSON job spec")
        raw_params = spec.get("params", {})
        if not isinstance(raw_params, dict):
            raise HTTPException(422, "params must be an object")
        method = spec.get("method", raw_params.get("method"))
        if method not in JOB_METHODS:
            raise HTTPException(422, f"method must be one of {list(JOB_METHODS)}")

        input_image_id = spec.get("input_image_id")
        if not isinstance(input_image_id, str) or store.get_image_meta(input_image_id) is None:
            raise HTTPException(404, "unknown input_image_id")

        mask_id = spec.get("mask_id")
        source_image_id = spec.get("source_image_id")
        params = validate_job_params(method, raw_params)

        if method in ("harmonic", "tv", "exemplar"):
            if not isinstance(mask_id, str):
                raise HTTPException(422, f"{method} requires mask_id")
            if not store.has_mask(mask_id):
                raise HTTPException(404, "unknown mask_id")
        if method == "osmosis":
            if not isinstance(source_image_id, str):
                raise HTTPException(422, "osmosis requires source_image_id")
            if store.get_image_meta(source_image_id) is None:
                raise HTTPException(404, "unknown source_image_id")
            if params["region"] == "full" and isinstance(mask_id, str):
                params["region"] = mask_id  # mask_id doubles as the region
            if params["region"] != "full":
                if not store.has_mask(params["region"]):
                    raise HTTPException(404, "unknown region mask")
                mask_id = params["region"]

        job = store.new_job(
            method=method,
            params=params,
            input_image_id=input_image_id,
            mask_id=mask_id,
            source_image_id=source_image_id,
        )
        runner.submit(job)
        return {"job_id": job.job_id, "status": job.status}

    @app.get("/api/jobs")
    def list_jobs():
        return [_job_json(j) for j in store.list_jobs()]

    @app.get("/api/jobs/{job_id}")
    def get_job(job_id: str):
        job = store.get_job(job_id)
        if job is None:
            raise HTTPException(404, "unknown job")
        return _job_json(job)

    @app.post("/api/jobs/{job_id}/feedback")
    async def post_feedback(job_id: str, request: Request):
        import json as _json

        job = store.get_job(job_id)
        if job is None:
            raise HTTPException(404, "unknown job")
        try:
            body = _json.loads(await request.body())
        except ValueError:
            raise HTTPException(400, "expected a JSON feedback body")
        rating = body.get("rating")
        if not isinstance(rating, int) or isinstance(rating, bool) or not 1 <= rating <= 5:
            raise HTTPException(422, "rating must be an integer in 1..5")
        comment = body.get("comment", "")
        if not isinstance(comment, str):
            raise HTTPException(422, "comment must be a string")
        if job.status != "done":
            raise HTTPException(409, f"feedback requires a done job, not {job.status}")
        job.feedback = {"rating": rating, "comment": comment}
        store.save_job(job)
        return _job_json(job)

    static_dir = Path(ui_dir) if ui_dir else Path(__file__).parent / "static"
    if static_dir.is_dir():
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")
    else:
        @app.get("/")
        def index():
            return JSONResponse(
                {"service": "lumen", "ui": "not installed", "api": "/api/health"}
            )

    return app
