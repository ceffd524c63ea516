"""HTTP service: OCR, annotation tasks, corpus stats, evaluation runs."""

from __future__ import annotations

from pathlib import Path

from fastapi import FastAPI, Request, Response
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from .. import __version__
from ..corpus import corpus_stats
from ..engine import ocr_page, resolve_engine
from ..errors import (EngineFailure, EngineNotFound, EngineTimeout,
                      ImageTooLarge, KurdocrError, UndecodableImage)
from ..raster import PreprocessPlan, load_raster
from ..textnorm import NormalizationPolicy
from .config import ServiceConfig
from .evalruns import EvalRunner, RunInFlight, UnknownReport
from .store import (AnnotationStore, UnknownTask, ValidationFailed,
                    WriteConflict)


def create_app(config: ServiceConfig | None = None) -> FastAPI:
    config = config or ServiceConfig()
    app = FastAPI(title="kurdocr", version=__version__)

    store: AnnotationStore | None = None
    runner: EvalRunner | None = None
    if config.corpus_root:
        store = AnnotationStore(config.corpus_root)
        store.mount()
        runner = EvalRunner(store, parallelism=config.parallelism)
    app.state.store = store
    app.state.runner = runner
    app.state.config = config

    def need_store() -> AnnotationStore:
        if store is None:
            raise _NoCorpus()
        return store

    class _NoCorpus(Exception):
        pass

    @app.exception_handler(_NoCorpus)
    async def no_corpus_handler(request: Request, exc: _NoCorpus):
        return JSONResponse({"error": "NoCorpus", "message": "no corpus mounted"},
                            status_code=503)

    @app.exception_handler(KurdocrError)
    async def domain_error_handler(request: Request, exc: KurdocrError):
        status = 500
        if isinstance(exc, ImageTooLarge):
            status = 413
        elif isinstance(exc, UndecodableImage):
            status = 415
        elif isinstance(exc, EngineTimeout):
            status = 504
        elif isinstance(exc, (EngineFailure, EngineNotFound)):
            status = 502
        elif isinstance(exc, UnknownTask) or isinstance(exc, UnknownReport):
            status = 404
        elif isinstance(exc, WriteConflict) or isinstance(exc, RunInFlight):
            status = 409
        elif isinstance(exc, ValidationFailed):
            return JSONResponse(
                {"error": exc.code, "message": str(exc),
                 "issues": [i.to_json() for i in exc.issues]},
                status_code=422)
        return JSONResponse(exc.to_json(), status_code=status)

    @app.get("/api/health")
    async def health():
        return {"status": "ok", "version": __version__,
                "corpus_mounted": store is not None}

    # ------------------------------------------------------------- OCR

    @app.post("/api/ocr")
    async def run_ocr(request: Request, profile: str | None = None,
                      by_line: bool = True, fold: bool = False):
        content_type = request.headers.get("content-type", "")
        if content_type.startswith("multipart/form-data"):
            form = await request.form()
            upload = None
            for value in form.values():
                if hasattr(value, "read"):
                    upload = value
                    break
            if upload is None:
                raise UndecodableImage("multipart body carries no file field")
            data = await upload.read()
        else:
            data = await request.body()
        if not data:
            raise UndecodableImage("empty request body")
        if len(data) > config.max_image_mb * 1024 * 1024:
            raise ImageTooLarge(
                f"body exceeds {config.max_image_mb:g} MB cap")
        image = load_raster(data, max_image_mb=config.max_image_mb)
        spec = resolve_engine(profile or config.default_profile)
        policy = NormalizationPolicy(historical_fold=fold)
        plan = PreprocessPlan(max_image_mb=config.max_image_mb)
        result = ocr_page(image, plan, spec, by_line=by_line, policy=policy,
                          max_workers=config.parallelism)
        return result.to_json()

    # ------------------------------------------------------------ tasks

    @app.get("/api/tasks/next")
    async def next_task(prefill: str | None = None, profile: str | None = None):
        st = need_store()
        task = st.next_task()
        if task is None:
            return Response(status_code=204)
        payload = task.to_json()
        if prefill == "ocr" and not payload["current_transcript"]:
            spec = resolve_engine(profile or config.default_profile)
            image = load_raster(task.image_path, max_image_mb=config.max_image_mb)
            pair = st.manifest.pair_by_id(task.task_id) if st.manifest else None
            if pair is not None:
                image.meta["gt_text"] = pair.transcript
            result = ocr_page(image, PreprocessPlan(deskew=False), spec,
                              by_line=False, max_workers=config.parallelism)
            payload["current_transcript"] = result.text
            payload["prefilled"] = True
        return payload

    @app.get("/api/tasks/{task_id}")
    async def get_task(task_id: str):
        return need_store().get(task_id).to_json()

    @app.get("/api/tasks/{task_id}/image")
    async def task_image(task_id: str):
        task = need_store().get(task_id)
        data = Path(task.image_path).read_bytes()
        media = "image/png" if task.image_path.lower().endswith(".png") else "image/tiff"
        return Response(content=data, media_type=media)

    @app.put("/api/tasks/{task_id}/transcript", status_code=204)
    async def put_transcript(task_id: str, request: Request):
        body = await request.json()
        text = body.get("text", "")
        confirm = bool(body.get("confirm", False))
        expected = body.get("expected_updated")
        need_store().save_transcript(task_id, text, confirm, expected)
        return Response(status_code=204)

    @app.post("/api/tasks/{task_id}/reopen")
    async def reopen_task(task_id: str):
        return need_store().reopen(task_id).to_json()

    # ----------------------------------------------------------- corpus

    @app.get("/api/corpus/stats")
    async def stats():
        st = need_store()
        return corpus_stats(st.manifest).to_json()

    # ------------------------------------------------------------- eval

    @app.post("/api/eval/run")
    async def eval_run(request: Request):
        st = need_store()
        body = await request.json()
        report_id = app.state.runner.run(
            profile=body.get("profile", config.default_profile),
            split_name=body.get("split", "eval"),
            fold=bool(body.get("fold", False)),
            by_line=bool(body.get("by_line", True)))
        return {"report_id": report_id}

    @app.post("/api/eval/report")
    async def eval_inject(request: Request):
        need_store()
        body = await request.json()
        report_id = app.state.runner.inject_counts(body.get("rows", []))
        return {"report_id": report_id}

    @app.get("/api/eval/report/{report_id}")
    async def eval_report(report_id: str):
        need_store()
        return app.state.runner.load_report(report_id)

    ui_dir = config.ui_dist
    if ui_dir and Path(ui_dir).is_dir():
        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app
