"""Read-only HTTP/JSON service over a loaded artifact snapshot."""

from __future__ import annotations

from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.exceptions import HTTPException, RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .errors import DataError, GraphError
from .pipeline import PipelineArtifacts


class PredictRequest(BaseModel):
    u: str
    v: str
    task: str = "similar_to"


def _doc_summary(doc) -> dict:
    return {
        "id": doc.id,
        "title": doc.title,
        "court": doc.court,
        "doc_type": doc.doc_type,
        "date": doc.date,
    }


def make_app(artifacts: PipelineArtifacts, ui_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="lexgraph", docs_url=None, redoc_url=None)
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["GET", "POST"],
        allow_headers=["*"],
    )

    @app.exception_handler(RequestValidationError)
    async def _bad_request(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"error": str(exc.errors())})

    @app.exception_handler(HTTPException)
    async def _http_error(request: Request, exc: HTTPException):
        return JSONResponse(status_code=exc.status_code, content={"error": exc.detail})

    def _lookup(case_id: str):
        try:
            return artifacts.node_index(case_id)
        except GraphError:
            raise HTTPException(status_code=404, detail=f"unknown case id {case_id!r}")

    @app.get("/stats")
    def stats():
        return artifacts.stats

    @app.get("/cases")
    def cases(q: str = "", limit: int = 50):
        if limit < 1:
            raise HTTPException(status_code=400, detail="limit must be >= 1")
        return [_doc_summary(d) for d in artifacts.search(q, limit)]

    @app.get("/cases/{case_id}")
    def case_detail(case_id: str):
        _lookup(case_id)
        doc = artifacts.docs_by_id[case_id]
        concepts = sorted({m.concept for m in artifacts.mentions.get(case_id, [])})
        out = _doc_summary(doc)
        out.update(
            {
                "metadata": doc.metadata,
                "citations": doc.citations,
                "lawpoints": concepts,
            }
        )
        return out

    @app.get("/cases/{case_id}/similar")
    def similar(case_id: str, k: int = 10, task: str = "similar_to"):
        _lookup(case_id)
        if k < 1:
            raise HTTPException(status_code=400, detail="k must be >= 1")
        try:
            ranked = artifacts.similar(case_id, k, task)
        except DataError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        return [
            {
                "id": other,
                "title": artifacts.docs_by_id[other].title,
                "score": score,
            }
            for other, score in ranked
        ]

    @app.post("/predict")
    def predict(req: PredictRequest):
        _lookup(req.u)
        _lookup(req.v)
        try:
            score = artifacts.predict(req.u, req.v, req.task)
        except DataError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        return {"u": req.u, "v": req.v, "task": req.task, "score": score}

    @app.get("/explain")
    def explain(u: str, v: str, k: int = 5, task: str | None = None):
        _lookup(u)
        _lookup(v)
        if k < 1:
            raise HTTPException(status_code=400, detail="k must be >= 1")
        try:
            return artifacts.explain(u, v, k, task).to_json()
        except DataError as exc:
            raise HTTPException(status_code=400, detail=str(exc))

    @app.get("/subgraph")
    def subgraph(center: str, hops: int = 1, task: str = "similar_to"):
        _lookup(center)
        if not 0 <= hops <= 3:
            raise HTTPException(status_code=400, detail="hops must be in [0, 3]")
        try:
            return artifacts.subgraph(center, hops, task)
        except DataError as exc:
            raise HTTPException(status_code=400, detail=str(exc))

    if ui_dir and Path(ui_dir).is_dir():
        app.mount("/ui", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app


def serve(
    artifacts: PipelineArtifacts,
    host: str = "127.0.0.1",
    port: int = 8321,
    ui_dir: str | None = None,
) -> None:
    import uvicorn

    uvicorn.run(make_app(artifacts, ui_dir), host=host, port=port, log_level="warning")
