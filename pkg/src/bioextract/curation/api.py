"""HTTP front for the curation service.

Thin by intent: every endpoint delegates to CurationService and maps its
exceptions onto status codes. The editor identity is a declared header,
not authentication.
"""

from __future__ import annotations

from typing import Optional

from fastapi import Body, FastAPI, Header, Query, Request, Response
from fastapi.responses import JSONResponse

from .service import CurationService
from .state import ConflictError, CurationError, InvalidDecision, UnknownResource

EDITOR_HEADER = "X-Editor-Id"


def create_app(service: CurationService) -> FastAPI:
    app = FastAPI(title="bioextract curation", docs_url=None, redoc_url=None)

    @app.exception_handler(CurationError)
    async def _curation_error(request: Request, exc: CurationError):
        status = 400
        if isinstance(exc, UnknownResource):
            status = 404
        elif isinstance(exc, ConflictError):
            status = 409
        elif isinstance(exc, InvalidDecision):
            status = 422
        return JSONResponse(status_code=status, content={"error": str(exc)})

    @app.post("/runs")
    def create_run(body: dict = Body(...)):
        return service.create_run(
            record=body.get("record"),
            document=body.get("document"),
            source_path=body.get("source_path"),
        )

    @app.get("/runs")
    def list_runs():
        return {"runs": service.list_runs()}

    @app.get("/runs/{run_id}")
    def get_run(run_id: str):
        return service.get_run(run_id)

    @app.get("/runs/{run_id}/tasks")
    def list_tasks(run_id: str, stage: Optional[str] = Query(default=None)):
        return service.list_tasks(run_id, stage)

    @app.post("/tasks/{task_id}/decision")
    def submit_decision(
        task_id: str,
        body: dict = Body(...),
        editor: str = Header(default="", alias=EDITOR_HEADER),
    ):
        decision = body.get("decision")
        if not isinstance(decision, str):
            raise InvalidDecision("body needs a decision field")
        return service.submit_decision(
            task_id, decision, body.get("payload"), editor=editor
        )

    @app.post("/runs/{run_id}/recompute")
    def recompute(
        run_id: str, editor: str = Header(default="", alias=EDITOR_HEADER)
    ):
        return service.recompute(run_id, editor=editor)

    @app.get("/runs/{run_id}/export")
    def export(
        run_id: str,
        format: str = Query(default="json"),
        waive: str = Query(default=""),
    ):
        waived = tuple(s for s in waive.split(",") if s)
        body, media_type = service.export(run_id, format, waived)
        # hand back our own canonical bytes; re-serialization would not
        # be byte-stable across replays
        return Response(content=body, media_type=media_type)

    @app.get("/runs/{run_id}/pages/{page}/image")
    def page_image(run_id: str, page: int):
        return Response(content=service.page_image(run_id, page), media_type="image/png")

    @app.get("/runs/{run_id}/annotation")
    def annotation(
        run_id: str,
        query_smiles: str = Query(...),
        top: int = Query(default=10),
    ):
        return service.annotation_candidates(run_id, query_smiles, top)

    return app
