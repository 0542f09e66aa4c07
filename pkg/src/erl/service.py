"""Local HTTP JSON API over catalogs, sessions, scoring, and comparisons.

The service is a pure adapter: handlers call the engine and return its
JSON projections verbatim, adding no business logic. Decimal values are
rendered as fixed three-decimal strings ("2.380"), never as binary
floats.

Error mapping is 1:1 — every engine error surfaces as
``{"code", "message", "detail"}`` with a fixed HTTP status: 4xx for
client faults, 5xx for storage faults. Requests within one session are
serialized; an optional ``expected_seq`` token on answer submission
rejects stale clients with 409.

Deployment is localhost-first with no auth; pass a static bearer token
for remote use.
"""

from __future__ import annotations

import threading
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from . import traversal
from .catalog import Catalog, IndicatorId, lint_catalog
from .errors import (
    CatalogMismatch,
    EmptySelection,
    ErlError,
    NeverAnswered,
    OutOfOrderAnswer,
    SessionComplete,
    StaleSequence,
    StorageFailure,
    UnknownBlock,
    UnknownIndicator,
    UnknownSession,
    UnknownUseCase,
    UseCaseMismatch,
)
from .points import format_points
from .scoring import ScoringConfig, score_session
from .store import SessionStore
from .traversal import AnswerValue, Session, SessionMetadata, reachable_upper_bound

STATUS_BY_CODE = {
    UnknownBlock: 422,
    EmptySelection: 422,
    UseCaseMismatch: 422,
    CatalogMismatch: 422,
    UnknownIndicator: 404,
    UnknownSession: 404,
    UnknownUseCase: 404,
    OutOfOrderAnswer: 409,
    SessionComplete: 409,
    NeverAnswered: 409,
    StaleSequence: 409,
    StorageFailure: 500,
}


class BadRequest(ErlError):
    """Malformed request body or query string."""


STATUS_BY_CODE[BadRequest] = 422


def error_response(status: int, code: str, message: str, detail: str = "") -> JSONResponse:
    return JSONResponse(
        status_code=status,
        content={"code": code, "message": message, "detail": detail},
    )


def catalog_summary(catalog: Catalog) -> dict:
    return {
        "catalog_id": catalog.catalog_id,
        "version": catalog.version,
        "indicator_count": catalog.indicator_count,
        "blocks": [
            {"block_id": b.block_id, "title": b.title, "indicator_count": len(b)}
            for b in catalog.blocks
        ],
    }


def catalog_detail(catalog: Catalog) -> dict:
    # weights are shared openly with the evaluated team, so they ride along
    return {
        "catalog_id": catalog.catalog_id,
        "version": catalog.version,
        "blocks": [
            {
                "block_id": b.block_id,
                "title": b.title,
                "indicators": [
                    {
                        "number": str(ind.id),
                        "text": ind.text,
                        "yes_score": format_points(ind.yes_score),
                        "no_score": format_points(ind.no_score),
                        "layer": ind.layer,
                    }
                    for ind in (b.indicators[i] for i in b.ordered_ids)
                ],
            }
            for b in catalog.blocks
        ],
    }


def next_payload(session: Session) -> dict:
    key = traversal.current_question(session)
    answered = len(session.answers)
    if key is None:
        return {
            "done": True,
            "seq": session.seq,
            "progress": {"answered": answered, "reachable_remaining_upper_bound": 0},
        }
    block_id, ind_id = key
    indicator = session.catalog.block(block_id).indicators[ind_id]
    return {
        "done": False,
        "block_id": block_id,
        "indicator_id": str(ind_id),
        "text": indicator.text,
        "layer": indicator.layer,
        "seq": session.seq,
        "progress": {
            "answered": answered,
            "reachable_remaining_upper_bound": reachable_upper_bound(session),
        },
    }


class SessionRegistry:
    """Active (unsaved or in-progress) sessions, one lock per session."""

    def __init__(self):
        self._sessions: dict[str, Session] = {}
        self._locks: dict[str, threading.Lock] = {}
        self._registry_lock = threading.Lock()

    def add(self, session: Session) -> None:
        with self._registry_lock:
            self._sessions[session.session_id] = session
            self._locks[session.session_id] = threading.Lock()

    def get(self, session_id: str) -> tuple[Session, threading.Lock]:
        with self._registry_lock:
            if session_id not in self._sessions:
                raise UnknownSession(session_id)
            return self._sessions[session_id], self._locks[session_id]


def create_app(
    catalogs: dict[str, Catalog],
    store: SessionStore,
    config: ScoringConfig,
    token: str | None = None,
    ui_dir: str | Path | None = None,
) -> FastAPI:
    app = FastAPI(title="ethics-readiness", docs_url=None, redoc_url=None)
    registry = SessionRegistry()

    @app.exception_handler(ErlError)
    async def handle_engine_error(request: Request, exc: ErlError):
        status = STATUS_BY_CODE.get(type(exc), 400)
        return error_response(status, exc.code, str(exc))

    @app.exception_handler(ValueError)
    async def handle_value_error(request: Request, exc: ValueError):
        return error_response(422, "ValidationError", str(exc))

    if token:
        @app.middleware("http")
        async def check_token(request: Request, call_next):
            if request.url.path.startswith("/v1") and request.headers.get(
                "authorization"
            ) != f"Bearer {token}":
                return error_response(401, "Unauthorized", "missing or bad bearer token")
            return await call_next(request)

    def get_catalog(catalog_id: str) -> Catalog:
        if catalog_id not in catalogs:
            raise UnknownBlock(f"unknown catalog {catalog_id!r}")
        return catalogs[catalog_id]

    def find_session(session_id: str) -> tuple[Session, threading.Lock]:
        try:
            return registry.get(session_id)
        except UnknownSession:
            use_case_id = store.find_session(session_id)
            return store.load_session(use_case_id, session_id), threading.Lock()

    def parse_value(body: dict) -> AnswerValue:
        verdict = body.get("verdict")
        if verdict not in ("yes", "no"):
            raise BadRequest(f"verdict must be 'yes' or 'no', got {verdict!r}")
        return AnswerValue(verdict, bool(body.get("unsure", False)))

    def check_seq(session: Session, body: dict) -> None:
        expected = body.get("expected_seq")
        if expected is not None and expected != session.seq:
            raise StaleSequence(
                f"expected_seq {expected} does not match session seq {session.seq}"
            )

    def save_if_complete(session: Session) -> None:
        if session.state == "complete":
            store.save_session(session.metadata.use_case_id, session, config)

    async def read_body(request: Request) -> dict:
        try:
            body = await request.json()
        except Exception:
            raise BadRequest("request body must be JSON") from None
        if not isinstance(body, dict):
            raise BadRequest("request body must be a JSON object")
        return body

    # --- catalogs ---

    @app.get("/v1/catalogs")
    async def list_catalogs():
        return [catalog_summary(c) for _, c in sorted(catalogs.items())]

    @app.get("/v1/catalogs/{catalog_id}")
    async def get_catalog_detail(catalog_id: str):
        return catalog_detail(get_catalog(catalog_id))

    @app.get("/v1/catalogs/{catalog_id}/lint")
    async def get_catalog_lint(catalog_id: str):
        return lint_catalog(get_catalog(catalog_id)).to_json_dict()

    # --- sessions ---

    @app.post("/v1/sessions", status_code=201)
    async def create_session(request: Request):
        body = await read_body(request)
        catalog = get_catalog(body.get("catalog_id", next(iter(sorted(catalogs)))))
        metadata = SessionMetadata.from_json_dict(body.get("metadata") or {})
        # refuse up front if the target use case is bound to a different setup
        try:
            record = store.use_case(metadata.use_case_id)
        except UnknownUseCase:
            record = None
        selected = body.get("selected_blocks") or []
        if record is not None:
            ref = {"catalog_id": catalog.catalog_id, "version": catalog.version}
            if (
                record.catalog_ref != ref
                or list(record.selected_blocks) != list(selected)
                or record.config != config
            ):
                raise CatalogMismatch(
                    f"use case {metadata.use_case_id!r} is bound to "
                    f"{record.catalog_ref} over blocks {list(record.selected_blocks)}"
                )
        session = traversal.start_session(catalog, selected, metadata)
        registry.add(session)
        return {"session": session.to_json_dict(), "next": next_payload(session)}

    @app.get("/v1/sessions/{session_id}")
    async def get_session(session_id: str):
        session, _ = find_session(session_id)
        return session.to_json_dict()

    @app.get("/v1/sessions/{session_id}/next")
    async def get_next(session_id: str):
        session, _ = find_session(session_id)
        return next_payload(session)

    def resolve_block(session: Session, body: dict) -> str:
        # the indicator number alone is unambiguous within a single-block
        # session or against the current question; otherwise block_id is needed
        if body.get("block_id"):
            return body["block_id"]
        current = traversal.current_question(session)
        if current is not None:
            return current[0]
        if len(session.selected_blocks) == 1:
            return session.selected_blocks[0]
        raise BadRequest("block_id is required for multi-block sessions")

    @app.post("/v1/sessions/{session_id}/answers")
    async def post_answer(session_id: str, request: Request):
        body = await read_body(request)
        session, lock = registry.get(session_id)
        with lock:
            check_seq(session, body)
            value = parse_value(body)
            if not body.get("indicator"):
                raise BadRequest("indicator is required")
            key = (resolve_block(session, body), IndicatorId.parse(body["indicator"]))
            traversal.submit_answer(session, key, value, body.get("comment"))
            save_if_complete(session)
            return {"session": session.to_json_dict(), "next": next_payload(session)}

    @app.patch("/v1/sessions/{session_id}/answers/{indicator}")
    async def patch_answer(session_id: str, indicator: str, request: Request):
        body = await read_body(request)
        session, lock = registry.get(session_id)
        with lock:
            check_seq(session, body)
            value = parse_value(body)
            block_id = body.get("block_id") or (
                session.selected_blocks[0] if len(session.selected_blocks) == 1 else ""
            )
            if not block_id:
                raise BadRequest("block_id is required for multi-block sessions")
            traversal.revise_answer(
                session, (block_id, IndicatorId.parse(indicator)), value, body.get("comment")
            )
            save_if_complete(session)
            return {"session": session.to_json_dict(), "next": next_payload(session)}

    @app.get("/v1/sessions/{session_id}/score")
    async def get_score(session_id: str, mode: str = ""):
        session, _ = find_session(session_id)
        effective = config if not mode else ScoringConfig(
            baseline=config.baseline,
            mode=mode,
            block_floor=config.block_floor,
            block_ceiling=config.block_ceiling,
            erl_mapping=config.erl_mapping,
        )
        return score_session(session, effective).to_json_dict()

    # --- use cases ---

    @app.get("/v1/usecases/{use_case_id}/timeline")
    async def get_timeline(use_case_id: str):
        return store.timeline(use_case_id).to_json_dict()

    @app.get("/v1/compare")
    async def compare(request: Request):
        params = request.query_params
        if "from" not in params or "to" not in params:
            raise BadRequest("query needs from= and to= session ids")
        return store.diff_sessions(params["from"], params["to"]).to_json_dict()

    if ui_dir is not None:
        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app
