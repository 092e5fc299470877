"""HTTP facade over one loaded analysis file.

Analysis data is read-only after startup; the only mutable state is the
per-session filter stack, and each session's mutations are serialized by
its own lock. Every view response carries the analysis hash so a client can
detect that the file behind the service changed.
"""

from __future__ import annotations

import secrets
import threading
import time
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

from fastapi import Body, FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware

from . import analysis
from .aggregate import FilterTerm, ViewIndex
from .errors import UnknownErrorKind, UnknownVariant


@dataclass
class Session:
    session_id: str
    stack: Tuple[FilterTerm, ...] = ()
    created_at: float = field(default_factory=time.monotonic)
    last_access: float = field(default_factory=time.monotonic)
    lock: threading.Lock = field(default_factory=threading.Lock)


class SessionStore:
    def __init__(self, timeout_s: float):
        self.timeout_s = timeout_s
        self._sessions: Dict[str, Session] = {}
        self._lock = threading.Lock()

    def create(self) -> Session:
        session = Session(secrets.token_hex(16))
        with self._lock:
            self._sessions[session.session_id] = session
        return session

    def get(self, session_id: str) -> Session:
        now = time.monotonic()
        with self._lock:
            session = self._sessions.get(session_id)
            if session is None:
                raise HTTPException(status_code=404, detail="unknown session")
            if now - session.last_access > self.timeout_s:
                del self._sessions[session_id]
                raise HTTPException(status_code=404, detail="session expired")
            session.last_access = now
            return session


def create_app(
    analysis_path: str,
    session_timeout_s: Optional[float] = None,
    cors_origin: Optional[str] = None,
) -> FastAPI:
    doc, analysis_hash = analysis.load_document(analysis_path)
    index = analysis.index_from_document(doc)
    serve_cfg = doc["config"]["serve"]
    timeout = (
        session_timeout_s
        if session_timeout_s is not None
        else serve_cfg["session_timeout_s"]
    )
    origin = cors_origin if cors_origin is not None else serve_cfg["cors_origin"]
    sessions = SessionStore(timeout)

    app = FastAPI(
        title="flowlens", docs_url=None, redoc_url=None, openapi_url=None
    )
    app.add_middleware(
        CORSMiddleware,
        allow_origins=[origin] if origin else ["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    def view_payload(session: Session) -> dict:
        payload = index.build_view(session.stack).to_dict()
        payload["session_id"] = session.session_id
        payload["analysis_hash"] = analysis_hash
        return payload

    @app.post("/sessions")
    def create_session() -> dict:
        session = sessions.create()
        return {"session_id": session.session_id, "analysis_hash": analysis_hash}

    @app.get("/sessions/{session_id}/view")
    def get_view(session_id: str) -> dict:
        session = sessions.get(session_id)
        with session.lock:
            return view_payload(session)

    @app.post("/sessions/{session_id}/filters")
    def push_filter(session_id: str, body: dict = Body(...)) -> dict:
        session = sessions.get(session_id)
        if not isinstance(body, dict) or not isinstance(body.get("variant_id"), str):
            raise HTTPException(status_code=400, detail="variant_id required")
        error_kind = body.get("error_kind")
        if error_kind is not None and not isinstance(error_kind, str):
            raise HTTPException(status_code=400, detail="error_kind must be a string")
        unknown = set(body) - {"variant_id", "error_kind"}
        if unknown:
            raise HTTPException(
                status_code=400, detail=f"unknown key(s): {', '.join(sorted(unknown))}"
            )
        term = FilterTerm(body["variant_id"], error_kind)
        with session.lock:
            try:
                index.validate_term(term)
            except (UnknownVariant, UnknownErrorKind) as exc:
                raise HTTPException(status_code=404, detail=str(exc)) from exc
            session.stack = session.stack + (term,)
            return view_payload(session)

    @app.delete("/sessions/{session_id}/filters/last")
    def pop_filter(session_id: str) -> dict:
        session = sessions.get(session_id)
        with session.lock:
            if not session.stack:
                raise HTTPException(status_code=409, detail="filter stack is empty")
            session.stack = session.stack[:-1]
            return view_payload(session)

    @app.delete("/sessions/{session_id}/filters")
    def clear_filters(session_id: str) -> dict:
        session = sessions.get(session_id)
        with session.lock:
            session.stack = ()
            return view_payload(session)

    @app.get("/sessions/{session_id}/variants/{variant_id}/submissions")
    def variant_submissions(
        session_id: str,
        variant_id: str,
        error_kind: Optional[str] = None,
        page: int = 1,
    ) -> dict:
        session = sessions.get(session_id)
        if page < 1:
            raise HTTPException(status_code=400, detail="page must be >= 1")
        with session.lock:
            try:
                result = index.page_submissions(
                    session.stack, variant_id, error_kind, page
                )
            except (UnknownVariant, UnknownErrorKind) as exc:
                raise HTTPException(status_code=404, detail=str(exc)) from exc
            payload = result.to_dict()
            payload["analysis_hash"] = analysis_hash
            return payload

    @app.get("/healthz")
    def healthz() -> dict:
        return {
            "status": "ok",
            "corpus_size": len(index.submission_ids),
            "analysis_hash": analysis_hash,
        }

    return app
