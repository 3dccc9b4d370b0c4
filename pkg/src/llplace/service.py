"""HTTP design service hosting interactive sessions.

Sessions live in memory with a TTL; turns on one session are serialized by
a per-session lock (concurrent requests queue). Failed turns return 422
with the raw backend text for debugging; transport failures map to 502.
"""

from __future__ import annotations

import threading
import time
import uuid
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal

from fastapi import FastAPI, HTTPException, Response
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel, Field

from .catalog import DesignRequest, RequestItem, load_catalog_file
from .errors import (
    BackendError,
    EditFailed,
    GenerationFailed,
    PlacementInfeasible,
    RetrievalError,
    UnknownTarget,
)
from .geometry import RoomBounds, layout_to_dict, validate_layout
from .metrics import evaluate_layout
from .prompts import EditKind, EditRequest, PromptTemplates, default_templates
from .session import (
    BackendConfig,
    Phase,
    Session,
    build_backend,
    create_session,
    default_bounds_for,
)
from .session import run_edit as session_run_edit
from .session import run_generation as session_run_generation
from .svg import RenderStyle, render_layout


@dataclass
class ServiceConfig:
    catalog_path: Path
    templates_path: Path | None = None
    backend: BackendConfig = field(default_factory=BackendConfig)
    session_ttl: float = 3600.0
    default_bounds: dict[str, RoomBounds] = field(default_factory=dict)


class ItemIn(BaseModel):
    quantity: int = Field(default=1, ge=1)
    description: str = Field(min_length=1)


class BoundsIn(BaseModel):
    half_x: float = Field(gt=0)
    half_z: float = Field(gt=0)
    height: float = Field(gt=0)


class SessionIn(BaseModel):
    room_type: str = Field(min_length=1)
    items: list[ItemIn] = Field(min_length=1)
    bounds: BoundsIn | None = None


class EditIn(BaseModel):
    kind: Literal["add", "remove"]
    items: list[ItemIn | str] = Field(min_length=1)


@dataclass
class _Entry:
    session: Session
    lock: threading.Lock = field(default_factory=threading.Lock)
    last_used: float = field(default_factory=time.monotonic)


def make_app(config: ServiceConfig, backend_factory=None) -> FastAPI:
    catalog = load_catalog_file(config.catalog_path)
    templates: PromptTemplates = (
        PromptTemplates.load(config.templates_path)
        if config.templates_path
        else default_templates()
    )
    if backend_factory is None:
        backend_factory = lambda bounds: build_backend(config.backend, bounds)

    app = FastAPI(title="llplace design service")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    entries: dict[str, _Entry] = {}
    store_lock = threading.Lock()

    def _sweep(now: float) -> None:
        expired = [sid for sid, e in entries.items() if now - e.last_used > config.session_ttl]
        for sid in expired:
            entries.pop(sid, None)

    def _entry(session_id: str) -> _Entry:
        now = time.monotonic()
        with store_lock:
            _sweep(now)
            entry = entries.get(session_id)
            if entry is None:
                raise HTTPException(status_code=404, detail="unknown or expired session")
            entry.last_used = now
            return entry

    def _bounds_for(body: SessionIn) -> RoomBounds:
        if body.bounds is not None:
            return RoomBounds(body.bounds.half_x, body.bounds.half_z, body.bounds.height)
        preset = config.default_bounds.get(body.room_type.lower())
        return preset or default_bounds_for(body.room_type)

    def _session_view(session_id: str, session: Session) -> dict:
        return {
            "id": session_id,
            "phase": session.phase.value,
            "room_type": session.request.room_type,
            "instances": session.instance_names,
            "object_count": len(session.layout.objects) if session.layout else 0,
        }

    def _require_layout(entry: _Entry):
        if entry.session.layout is None:
            raise HTTPException(status_code=409, detail="layout not generated yet")
        return entry.session.layout

    @app.get("/healthz")
    def healthz():
        return {"status": "ok"}

    @app.post("/sessions")
    def create(body: SessionIn):
        bounds = _bounds_for(body)
        request = DesignRequest(
            room_type=body.room_type,
            items=tuple(RequestItem(i.quantity, i.description) for i in body.items),
        )
        try:
            session = create_session(
                request, catalog, backend_factory(bounds), bounds, templates,
                max_history_chars=config.backend.max_history_chars,
            )
        except RetrievalError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        session_id = uuid.uuid4().hex
        with store_lock:
            _sweep(time.monotonic())
            entries[session_id] = _Entry(session)
        return _session_view(session_id, session)

    @app.post("/sessions/{session_id}/generate")
    def generate(session_id: str):
        entry = _entry(session_id)
        with entry.lock:
            if entry.session.phase is not Phase.CREATED:
                raise HTTPException(status_code=409, detail="layout already generated")
            try:
                layout = session_run_generation(entry.session)
            except BackendError as exc:
                raise HTTPException(status_code=502, detail=str(exc))
            except GenerationFailed as exc:
                raise HTTPException(
                    status_code=422,
                    detail={"error": "generation_failed", "message": str(exc), "raw": exc.raw},
                )
            except PlacementInfeasible as exc:
                raise HTTPException(status_code=422, detail=str(exc))
        return layout_to_dict(layout)

    @app.post("/sessions/{session_id}/edit")
    def edit(session_id: str, body: EditIn):
        entry = _entry(session_id)
        with entry.lock:
            if entry.session.phase not in (Phase.GENERATED, Phase.EDITED):
                raise HTTPException(status_code=409, detail="edit requires a generated layout")
            items = tuple(
                RequestItem(1, i) if isinstance(i, str) else RequestItem(i.quantity, i.description)
                for i in body.items
            )
            edit_request = EditRequest(EditKind(body.kind), items)
            try:
                layout = session_run_edit(entry.session, edit_request, catalog)
            except RetrievalError as exc:
                raise HTTPException(status_code=422, detail=str(exc))
            except UnknownTarget as exc:
                raise HTTPException(status_code=422, detail=str(exc))
            except BackendError as exc:
                raise HTTPException(status_code=502, detail=str(exc))
            except EditFailed as exc:
                raise HTTPException(
                    status_code=422,
                    detail={"error": "edit_failed", "message": str(exc), "raw": exc.raw},
                )
            except PlacementInfeasible as exc:
                raise HTTPException(status_code=422, detail=str(exc))
        return layout_to_dict(layout)

    @app.get("/sessions/{session_id}")
    def view(session_id: str):
        entry = _entry(session_id)
        return _session_view(session_id, entry.session)

    @app.get("/sessions/{session_id}/layout")
    def layout(session_id: str):
        entry = _entry(session_id)
        return layout_to_dict(_require_layout(entry))

    @app.get("/sessions/{session_id}/metrics")
    def metrics(session_id: str):
        entry = _entry(session_id)
        report = evaluate_layout(_require_layout(entry))
        payload = report.to_dict()
        payload["validation_violations"] = validate_layout(entry.session.layout).total_violations
        return payload

    @app.get("/sessions/{session_id}/render.svg")
    def render(session_id: str):
        entry = _entry(session_id)
        document = render_layout(_require_layout(entry), RenderStyle())
        return Response(content=document, media_type="image/svg+xml")

    return app
