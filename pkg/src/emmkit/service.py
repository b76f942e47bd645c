"""HTTP API for the web UI and other clients.

Single-operator tool: there is NO authentication and CORS is wide open,
so bind to localhost or put it behind something that authenticates.

State is in-memory plus a data directory.  Documents are written as
files; every session appends its events to a JSON-lines log, and on
startup all logs are replayed, so a restart restores every session
(bounds, counts, pending question) exactly.  Answer submissions carry the
sequence number of the question they answer; a stale sequence is rejected
with a conflict envelope, which serializes concurrent submissions to one
session without locking the client.

All errors share one envelope: {"category", "message", "details"} with
the same categories as the CLI exit codes.
"""

from __future__ import annotations

import json
import threading
import uuid
from pathlib import Path
from typing import Any

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel, ConfigDict

from . import persistence
from .aggregation import TableRule, disagreement_points
from .elicitation import ACTIVE, COMPLETE, CONFLICTED, Session, start_session
from .errors import EmmError, NotFoundError
from .hierarchy import ExpertModel, ModelSpecTree, resolve_model

STATUS_BY_CATEGORY = {
    "usage": 400,
    "validation": 422,
    "conflict": 409,
    "io": 404,
    "oracle": 502,
}


class SpecUpload(BaseModel):
    document: dict[str, Any]


class SessionCreate(BaseModel):
    spec_id: str
    node_id: str
    expert: str = "anonymous"
    strategy: str = "hansel"


class AnswerBody(BaseModel):
    value: int | str
    seq: int | None = None


class ResolveBody(BaseModel):
    strategy: str


class FinalizeBody(BaseModel):
    policy: str = "min"


class EvaluateBody(BaseModel):
    model_config = ConfigDict(protected_namespaces=())

    model_id: str
    answers: dict[str, Any]
    policy: str = "full"
    explain_depth: int | None = None


class EngineState:
    """Documents, models, sessions, and their on-disk mirrors."""

    def __init__(self, data_dir: str | Path):
        self.data_dir = Path(data_dir)
        (self.data_dir / "specs").mkdir(parents=True, exist_ok=True)
        (self.data_dir / "models").mkdir(parents=True, exist_ok=True)
        (self.data_dir / "sessions").mkdir(parents=True, exist_ok=True)
        self.specs: dict[str, ModelSpecTree] = {}
        self.spec_docs: dict[str, dict] = {}
        self.models: dict[str, ExpertModel] = {}
        self.sessions: dict[str, Session] = {}
        self.session_specs: dict[str, str] = {}
        self._locks: dict[str, threading.Lock] = {}
        self._flushed: dict[str, int] = {}  # events already on disk per session
        self._restore()

    # -- persistence --------------------------------------------------------

    def _restore(self) -> None:
        for path in sorted((self.data_dir / "specs").glob("*.json")):
            document = json.loads(path.read_text(encoding="utf-8"))
            self.spec_docs[path.stem] = document
            self.specs[path.stem] = persistence.load_spec(document)
        for path in sorted((self.data_dir / "models").glob("*.json")):
            self.models[path.stem] = persistence.load_model(path.read_bytes())
        for path in sorted((self.data_dir / "sessions").glob("*.jsonl")):
            records = persistence.read_session_log(path)
            session = persistence.replay_session(records)
            self.sessions[session.id] = session
            self._flushed[session.id] = len(session.events)
            meta = records[0].get("payload", {})
            if meta.get("spec_id"):
                self.session_specs[session.id] = meta["spec_id"]

    def _session_path(self, session_id: str) -> Path:
        return self.data_dir / "sessions" / f"{session_id}.jsonl"

    def flush_session(self, session: Session) -> None:
        done = self._flushed.get(session.id, 0)
        fresh = session.events[done:]
        if fresh:
            persistence.append_session_events(self._session_path(session.id), fresh)
            self._flushed[session.id] = len(session.events)

    # -- lookups ------------------------------------------------------------

    def lock_for(self, session_id: str) -> threading.Lock:
        return self._locks.setdefault(session_id, threading.Lock())

    def get_spec(self, spec_id: str) -> ModelSpecTree:
        if spec_id not in self.specs:
            raise NotFoundError(f"no spec with id {spec_id!r}")
        return self.specs[spec_id]

    def get_model(self, model_id: str) -> ExpertModel:
        if model_id not in self.models:
            raise NotFoundError(f"no model with id {model_id!r}")
        return self.models[model_id]

    def get_session(self, session_id: str) -> Session:
        if session_id not in self.sessions:
            raise NotFoundError(f"no session with id {session_id!r}")
        return self.sessions[session_id]

    def add_spec(self, document: dict) -> str:
        tree = persistence.load_spec(document)
        spec_id = f"s{uuid.uuid4().hex[:10]}"
        self.specs[spec_id] = tree
        self.spec_docs[spec_id] = document
        (self.data_dir / "specs" / f"{spec_id}.json").write_bytes(
            persistence.canonical_bytes(document)
        )
        return spec_id

    def add_model(self, model: ExpertModel, model_id: str | None = None) -> str:
        model_id = model_id or f"m{uuid.uuid4().hex[:10]}"
        self.models[model_id] = model
        (self.data_dir / "models" / f"{model_id}.json").write_bytes(persistence.save_model(model))
        return model_id


def _error_response(category: str, message: str, details: dict | None = None) -> JSONResponse:
    return JSONResponse(
        status_code=STATUS_BY_CATEGORY.get(category, 422),
        content={"category": category, "message": message, "details": details or {}},
    )


def _session_view(session: Session) -> dict[str, Any]:
    return {"session_id": session.id, "status": session.status, "counts": session.counts}


def _next_payload(state: EngineState, session: Session) -> dict[str, Any]:
    if session.status == COMPLETE or session.pending is None:
        return {"done": True, **_session_view(session)}
    node = None
    spec_id = state.session_specs.get(session.id)
    if spec_id and session.node_id:
        node = state.get_spec(spec_id).find(session.node_id)
    point = session.pending
    scenario = []
    for i, v in enumerate(point):
        child = node.children[i] if node else None
        scale = session.fn.lattice.dims[i]
        scenario.append(
            {
                "node": session.child_ids[i] if session.child_ids else f"factor-{i}",
                "prompt": child.prompt if child else f"factor {i}",
                "value": v,
                "label": scale.label(v),
            }
        )
    return {
        "done": False,
        "seq": session.asked,
        "point": list(point),
        "prompt": node.prompt if node else "",
        "scenario": scenario,
        "out_scale": list(session.fn.out_scale.labels),
        **_session_view(session),
    }


def create_app(data_dir: str | Path = "emmkit-data") -> FastAPI:
    state = EngineState(data_dir)
    app = FastAPI(title="emmkit", version="0.1.0")
    app.state.engine = state
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )

    @app.exception_handler(EmmError)
    async def _emm_error(request: Request, exc: EmmError):
        details = {}
        if hasattr(exc, "conflicting"):
            details = {
                "point": list(getattr(exc, "point", ())),
                "value": getattr(exc, "value", None),
                "conflicting": [
                    {"seq": a.seq, "point": list(a.point), "value": a.value}
                    for a in exc.conflicting
                ],
            }
        return _error_response(exc.category, str(exc), details)

    @app.exception_handler(RequestValidationError)
    async def _body_error(request: Request, exc: RequestValidationError):
        return _error_response("usage", "malformed request body", {"errors": exc.errors()})

    # -- specs ---------------------------------------------------------------

    @app.post("/api/specs")
    def upload_spec(body: SpecUpload):
        spec_id = state.add_spec(body.document)
        tree = state.get_spec(spec_id)
        return {"id": spec_id, "title": tree.title or tree.root.prompt, "nodes": len(tree.nodes())}

    @app.get("/api/specs")
    def list_specs():
        return [
            {"id": spec_id, "title": tree.title or tree.root.prompt, "nodes": len(tree.nodes())}
            for spec_id, tree in state.specs.items()
        ]

    @app.get("/api/specs/{spec_id}")
    def get_spec(spec_id: str):
        state.get_spec(spec_id)
        return state.spec_docs[spec_id]

    # -- models ----------------------------------------------------------------

    @app.post("/api/models")
    def upload_model(body: SpecUpload):
        model = persistence.load_model(body.document)
        model_id = state.add_model(model)
        return {"id": model_id, "expert": model.expert, "nodes": len(model.tree.nodes())}

    @app.get("/api/models")
    def list_models():
        return [
            {"id": model_id, "expert": model.expert, "title": model.tree.title or model.tree.root.prompt}
            for model_id, model in state.models.items()
        ]

    @app.get("/api/models/{model_id}")
    def get_model(model_id: str):
        model = state.get_model(model_id)
        return json.loads(persistence.save_model(model))

    # -- sessions ----------------------------------------------------------------

    @app.post("/api/sessions")
    def create_session(body: SessionCreate):
        tree = state.get_spec(body.spec_id)
        node = tree.find(body.node_id)
        session = start_session(node, strategy=body.strategy, expert=body.expert)
        session.events[0]["payload"]["spec_id"] = body.spec_id
        state.sessions[session.id] = session
        state.session_specs[session.id] = body.spec_id
        state.flush_session(session)
        return _next_payload(state, session)

    @app.get("/api/sessions/{session_id}/next")
    def next_question(session_id: str):
        session = state.get_session(session_id)
        if session.status == CONFLICTED:
            conflict = session.conflict
            return _error_response(
                "conflict",
                "session is parked on a conflicting answer; resolve it first",
                {
                    "point": list(conflict.point),
                    "value": conflict.value,
                    "conflicting": conflict.conflicting,
                },
            )
        return _next_payload(state, session)

    @app.post("/api/sessions/{session_id}/answer")
    def answer(session_id: str, body: AnswerBody):
        session = state.get_session(session_id)
        with state.lock_for(session_id):
            if session.status != ACTIVE:
                return _error_response(
                    "conflict",
                    f"session is {session.status}; no question is open",
                    {"reason": "complete" if session.status == COMPLETE else session.status},
                )
            if body.seq is not None and body.seq != session.asked:
                return _error_response(
                    "conflict",
                    f"stale answer: question seq is {session.asked}, submission says {body.seq}",
                    {"reason": "stale", "expected_seq": session.asked},
                )
            value = session.fn.out_scale.index_of(body.value)
            before = session.counts
            session.step(value)
            state.flush_session(session)
            if session.status == CONFLICTED:
                conflict = session.conflict
                return _error_response(
                    "conflict",
                    "answer contradicts earlier answers",
                    {
                        "reason": "contradiction",
                        "point": list(conflict.point),
                        "value": conflict.value,
                        "conflicting": conflict.conflicting,
                    },
                )
            after = session.counts
            return {
                "applied": True,
                "inferred_jump": after["inferred"] - before["inferred"],
                **_next_payload(state, session),
            }

    @app.post("/api/sessions/{session_id}/resolve")
    def resolve(session_id: str, body: ResolveBody):
        session = state.get_session(session_id)
        with state.lock_for(session_id):
            session.resolve_conflict(body.strategy)
            state.flush_session(session)
            return _next_payload(state, session)

    @app.post("/api/sessions/{session_id}/finalize")
    def finalize(session_id: str, body: FinalizeBody):
        session = state.get_session(session_id)
        with state.lock_for(session_id):
            table = session.finalize(body.policy)
            state.flush_session(session)
            model_id = None
            spec_id = state.session_specs.get(session.id)
            if spec_id and session.node_id:
                tree = persistence.load_spec(state.spec_docs[spec_id])
                tree.find(session.node_id).aggregation = TableRule(table)
                if not tree.unresolved():
                    model_id = state.add_model(resolve_model(tree, expert=session.expert))
            return {
                "session_id": session.id,
                "policy": table.policy,
                "values": table.fn.values(),
                "out_scale": list(table.fn.out_scale.labels),
                "model_id": model_id,
                "counts": session.counts,
            }

    # -- evaluation and views ---------------------------------------------------------

    @app.post("/api/evaluate")
    def evaluate(body: EvaluateBody):
        model = state.get_model(body.model_id)
        value, trace = model.evaluate(body.answers, policy=body.policy)
        if body.explain_depth is not None:
            trace = trace.truncated(body.explain_depth)
        return {"value": value, "label": trace.root.label, "trace": trace.to_dict()}

    @app.get("/api/models/{model_id}/chains/{node_id}")
    def chains(model_id: str, node_id: str):
        model = state.get_model(model_id)
        return persistence.export_chain_layout(model, node_id)

    @app.get("/api/models/{model_a}/diff/{model_b}/{node_id}")
    def diff(model_a: str, model_b: str, node_id: str):
        a = state.get_model(model_a)
        b = state.get_model(model_b)
        points = disagreement_points(a, b, node_id)
        return {"node": node_id, "points": [list(p) for p in points]}

    return app
