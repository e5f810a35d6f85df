"""HTTP machine-teaching service: converse with the hosted model, browse
and flag logs, submit corrections, export, and retrain."""
from __future__ import annotations

import json
import os
from dataclasses import dataclass
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse, PlainTextResponse
from fastapi.staticfiles import StaticFiles

from .. import evalkit
from ..corpus import export_jsonl, session_to_json, to_training_sequences
from ..errors import (
    DanglingReference,
    EmptyCorpus,
    SessionEnded,
    StaleTurn,
    TaskbotError,
    UnknownSession,
)
from ..nlg import load_templates
from ..runtime import (
    ConversationState,
    CorrectionRecord,
    ExemplarStore,
    ExternalModel,
    ReferenceModel,
    converse_turn,
)
from ..schema import parse_schema
from .store import LogStore

ENV_PREFIX = "SYNERGY_"


@dataclass
class ServiceConfig:
    schema_path: str
    data_dir: str
    templates_path: str | None = None
    model_endpoint: str | None = None
    auth_token: str | None = None
    host: str = "127.0.0.1"
    port: int = 8080
    handoff_dir: str | None = None
    ui_dir: str | None = None

    @classmethod
    def load(cls, config_path: str | None = None, **overrides) -> "ServiceConfig":
        """Config file values, overridden by SYNERGY_* env, then kwargs."""
        values: dict = {}
        if config_path:
            values.update(json.loads(Path(config_path).read_text(encoding="utf-8")))
        env_map = {
            "schema_path": "SCHEMA", "data_dir": "DATA_DIR",
            "templates_path": "TEMPLATES", "model_endpoint": "MODEL_ENDPOINT",
            "auth_token": "TOKEN", "host": "HOST", "port": "PORT",
            "handoff_dir": "HANDOFF_DIR", "ui_dir": "UI_DIR",
        }
        for field_name, suffix in env_map.items():
            env = os.environ.get(ENV_PREFIX + suffix)
            if env is not None:
                values[field_name] = int(env) if field_name == "port" else env
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)


_ERROR_STATUS = {
    UnknownSession: 404,
    DanglingReference: 404,
    SessionEnded: 409,
    StaleTurn: 422,
    EmptyCorpus: 422,
}


def _error(status: int, code: str, message: str) -> JSONResponse:
    return JSONResponse({"error": {"code": code, "message": message}},
                        status_code=status)


def create_app(config: ServiceConfig) -> FastAPI:
    schema = parse_schema(Path(config.schema_path).read_text(encoding="utf-8"))
    templates = None
    if config.templates_path:
        templates = load_templates(Path(config.templates_path).read_text(encoding="utf-8"))
    store = LogStore(config.data_dir)
    exemplar_path = Path(config.data_dir) / "exemplars.json"
    exemplars = ExemplarStore()
    if exemplar_path.exists():
        exemplars = ExemplarStore.from_json(
            json.loads(exemplar_path.read_text(encoding="utf-8")))

    app = FastAPI(title="machine teaching service")
    state = app.state
    state.schema = schema
    state.templates = templates
    state.store = store
    state.exemplars = exemplars
    state.config = config
    state.live: dict[str, ConversationState] = {}
    state.metrics_cache = None

    def model():
        if config.model_endpoint:
            return ExternalModel(config.model_endpoint, schema)
        return ReferenceModel(schema, state.exemplars, templates)

    def save_exemplars():
        exemplar_path.write_text(json.dumps(state.exemplars.to_json(), indent=2),
                                 encoding="utf-8")

    @app.middleware("http")
    async def auth(request: Request, call_next):
        token = config.auth_token
        if token and request.url.path.startswith("/api/"):
            header = request.headers.get("authorization", "")
            if header != f"Bearer {token}":
                return _error(401, "unauthorized", "missing or invalid bearer token")
        return await call_next(request)

    @app.exception_handler(TaskbotError)
    async def on_error(request: Request, exc: TaskbotError):
        status = _ERROR_STATUS.get(type(exc), 400)
        return _error(status, type(exc).__name__, str(exc))

    # -- conversation ------------------------------------------------------

    @app.post("/api/sessions")
    async def start_session(body: dict | None = None):
        domain = (body or {}).get("domain", schema.domain_name)
        session_id = store.start_session(domain)
        state.live[session_id] = ConversationState(schema)
        return {"session_id": session_id, "domain": domain}

    def conversation(session_id: str) -> ConversationState:
        conv = state.live.get(session_id)
        if conv is None:
            # rebuild from the durable log after a restart
            log = store.sessions.get(session_id)
            if log is None:
                raise UnknownSession(session_id)
            conv = ConversationState(schema)
            for turn in log.turns:
                conv.history += [turn.user_utterance, turn.agent_utterance_lex]
            state.live[session_id] = conv
        return conv

    @app.post("/api/sessions/{session_id}/turns")
    async def post_turn(session_id: str, body: dict):
        utterance = body.get("user_utterance", "")
        if not utterance:
            return _error(422, "bad_request", "user_utterance is required")
        log = store.sessions.get(session_id)
        if log is None:
            raise UnknownSession(session_id)
        if not log.active:
            raise SessionEnded(session_id)
        conv = conversation(session_id)
        try:
            record = converse_turn(conv, utterance, model())
        except TaskbotError as exc:
            from ..runtime import Prediction, TurnRecord
            from ..acts import BeliefState

            record = TurnRecord(utterance,
                                Prediction(BeliefState(schema.domain_name), "none", ""),
                                "", ["error"])
            store.append_turn(session_id, record, error=str(exc))
            raise
        turn = store.append_turn(session_id, record)
        return {
            "index": turn.index,
            "user_utterance": turn.user_utterance,
            "agent_utterance": turn.agent_utterance_lex,
            "prediction": {
                "belief": dict(record.prediction.belief.slot_values),
                "db_bucket": record.prediction.db_bucket,
                "response_delex": record.prediction.response_delex,
            },
            "discrepancy_flags": turn.discrepancy_flags,
        }

    @app.post("/api/sessions/{session_id}/end")
    async def end_session(session_id: str):
        store.end_session(session_id)
        state.live.pop(session_id, None)
        return {"session_id": session_id, "active": False}

    # -- logs --------------------------------------------------------------

    @app.get("/api/logs")
    async def list_logs(flagged: bool = False, domain: str | None = None,
                        since: str | None = None, until: str | None = None,
                        page: int = 1, page_size: int = 20):
        return store.list_logs(flagged_only=flagged, domain=domain,
                               since=since, until=until,
                               page=page, page_size=page_size)

    @app.get("/api/logs/{session_id}")
    async def get_log(session_id: str):
        log = store.sessions.get(session_id)
        if log is None:
            raise UnknownSession(session_id)
        return {
            **log.summary(),
            "turns": [
                {
                    "index": t.index,
                    "user_utterance": t.user_utterance,
                    "agent_utterance": t.agent_utterance_lex,
                    "prediction": {
                        "belief": dict(t.prediction.belief.slot_values),
                        "db_bucket": t.prediction.db_bucket,
                        "response_delex": t.prediction.response_delex,
                    },
                    "discrepancy_flags": t.discrepancy_flags,
                    "error": t.error,
                }
                for t in log.turns
            ],
        }

    @app.put("/api/logs/{session_id}/flags")
    async def set_flags(session_id: str, body: dict):
        flags = body.get("flags")
        if not isinstance(flags, list):
            return _error(422, "bad_request", "flags must be a list")
        store.set_flags(session_id, flags)
        return {"id": session_id, "flags": sorted(store.sessions[session_id].flags)}

    # -- corrections / teaching -------------------------------------------

    @app.post("/api/corrections")
    async def submit_correction(body: dict):
        try:
            rec = CorrectionRecord(
                session_id=body["session_id"],
                turn_index=int(body["turn_index"]),
                corrected_belief=body.get("corrected_belief"),
                corrected_response_delex=body.get("corrected_response_delex"),
                author=body.get("author", ""),
            )
        except (KeyError, ValueError) as exc:
            return _error(422, "bad_request", str(exc))
        fresh = store.submit_correction(rec)
        return {"accepted": True, "deduplicated": not fresh}

    @app.get("/api/export")
    async def export(since: str | None = None):
        sessions = store.export_teaching_corpus(schema, since=since)
        lines = [json.dumps({"format_version": 1, "domain": schema.domain_name,
                             "sessions": len(sessions)}, sort_keys=True)]
        lines += [json.dumps(session_to_json(s), sort_keys=True, ensure_ascii=False)
                  for s in sessions]
        return PlainTextResponse("\n".join(lines) + "\n",
                                 media_type="application/jsonl")

    @app.post("/api/retrain")
    async def retrain():
        sessions = store.export_teaching_corpus(schema)
        if not sessions:
            raise EmptyCorpus("no corrected sessions to retrain on")
        if config.model_endpoint:
            handoff = Path(config.handoff_dir or Path(config.data_dir) / "handoff")
            handoff.mkdir(parents=True, exist_ok=True)
            corpus_path = handoff / "teaching_corpus.jsonl"
            export_jsonl(sessions, corpus_path, domain=schema.domain_name)
            seq_path = handoff / "teaching_sequences.txt"
            with open(seq_path, "w", encoding="utf-8") as fh:
                for s in sessions:
                    for seq in to_training_sequences(s):
                        fh.write(seq.text + "\n")
            ticket = {"ticket": "retrain", "sessions": len(sessions),
                      "corpus": str(corpus_path), "sequences": str(seq_path)}
            (handoff / "ticket.json").write_text(json.dumps(ticket, indent=2))
            return {"mode": "handoff", **ticket}
        from ..runtime import apply_corrections

        state.exemplars = apply_corrections(
            state.exemplars, store.corrections, store.sessions
        )
        save_exemplars()
        state.metrics_cache = None
        return {"mode": "exemplars", "applied": len(store.corrections),
                "store_size": len(state.exemplars)}

    # -- metrics / schema --------------------------------------------------

    @app.get("/api/metrics")
    async def metrics(n_goals: int = 20, seed: int = 0):
        if state.metrics_cache is None:
            result = evalkit.selfplay_eval(model(), schema, n_goals, seed)
            state.metrics_cache = {
                "success_rate": result.success_rate,
                "avg_turns_successful": result.avg_turns_successful,
                "jga": result.jga,
                "n_goals": n_goals,
            }
        return state.metrics_cache

    @app.get("/api/schema")
    async def schema_summary():
        return {
            "domain": schema.domain_name,
            "slots": [
                {"name": sd.name, "informable": sd.informable,
                 "requestable": sd.requestable, "type": sd.value_type}
                for sd in schema.slot_defs
            ],
            "primary_key": schema.database.primary_key,
            "blocks": [{"id": b.id, "kind": b.kind, "slots": list(b.slots)}
                       for b in schema.flow.blocks],
            "values": {
                slot: sorted({r[slot] for r in schema.database.records})[:50]
                for slot in schema.informable_slots
            },
        }

    if config.ui_dir and Path(config.ui_dir).is_dir():
        app.mount("/", StaticFiles(directory=config.ui_dir, html=True), name="ui")

    return app
