"""Durable machine-teaching log store.

Persistence is append-only JSONL segments (one per day) under a data
directory; an in-memory index is rebuilt by replaying the segments on
start.  Every event is flushed and fsynced before the call returns, so an
acknowledged turn survives a process kill.
"""
from __future__ import annotations

import datetime as dt
import json
import os
import threading
import uuid
from dataclasses import dataclass, field
from pathlib import Path

from ..acts import BeliefState
from ..corpus import DialogSession, SessionTurn
from ..errors import DanglingReference, SessionEnded, StaleTurn, UnknownSession
from ..hashing import fnv1a64
from ..runtime import (
    CorrectionRecord,
    Prediction,
    TurnRecord,
    lexicalize,
    parse_agent_utterance,
    parse_user_utterance,
)


def _now() -> str:
    return dt.datetime.now(dt.timezone.utc).isoformat()


@dataclass
class LoggedTurn:
    index: int
    user_utterance: str
    prediction: Prediction
    agent_utterance_lex: str
    discrepancy_flags: list[str] = field(default_factory=list)
    error: str | None = None


@dataclass
class SessionLog:
    id: str
    domain_name: str
    started_at: str
    ended_at: str | None = None
    turns: list[LoggedTurn] = field(default_factory=list)
    flags: set[str] = field(default_factory=set)

    @property
    def active(self) -> bool:
        return self.ended_at is None

    def summary(self) -> dict:
        return {
            "id": self.id,
            "domain": self.domain_name,
            "started_at": self.started_at,
            "ended_at": self.ended_at,
            "turns": len(self.turns),
            "flags": sorted(self.flags),
            "active": self.active,
        }


def correction_content_hash(rec: CorrectionRecord) -> str:
    payload = json.dumps(
        [rec.session_id, rec.turn_index, rec.corrected_belief,
         rec.corrected_response_delex],
        sort_keys=True,
    )
    return f"{fnv1a64(payload.encode()):016x}"


class LogStore:
    """Single-writer append log with concurrent readers."""

    def __init__(self, data_dir):
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()
        self.sessions: dict[str, SessionLog] = {}
        self.corrections: list[CorrectionRecord] = []
        self._correction_hashes: set[str] = set()
        self._replay()

    # -- persistence ---------------------------------------------------

    def _segment_path(self) -> Path:
        day = dt.datetime.now(dt.timezone.utc).strftime("%Y%m%d")
        return self.data_dir / f"log-{day}.jsonl"

    def _append(self, event: dict):
        line = json.dumps(event, sort_keys=True, ensure_ascii=False)
        with open(self._segment_path(), "a", encoding="utf-8") as fh:
            fh.write(line + "\n")
            fh.flush()
            os.fsync(fh.fileno())

    def _replay(self):
        for path in sorted(self.data_dir.glob("log-*.jsonl")):
            with open(path, encoding="utf-8") as fh:
                for line in fh:
                    line = line.strip()
                    if line:
                        self._apply(json.loads(line))

    def _apply(self, event: dict):
        kind = event["type"]
        if kind == "session_started":
            self.sessions[event["id"]] = SessionLog(
                event["id"], event["domain"], event["ts"]
            )
        elif kind == "turn":
            log = self.sessions[event["session_id"]]
            pred = event["prediction"]
            log.turns.append(LoggedTurn(
                index=event["index"],
                user_utterance=event["user_utterance"],
                prediction=Prediction(
                    BeliefState(log.domain_name, dict(pred["belief"])),
                    pred["db_bucket"],
                    pred["response_delex"],
                ),
                agent_utterance_lex=event["agent_utterance_lex"],
                discrepancy_flags=list(event.get("flags", [])),
                error=event.get("error"),
            ))
        elif kind == "session_ended":
            self.sessions[event["id"]].ended_at = event["ts"]
        elif kind == "flags_set":
            self.sessions[event["id"]].flags = set(event["flags"])
        elif kind == "correction":
            rec = CorrectionRecord(
                session_id=event["session_id"],
                turn_index=event["turn_index"],
                corrected_belief=event.get("corrected_belief"),
                corrected_response_delex=event.get("corrected_response_delex"),
                author=event.get("author", ""),
                created_at=event["ts"],
            )
            h = correction_content_hash(rec)
            if h not in self._correction_hashes:
                self._correction_hashes.add(h)
                self.corrections.append(rec)
                self.sessions[rec.session_id].flags.add("reviewed")

    # -- session lifecycle ---------------------------------------------

    def start_session(self, domain: str) -> str:
        with self._lock:
            session_id = uuid.uuid4().hex[:12]
            self._append({"type": "session_started", "id": session_id,
                          "domain": domain, "ts": _now()})
            self.sessions[session_id] = SessionLog(session_id, domain, _now())
            return session_id

    def _active(self, session_id: str) -> SessionLog:
        log = self.sessions.get(session_id)
        if log is None:
            raise UnknownSession(session_id)
        if not log.active:
            raise SessionEnded(session_id)
        return log

    def append_turn(self, session_id: str, record: TurnRecord,
                    error: str | None = None) -> LoggedTurn:
        with self._lock:
            log = self._active(session_id)
            turn = LoggedTurn(
                index=len(log.turns),
                user_utterance=record.user_utterance,
                prediction=record.prediction,
                agent_utterance_lex=record.agent_utterance_lex,
                discrepancy_flags=list(record.discrepancy_flags),
                error=error,
            )
            self._append({
                "type": "turn",
                "session_id": session_id,
                "index": turn.index,
                "user_utterance": turn.user_utterance,
                "prediction": {
                    "belief": dict(record.prediction.belief.slot_values),
                    "db_bucket": record.prediction.db_bucket,
                    "response_delex": record.prediction.response_delex,
                },
                "agent_utterance_lex": turn.agent_utterance_lex,
                "flags": turn.discrepancy_flags,
                "error": error,
                "ts": _now(),
            })
            log.turns.append(turn)
            if "lexicalization_gap" in turn.discrepancy_flags:
                log.flags.add("failed")
            return turn

    def end_session(self, session_id: str):
        with self._lock:
            log = self._active(session_id)
            ts = _now()
            self._append({"type": "session_ended", "id": session_id, "ts": ts})
            log.ended_at = ts

    def set_flags(self, session_id: str, flags: list[str]):
        with self._lock:
            log = self.sessions.get(session_id)
            if log is None:
                raise UnknownSession(session_id)
            self._append({"type": "flags_set", "id": session_id,
                          "flags": sorted(flags), "ts": _now()})
            log.flags = set(flags)

    # -- browsing ------------------------------------------------------

    def list_logs(self, flagged_only: bool = False, domain: str | None = None,
                  since: str | None = None, until: str | None = None,
                  page: int = 1, page_size: int = 20) -> dict:
        logs = [
            log for log in self.sessions.values()
            if (not flagged_only or "failed" in log.flags)
            and (domain is None or log.domain_name == domain)
            and (since is None or log.started_at >= since)
            and (until is None or log.started_at <= until)
        ]
        logs.sort(key=lambda l: (l.started_at, l.id), reverse=True)
        pages = max(1, -(-len(logs) // page_size))
        start = (page - 1) * page_size
        return {
            "logs": [l.summary() for l in logs[start:start + page_size]],
            "page": page,
            "pages": pages,
            "total": len(logs),
        }

    # -- corrections ---------------------------------------------------

    def submit_correction(self, rec: CorrectionRecord) -> bool:
        """Persist a correction; returns False when deduplicated."""
        with self._lock:
            log = self.sessions.get(rec.session_id)
            if log is None:
                raise DanglingReference(f"unknown session {rec.session_id!r}")
            if not 0 <= rec.turn_index < len(log.turns):
                raise StaleTurn(f"turn {rec.turn_index} out of range")
            h = correction_content_hash(rec)
            if h in self._correction_hashes:
                return False
            if not rec.created_at:
                rec.created_at = _now()
            self._append({
                "type": "correction",
                "session_id": rec.session_id,
                "turn_index": rec.turn_index,
                "corrected_belief": rec.corrected_belief,
                "corrected_response_delex": rec.corrected_response_delex,
                "author": rec.author,
                "ts": rec.created_at,
            })
            self._correction_hashes.add(h)
            self.corrections.append(rec)
            log.flags.add("reviewed")
            return True

    def export_teaching_corpus(self, schema, since: str | None = None,
                               flagged_only: bool = False) -> list[DialogSession]:
        """Materialize corrected sessions; pure (store unchanged)."""
        by_session: dict[str, dict[int, CorrectionRecord]] = {}
        for rec in self.corrections:
            if since is not None and rec.created_at < since:
                continue
            by_session.setdefault(rec.session_id, {})[rec.turn_index] = rec
        sessions = []
        for session_id in sorted(by_session):
            log = self.sessions[session_id]
            if flagged_only and "failed" not in log.flags:
                continue
            sessions.append(self._materialize(log, by_session[session_id], schema))
        return sessions

    def _materialize(self, log: SessionLog,
                     corrections: dict[int, CorrectionRecord], schema) -> DialogSession:
        turns = []
        for turn in log.turns:
            rec = corrections.get(turn.index)
            belief_map = dict(turn.prediction.belief.slot_values)
            response_delex = turn.prediction.response_delex
            response_lex = turn.agent_utterance_lex
            if rec is not None:
                if rec.corrected_belief is not None:
                    belief_map = dict(rec.corrected_belief)
                if rec.corrected_response_delex is not None:
                    response_delex = rec.corrected_response_delex
                belief = BeliefState(log.domain_name, belief_map)
                response_lex, _ = lexicalize(response_delex, belief, schema)
            belief = BeliefState(log.domain_name, belief_map)
            from ..schema import db_state, query

            bucket = db_state(len(query(schema.database, belief.slot_values)))
            turns.append(SessionTurn(
                user_utterance=turn.user_utterance,
                user_act=parse_user_utterance(turn.user_utterance, schema),
                belief=belief,
                db_bucket=bucket,
                agent_act=parse_agent_utterance(response_lex, schema),
                response_delex=response_delex,
                response_lex=response_lex,
            ))
        return DialogSession(
            id=f"corrected-{log.id}",
            domain_name=log.domain_name,
            goal=None,
            turns=turns,
            outcome="success",
            provenance="corrected",
            derived_from=log.id,
        )
