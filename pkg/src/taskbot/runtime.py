"""Model hosting: the schema-grounded reference model with an exemplar store
(the machine-teaching target), an HTTP adapter for external neural models,
and the conversation loop shared by the service and the evaluators.

A model is anything with ``predict(history) -> Prediction`` where history is
the flat tuple of alternating utterances, user first, ending on a user turn.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Protocol

import httpx

from .acts import AGENT, USER, BeliefState, DialogAct, norm_value
from .errors import (
    DanglingReference,
    MalformedReply,
    ModelTimeout,
    NoSchemaLoaded,
    SchemaViolation,
    StaleTurn,
    TransportError,
)
from .nlg import TemplateStore, realize
from .schema import TaskSchema, db_state, query
from .simkit import AgentState, agent_step, init_agent

_WS_RE = re.compile(r"\s+")


def context_key(history: tuple[str, ...]) -> str:
    """Canonical exemplar key: case-folded, whitespace-collapsed history."""
    return " | ".join(_WS_RE.sub(" ", h.strip()).casefold() for h in history)


@dataclass(frozen=True)
class Prediction:
    belief: BeliefState
    db_bucket: str
    response_delex: str


@dataclass(frozen=True)
class Exemplar:
    belief: dict[str, str]
    response_delex: str
    provenance: str = "correction"


class ExemplarStore:
    def __init__(self, entries: dict[str, Exemplar] | None = None,
                 audit: list[dict] | None = None):
        self.entries = dict(entries or {})
        self.audit = list(audit or [])

    def lookup(self, history: tuple[str, ...]) -> Exemplar | None:
        return self.entries.get(context_key(history))

    def with_exemplars(self, items) -> "ExemplarStore":
        """New store with (history, belief, response_delex, provenance)
        entries applied in order; last write wins, every write audited."""
        entries = dict(self.entries)
        audit = list(self.audit)
        for history, belief, response_delex, provenance in items:
            key = context_key(history)
            audit.append({
                "key": key,
                "belief": dict(belief),
                "response_delex": response_delex,
                "provenance": provenance,
                "overwrote": key in entries,
            })
            entries[key] = Exemplar(dict(belief), response_delex, provenance)
        return ExemplarStore(entries, audit)

    def to_json(self) -> dict:
        return {
            "entries": {
                k: {"belief": e.belief, "response_delex": e.response_delex,
                    "provenance": e.provenance}
                for k, e in self.entries.items()
            },
            "audit": self.audit,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "ExemplarStore":
        entries = {
            k: Exemplar(dict(v["belief"]), v["response_delex"], v.get("provenance", "correction"))
            for k, v in obj.get("entries", {}).items()
        }
        return cls(entries, obj.get("audit", []))

    def __len__(self):
        return len(self.entries)


@dataclass
class CorrectionRecord:
    session_id: str
    turn_index: int
    corrected_belief: dict[str, str] | None
    corrected_response_delex: str | None
    author: str = ""
    created_at: str = ""

    def __post_init__(self):
        if self.corrected_belief is None and self.corrected_response_delex is None:
            raise ValueError("correction must change belief or response")


def apply_corrections(store: ExemplarStore, corrections, sessions) -> ExemplarStore:
    """Inject one exemplar per corrected turn, keyed by the turn's full
    logged context.  ``sessions`` maps session id to a log exposing
    per-turn user_utterance, agent_utterance_lex, and prediction."""
    items = []
    for rec in corrections:
        log = sessions.get(rec.session_id)
        if log is None:
            raise DanglingReference(f"unknown session {rec.session_id!r}")
        if not 0 <= rec.turn_index < len(log.turns):
            raise StaleTurn(f"turn {rec.turn_index} out of range for {rec.session_id!r}")
        history = []
        for t in log.turns[: rec.turn_index]:
            history += [t.user_utterance, t.agent_utterance_lex]
        history.append(log.turns[rec.turn_index].user_utterance)
        turn = log.turns[rec.turn_index]
        belief = (rec.corrected_belief if rec.corrected_belief is not None
                  else dict(turn.prediction.belief.slot_values))
        response = (rec.corrected_response_delex
                    if rec.corrected_response_delex is not None
                    else turn.prediction.response_delex)
        items.append((tuple(history), belief, response, "correction"))
    return store.with_exemplars(items)


# ---------------------------------------------------------------------------
# Rule NLU: inverse of the fallback NLG plus a database value scan

_INFORM_RE = re.compile(r"\bthe\s+([\w ]+?)\s+is\s+([^.?!]+)", re.IGNORECASE)
_REQUEST_RE = re.compile(r"\bwhat\s+is\s+the\s+([\w ]+?)\s*\?", re.IGNORECASE)


def parse_user_utterance(utterance: str, schema: TaskSchema) -> DialogAct:
    text = utterance.strip()
    low = norm_value(text)
    if low in ("goodbye.", "goodbye", "bye"):
        return DialogAct(USER, "bye")
    if low in ("let me start over.", "let me start over", "start over"):
        return DialogAct(USER, "start_over")

    informable = set(schema.informable_slots)
    requestable = set(schema.requestable_slots)

    requested = [s.strip() for s in _REQUEST_RE.findall(text)]
    requested = [s for s in requested if s in requestable]
    pairs = []
    for slot, value in _INFORM_RE.findall(text):
        slot, value = slot.strip(), value.strip()
        if slot in informable:
            pairs.append((slot, value))
    if pairs:
        return DialogAct(USER, "inform", tuple(pairs))
    if requested:
        return DialogAct(USER, "request", tuple((s, None) for s in requested))

    pairs = _scan_values(low, schema)
    if pairs:
        return DialogAct(USER, "inform", tuple(pairs))
    if "?" in text or low.startswith("what"):
        asked = [s for s in requestable if re.search(rf"\b{re.escape(s)}\b", low)]
        if asked:
            return DialogAct(USER, "request", tuple((s, None) for s in asked))
    return DialogAct(USER, "inform", ())


def _scan_values(low: str, schema: TaskSchema) -> list[tuple[str, str]]:
    """Find database values of informable columns in the utterance.
    Ambiguous values (shared by several columns) need the slot name nearby."""
    by_value: dict[str, set[str]] = {}
    for slot in schema.informable_slots:
        for rec in schema.database.records:
            by_value.setdefault(norm_value(rec[slot]), set()).add(slot)
    by_value.setdefault("dontcare", set(schema.informable_slots))

    found: list[tuple[int, str, str]] = []
    used: list[tuple[int, int]] = []
    for value in sorted(by_value, key=len, reverse=True):
        if not value or value == "none":
            continue
        for m in re.finditer(rf"(?<![\w]){re.escape(value)}(?![\w])", low):
            span = (m.start(), m.end())
            if any(a < span[1] and span[0] < b for a, b in used):
                continue
            slots = by_value[value]
            if len(slots) == 1:
                slot = next(iter(slots))
            else:
                named = [s for s in sorted(slots)
                         if re.search(rf"\b{re.escape(s)}\b", low)]
                if len(named) != 1:
                    continue
                slot = named[0]
            used.append(span)
            found.append((span[0], slot, value))
            break
    found.sort()
    seen = set()
    pairs = []
    for _, slot, value in found:
        if slot not in seen:
            seen.add(slot)
            pairs.append((slot, value))
    return pairs


def parse_agent_utterance(utterance: str, schema: TaskSchema) -> DialogAct:
    """Interpret an agent reply for the simulated user in interactive eval."""
    text = utterance.strip()
    low = norm_value(text)
    if low in ("goodbye.", "goodbye", "bye"):
        return DialogAct(AGENT, "bye")
    if "no matching entities" in low:
        return DialogAct(AGENT, "notify_failure")
    requested = [s.strip() for s in _REQUEST_RE.findall(text)]
    requested = [s for s in requested if schema.slot_def(s)]
    if requested:
        return DialogAct(AGENT, "request", tuple((s, None) for s in requested))
    pairs = []
    for slot, value in _INFORM_RE.findall(text):
        slot, value = slot.strip(), value.strip()
        if schema.slot_def(slot):
            pairs.append((slot, value))
    pk = schema.database.primary_key
    if any(s == pk for s, _ in pairs):
        return DialogAct(AGENT, "offer", tuple(pairs))
    if pairs:
        return DialogAct(AGENT, "inform", tuple(pairs))
    return DialogAct(AGENT, "inform", ())


# ---------------------------------------------------------------------------
# Models

class DialogModel(Protocol):
    def predict(self, history: tuple[str, ...]) -> Prediction: ...


def reference_predict(
    history: tuple[str, ...],
    schema: TaskSchema | None,
    store: ExemplarStore | None = None,
    templates: TemplateStore | None = None,
) -> Prediction:
    """Exemplar lookup first; otherwise rule NLU + schema flow policy.

    Prefix exemplar hits override the accumulated belief mid-replay so that
    taught corrections carry forward through the rest of the dialog.
    """
    if schema is None:
        raise NoSchemaLoaded("no active schema")
    if not history or len(history) % 2 == 0:
        raise ValueError("history must end on a user utterance")
    store = store or ExemplarStore()

    hit = store.lookup(history)
    if hit is not None:
        belief = BeliefState(schema.domain_name, dict(hit.belief))
        bucket = db_state(len(query(schema.database, belief.slot_values)))
        return Prediction(belief, bucket, hit.response_delex)

    agent = init_agent(schema)
    act: DialogAct | None = None
    for i in range(0, len(history), 2):
        user_act = parse_user_utterance(history[i], schema)
        act, agent = agent_step(agent, user_act, schema)
        prefix = store.lookup(tuple(history[: i + 1]))
        if prefix is not None:
            agent.belief = BeliefState(schema.domain_name, dict(prefix.belief))
    _, delex = realize(act, templates, seed=0)
    bucket = db_state(len(query(schema.database, agent.belief.slot_values)))
    return Prediction(agent.belief, bucket, delex)


class ReferenceModel:
    """Desk-scale stand-in for a fine-tuned neural dialog model."""

    def __init__(self, schema: TaskSchema, store: ExemplarStore | None = None,
                 templates: TemplateStore | None = None):
        self.schema = schema
        self.store = store or ExemplarStore()
        self.templates = templates

    def predict(self, history: tuple[str, ...]) -> Prediction:
        return reference_predict(history, self.schema, self.store, self.templates)


class ExternalModel:
    """JSON-over-HTTP adapter: POST /predict with the wire protocol body."""

    def __init__(self, endpoint: str, schema: TaskSchema, timeout: float = 10.0,
                 client: httpx.Client | None = None):
        self.endpoint = endpoint.rstrip("/")
        self.schema = schema
        self.timeout = timeout
        self._client = client or httpx.Client()

    def predict(self, history: tuple[str, ...]) -> Prediction:
        body = {
            "version": 1,
            "domain": self.schema.domain_name,
            "history": [
                {"speaker": USER if i % 2 == 0 else AGENT, "text": h}
                for i, h in enumerate(history)
            ],
        }
        try:
            resp = self._client.post(f"{self.endpoint}/predict", json=body,
                                     timeout=self.timeout)
        except httpx.TimeoutException as exc:
            raise ModelTimeout(str(exc)) from exc
        except httpx.HTTPError as exc:
            raise TransportError(str(exc)) from exc
        if resp.status_code != 200:
            raise TransportError(f"endpoint returned {resp.status_code}")
        try:
            payload = resp.json()
            belief_raw = payload["belief"]
            response_delex = payload["response_delex"]
        except (ValueError, KeyError, TypeError) as exc:
            raise MalformedReply(str(exc)) from exc
        if not isinstance(belief_raw, dict) or not isinstance(response_delex, str):
            raise MalformedReply("belief must be an object and response_delex a string")
        valid = set(self.schema.informable_slots)
        for slot in belief_raw:
            if slot not in valid:
                raise SchemaViolation(f"belief names unknown slot {slot!r}")
        belief = BeliefState(self.schema.domain_name, dict(belief_raw))
        bucket = db_state(len(query(self.schema.database, belief.slot_values)))
        return Prediction(belief, bucket, response_delex)


# ---------------------------------------------------------------------------
# Conversation loop

_MARKER_RE = re.compile(r"\[([\w ]+?)\]")


def lexicalize(response_delex: str, belief: BeliefState,
               schema: TaskSchema) -> tuple[str, bool]:
    """Fill ``[slot]`` markers from the top record matching the belief.
    Returns (text, gap) where gap flags placeholders filled with "unknown"."""
    matches = query(schema.database, belief.slot_values)
    top = matches[0] if matches else None
    gap = False

    def fill(m):
        nonlocal gap
        slot = m.group(1)
        if top is not None and slot in top:
            return top[slot]
        gap = True
        return "unknown"

    return _MARKER_RE.sub(fill, response_delex), gap


@dataclass
class TurnRecord:
    user_utterance: str
    prediction: Prediction
    agent_utterance_lex: str
    discrepancy_flags: list[str] = field(default_factory=list)


@dataclass
class ConversationState:
    schema: TaskSchema
    history: list[str] = field(default_factory=list)
    turns: list[TurnRecord] = field(default_factory=list)


def converse_turn(state: ConversationState, user_utterance: str,
                  model: DialogModel) -> TurnRecord:
    state.history.append(user_utterance)
    prediction = model.predict(tuple(state.history))
    flags = []
    local_bucket = db_state(
        len(query(state.schema.database, prediction.belief.slot_values))
    )
    if local_bucket != prediction.db_bucket:
        flags.append("bucket_mismatch")
        prediction = Prediction(prediction.belief, local_bucket,
                                prediction.response_delex)
    lex, gap = lexicalize(prediction.response_delex, prediction.belief, state.schema)
    if gap:
        flags.append("lexicalization_gap")
    state.history.append(lex)
    record = TurnRecord(user_utterance, prediction, lex, flags)
    state.turns.append(record)
    return record
