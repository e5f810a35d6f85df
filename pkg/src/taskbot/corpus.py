"""Canonical corpus formats: annotated sessions, JSONL serialization, and
the flat training-sequence layout consumed by sequence models."""
from __future__ import annotations

import json
from dataclasses import dataclass, field

from .acts import BeliefState, DialogAct, parse_act, render_act
from .errors import (
    CorpusParseError,
    FormatVersionMismatch,
    IncompleteAnnotation,
)
from .hashing import fnv1a64
from .schema import UserGoal

FORMAT_VERSION = 1

EOB = "<EOB>"
EOKB = "<EOKB>"
EOS = "<EOS>"


@dataclass
class SessionTurn:
    user_utterance: str
    user_act: DialogAct
    belief: BeliefState
    db_bucket: str
    agent_act: DialogAct
    response_delex: str
    response_lex: str


@dataclass
class DialogSession:
    id: str
    domain_name: str
    goal: UserGoal | None
    turns: list[SessionTurn]
    outcome: str
    provenance: str  # simulated | logged | corrected
    derived_from: str | None = None


def session_id_for(sketch, seed: int) -> str:
    payload = json.dumps(
        [sketch.goal.domain_name, list(sketch.goal.constraints),
         list(sketch.goal.requests), sketch.goal.satisfiable, sketch.seed, seed],
        sort_keys=True,
    )
    return f"{sketch.goal.domain_name}-{fnv1a64(payload.encode()):016x}"


# ---------------------------------------------------------------------------
# Training sequences

@dataclass(frozen=True)
class TrainingSequence:
    text: str


def to_training_sequences(session: DialogSession) -> list[TrainingSequence]:
    """One flat sequence per turn: history, canonical belief, DB bucket,
    and the delexicalized response."""
    sequences = []
    history: list[str] = []
    for i, turn in enumerate(session.turns):
        for name in ("user_utterance", "db_bucket", "response_delex"):
            if getattr(turn, name) in (None, ""):
                raise IncompleteAnnotation(f"turn {i}: missing {name}")
        if turn.belief is None:
            raise IncompleteAnnotation(f"turn {i}: missing belief")
        history.append(f"user : {turn.user_utterance}")
        pairs = sorted(turn.belief.slot_values.items())
        if pairs:
            body = " ; ".join(f"{s} = {v}" for s, v in pairs)
            belief = f"belief : {session.domain_name} {{ {body} }}"
        else:
            belief = f"belief : {session.domain_name} {{ }}"
        text = (
            f"{' '.join(history)} => {belief} {EOB} "
            f"db : {turn.db_bucket} {EOKB} {turn.response_delex} {EOS}"
        )
        sequences.append(TrainingSequence(text))
        history.append(f"system : {turn.response_delex}")
    return sequences


# ---------------------------------------------------------------------------
# JSON mapping

def _act_to_json(act: DialogAct) -> dict:
    return {"speaker": act.speaker, "act": render_act(act)}


def _act_from_json(obj: dict) -> DialogAct:
    return parse_act(obj["act"], obj["speaker"])


def goal_to_json(goal: UserGoal | None) -> dict | None:
    if goal is None:
        return None
    return {
        "domain": goal.domain_name,
        "constraints": {s: v for s, v in goal.constraints},
        "constraint_order": [s for s, _ in goal.constraints],
        "requests": list(goal.requests),
        "satisfiable": goal.satisfiable,
    }


def goal_from_json(obj: dict | None) -> UserGoal | None:
    if obj is None:
        return None
    order = obj.get("constraint_order") or sorted(obj["constraints"])
    return UserGoal(
        obj["domain"],
        tuple((s, obj["constraints"][s]) for s in order),
        tuple(obj["requests"]),
        bool(obj["satisfiable"]),
    )


def session_to_json(session: DialogSession) -> dict:
    return {
        "id": session.id,
        "domain": session.domain_name,
        "goal": goal_to_json(session.goal),
        "outcome": session.outcome,
        "provenance": session.provenance,
        "derived_from": session.derived_from,
        "turns": [
            {
                "user_utterance": t.user_utterance,
                "user_act": _act_to_json(t.user_act),
                "belief": dict(t.belief.slot_values),
                "db_bucket": t.db_bucket,
                "agent_act": _act_to_json(t.agent_act),
                "response_delex": t.response_delex,
                "response_lex": t.response_lex,
            }
            for t in session.turns
        ],
    }


def session_from_json(obj: dict) -> DialogSession:
    turns = [
        SessionTurn(
            user_utterance=t["user_utterance"],
            user_act=_act_from_json(t["user_act"]),
            belief=BeliefState(obj["domain"], dict(t["belief"])),
            db_bucket=t["db_bucket"],
            agent_act=_act_from_json(t["agent_act"]),
            response_delex=t["response_delex"],
            response_lex=t["response_lex"],
        )
        for t in obj["turns"]
    ]
    return DialogSession(
        id=obj["id"],
        domain_name=obj["domain"],
        goal=goal_from_json(obj.get("goal")),
        turns=turns,
        outcome=obj["outcome"],
        provenance=obj["provenance"],
        derived_from=obj.get("derived_from"),
    )


# ---------------------------------------------------------------------------
# JSONL export / import

def corpus_digest(sessions: list[DialogSession]) -> str:
    canonical = "\n".join(
        json.dumps(session_to_json(s), sort_keys=True, ensure_ascii=False)
        for s in sessions
    )
    return f"{fnv1a64(canonical.encode('utf-8')):016x}"


def export_jsonl(sessions: list[DialogSession], path, domain: str | None = None,
                 config_digest: str = "") -> None:
    domain = domain or (sessions[0].domain_name if sessions else "")
    header = {
        "format_version": FORMAT_VERSION,
        "domain": domain,
        "config_digest": config_digest,
        "corpus_digest": corpus_digest(sessions),
        "sessions": len(sessions),
    }
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(header, sort_keys=True, ensure_ascii=False) + "\n")
        for s in sessions:
            fh.write(json.dumps(session_to_json(s), sort_keys=True, ensure_ascii=False) + "\n")


def import_jsonl(path) -> tuple[list[DialogSession], dict]:
    """Read a corpus file; returns (sessions, header)."""
    sessions = []
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise CorpusParseError(0, "empty corpus file")
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise CorpusParseError(1, exc.msg) from exc
    if header.get("format_version") != FORMAT_VERSION:
        raise FormatVersionMismatch(
            f"expected format version {FORMAT_VERSION}, got {header.get('format_version')!r}"
        )
    for line_no, line in enumerate(lines[1:], 2):
        if not line.strip():
            continue
        try:
            sessions.append(session_from_json(json.loads(line)))
        except (json.JSONDecodeError, KeyError) as exc:
            raise CorpusParseError(line_no, str(exc)) from exc
    return sessions, header
