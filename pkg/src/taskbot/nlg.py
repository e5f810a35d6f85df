"""Template-based NLG with a guaranteed fallback realization and exact
delexicalization.

Template files are UTF-8 lines: ``speaker TAB intent TAB slot1,slot2 TAB
weight TAB text`` with ``{slot}`` placeholders in the text.
"""
from __future__ import annotations

import random
import re
from dataclasses import dataclass, field

from .acts import DialogAct
from .errors import MissingValue, TemplateFormatError, ValueNotFound
from .hashing import derive_seed


@dataclass(frozen=True)
class Template:
    intent: str
    slot_signature: tuple[str, ...]
    speaker: str
    text: str
    weight: float = 1.0

    def __post_init__(self):
        if self.weight <= 0:
            raise TemplateFormatError(f"non-positive weight in {self.text!r}")
        placeholders = re.findall(r"\{([^{}]+)\}", self.text)
        if sorted(placeholders) != sorted(self.slot_signature):
            raise TemplateFormatError(
                f"placeholders {placeholders} do not match signature "
                f"{list(self.slot_signature)} in {self.text!r}"
            )


class TemplateStore:
    """Immutable multimap (speaker, intent, slot set) -> templates."""

    def __init__(self, templates: list[Template] | None = None):
        self._by_key: dict[tuple, list[Template]] = {}
        for t in templates or []:
            key = (t.speaker, t.intent, frozenset(t.slot_signature))
            self._by_key.setdefault(key, []).append(t)

    def lookup(self, speaker: str, intent: str, slots: tuple[str, ...]) -> list[Template]:
        return self._by_key.get((speaker, intent, frozenset(slots)), [])

    def __len__(self):
        return sum(len(v) for v in self._by_key.values())


def load_templates(text: str) -> TemplateStore:
    templates = []
    for line_no, line in enumerate(text.splitlines(), 1):
        line = line.rstrip("\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 5:
            raise TemplateFormatError(f"line {line_no}: expected 5 tab-separated fields")
        speaker, intent, slots, weight, body = parts
        signature = tuple(s for s in slots.split(",") if s)
        try:
            w = float(weight)
        except ValueError:
            raise TemplateFormatError(f"line {line_no}: bad weight {weight!r}") from None
        try:
            templates.append(Template(intent, signature, speaker, body, w))
        except TemplateFormatError as exc:
            raise TemplateFormatError(f"line {line_no}: {exc}") from None
    return TemplateStore(templates)


def _fallback(act: DialogAct) -> tuple[str, str]:
    if act.intent in ("inform", "offer"):
        lex, delex = [], []
        for slot, value in act.slot_values:
            if value is None:
                raise MissingValue(f"{act.intent} slot {slot!r} has no value")
            lex.append(f"The {slot} is {value}.")
            delex.append(f"The {slot} is [{slot}].")
        return " ".join(lex), " ".join(delex)
    if act.intent == "request":
        text = " ".join(f"What is the {slot}?" for slot in act.slots)
        return text, text
    if act.intent == "notify_failure":
        return "No matching entities were found.", "No matching entities were found."
    if act.intent == "start_over":
        return "Let me start over.", "Let me start over."
    return "Goodbye.", "Goodbye."


def _pick(templates: list[Template], seed: int) -> Template:
    rnd = random.Random(seed)
    return rnd.choices(templates, weights=[t.weight for t in templates], k=1)[0]


def realize(act: DialogAct, store: TemplateStore | None, seed: int = 0) -> tuple[str, str]:
    """Render an act to (lexicalized utterance, delexicalized form)."""
    templates = store.lookup(act.speaker, act.intent, act.slots) if store else []
    if not templates:
        return _fallback(act)
    tpl = _pick(templates, seed)
    lex = tpl.text
    delex = tpl.text
    for slot, value in act.slot_values:
        if value is None:
            lex = lex.replace(f"{{{slot}}}", slot)
            delex = delex.replace(f"{{{slot}}}", slot)
        else:
            lex = lex.replace(f"{{{slot}}}", value)
            delex = delex.replace(f"{{{slot}}}", f"[{slot}]")
    return lex, delex


def delexicalize(utterance: str, act: DialogAct) -> str:
    """Replace act values in the utterance with ``[slot]`` markers,
    longest value first, case-insensitive matching."""
    valued = [(s, v) for s, v in act.slot_values if v is not None]
    valued.sort(key=lambda sv: len(sv[1]), reverse=True)
    out = utterance
    sentinels = {}
    for i, (slot, value) in enumerate(valued):
        pattern = re.compile(re.escape(value), re.IGNORECASE)
        token = f"\x00{i}\x00"
        out, n = pattern.subn(token, out, count=1)
        if n == 0:
            raise ValueNotFound(f"value {value!r} not found in {utterance!r}")
        sentinels[token] = f"[{slot}]"
    for token, marker in sentinels.items():
        out = out.replace(token, marker)
    return out


def realize_sketch(sketch, store: TemplateStore | None, seed: int = 0):
    """Map a dialog sketch to a natural-language session, copying all
    annotations verbatim."""
    from .corpus import DialogSession, SessionTurn, session_id_for

    turns = []
    for i, t in enumerate(sketch.turns):
        user_lex, _ = realize(t.user_act, store, derive_seed(seed, 2 * i))
        agent_lex, agent_delex = realize(t.agent_act, store, derive_seed(seed, 2 * i + 1))
        turns.append(SessionTurn(
            user_utterance=user_lex,
            user_act=t.user_act,
            belief=t.belief.copy(),
            db_bucket=t.db_bucket,
            agent_act=t.agent_act,
            response_delex=agent_delex,
            response_lex=agent_lex,
        ))
    return DialogSession(
        id=session_id_for(sketch, seed),
        domain_name=sketch.goal.domain_name,
        goal=sketch.goal,
        turns=turns,
        outcome=sketch.outcome,
        provenance="simulated",
    )
