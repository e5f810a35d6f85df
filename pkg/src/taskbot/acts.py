"""Dialog acts, belief states, and the `intent(slot=value, ...)` text grammar."""
from __future__ import annotations

import re
from dataclasses import dataclass, field

from .errors import ActSyntaxError

USER = "user"
AGENT = "agent"

USER_INTENTS = {"inform", "request", "start_over", "bye"}
AGENT_INTENTS = {"request", "inform", "offer", "notify_failure", "bye"}
VALUED_INTENTS = {"inform", "offer"}

DONTCARE = "dontcare"

_WS_RE = re.compile(r"\s+")


def norm_value(value: str) -> str:
    """Canonical value form: case-folded, trimmed, inner whitespace collapsed."""
    return _WS_RE.sub(" ", value.strip()).casefold()


def values_match(constraint: str, cell: str) -> bool:
    c = norm_value(constraint)
    return c == DONTCARE or c == norm_value(cell)


@dataclass(frozen=True)
class DialogAct:
    speaker: str
    intent: str
    slot_values: tuple[tuple[str, str | None], ...] = ()

    def __post_init__(self):
        allowed = USER_INTENTS if self.speaker == USER else AGENT_INTENTS
        if self.speaker not in (USER, AGENT):
            raise ValueError(f"bad speaker {self.speaker!r}")
        if self.intent not in allowed:
            raise ValueError(f"{self.speaker} act cannot have intent {self.intent!r}")
        for slot, value in self.slot_values:
            if self.intent == "request" and value is not None:
                raise ValueError(f"request act carries value for {slot!r}")
            if self.intent in VALUED_INTENTS and value is None:
                raise ValueError(f"{self.intent} act missing value for {slot!r}")

    @property
    def slots(self) -> tuple[str, ...]:
        return tuple(s for s, _ in self.slot_values)

    def value_of(self, slot: str) -> str | None:
        for s, v in self.slot_values:
            if s == slot:
                return v
        return None


@dataclass
class BeliefState:
    domain_name: str
    slot_values: dict[str, str] = field(default_factory=dict)

    def copy(self) -> "BeliefState":
        return BeliefState(self.domain_name, dict(self.slot_values))

    def normalized(self) -> dict[str, str]:
        return {s: norm_value(v) for s, v in self.slot_values.items()}

    def __eq__(self, other):
        return (
            isinstance(other, BeliefState)
            and self.domain_name == other.domain_name
            and self.normalized() == other.normalized()
        )


_ACT_RE = re.compile(r"^\s*([a-z_]+)\s*\(\s*(.*?)\s*\)\s*$", re.DOTALL)


def render_act(act: DialogAct) -> str:
    args = []
    for slot, value in act.slot_values:
        args.append(slot if value is None else f"{slot}={value}")
    return f"{act.intent}({', '.join(args)})"


def parse_act(text: str, speaker: str) -> DialogAct:
    m = _ACT_RE.match(text)
    if not m:
        raise ActSyntaxError(f"not an act: {text!r}")
    intent, body = m.group(1), m.group(2)
    slot_values: list[tuple[str, str | None]] = []
    if body:
        for raw in body.split(","):
            raw = raw.strip()
            if not raw:
                raise ActSyntaxError(f"empty argument in {text!r}")
            if "=" in raw:
                slot, value = raw.split("=", 1)
                slot, value = slot.strip(), value.strip()
                if not slot or not value:
                    raise ActSyntaxError(f"bad argument {raw!r}")
                slot_values.append((slot, value))
            else:
                slot_values.append((raw, None))
    try:
        return DialogAct(speaker, intent, tuple(slot_values))
    except ValueError as exc:
        raise ActSyntaxError(str(exc)) from exc
