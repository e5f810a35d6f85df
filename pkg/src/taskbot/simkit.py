"""Agenda-based user simulator and rule-based agent simulator.

Both sides are deterministic given the seed: the user pops pending
inform/request acts off an agenda stack and reacts to the last agent act;
the agent walks the schema flow graph driven by its accumulated belief.
State objects are plain values and every step is a pure transition.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field, replace

from .acts import AGENT, DONTCARE, USER, BeliefState, DialogAct, norm_value, values_match
from .errors import FlowError, ProtocolError
from .hashing import derive_seed
from .schema import TaskSchema, UserGoal, db_state, query


@dataclass
class AgendaState:
    stack: list[DialogAct]
    goal: UserGoal
    pending_requests: list[str]
    phase: str  # constraining | requesting | closing
    seed: int
    turn: int = 0
    informed: dict[str, str] = field(default_factory=dict)
    asked: list[str] = field(default_factory=list)
    offer_received: bool = False
    start_overs_used: int = 0
    retry_on_failure: bool = False
    closed: bool = False

    def copy(self) -> "AgendaState":
        return replace(
            self,
            stack=list(self.stack),
            pending_requests=list(self.pending_requests),
            informed=dict(self.informed),
            asked=list(self.asked),
        )


def init_agenda(goal: UserGoal, seed: int, retry_on_failure: bool = False) -> AgendaState:
    """Seeded agenda: shuffled inform acts stacked above shuffled request acts."""
    rnd = random.Random(seed)
    informs = [DialogAct(USER, "inform", ((s, v),)) for s, v in goal.constraints]
    requests = [DialogAct(USER, "request", ((s, None),)) for s in goal.requests]
    rnd.shuffle(informs)
    rnd.shuffle(requests)
    pending = [a.slots[0] for a in requests]
    return AgendaState(
        stack=informs + requests,
        goal=goal,
        pending_requests=pending,
        phase="constraining",
        seed=seed,
        retry_on_failure=retry_on_failure,
    )


def _pack_size(state: AgendaState) -> int:
    # seeded choice in {1, 2}: multi-slot turns without a shared RNG stream
    return 1 + (derive_seed(state.seed, state.turn) % 2)


def _pop_informs(state: AgendaState, k: int) -> list[tuple[str, str]]:
    pairs = []
    while len(pairs) < k and state.stack and state.stack[0].intent == "inform":
        act = state.stack.pop(0)
        pairs.extend(act.slot_values)
    return pairs


def _drop_stack_inform(state: AgendaState, slot: str):
    for i, act in enumerate(state.stack):
        if act.intent == "inform" and act.slots == (slot,):
            del state.stack[i]
            return


def _next_requests(state: AgendaState, k: int) -> list[str]:
    slots = [s for s in state.pending_requests if s not in state.asked][:k]
    state.asked.extend(slots)
    return slots


def _inform_act(state: AgendaState, pairs: list[tuple[str, str]]) -> DialogAct:
    for s, v in pairs:
        state.informed[s] = v
    return DialogAct(USER, "inform", tuple(pairs))


def _belief(state: AgendaState) -> BeliefState:
    return BeliefState(state.goal.domain_name, dict(state.informed))


def _close(state: AgendaState) -> DialogAct:
    state.phase = "closing"
    state.closed = True
    return DialogAct(USER, "bye")


def _offer_consistent(goal: UserGoal, offer: DialogAct) -> bool:
    constraints = goal.constraint_map
    return all(
        values_match(constraints[s], v)
        for s, v in offer.slot_values
        if s in constraints and v is not None
    )


def user_step(
    state: AgendaState, last_agent_act: DialogAct | None
) -> tuple[DialogAct, BeliefState, AgendaState]:
    """One user turn; returns (act, belief so far, next state)."""
    if state.closed:
        raise ProtocolError("user_step called after bye")
    st = state.copy()
    k = _pack_size(st)
    st.turn += 1
    intent = last_agent_act.intent if last_agent_act else None

    if intent == "request":
        pairs = []
        for slot in last_agent_act.slots:
            value = st.goal.constraint_map.get(slot, DONTCARE)
            _drop_stack_inform(st, slot)
            pairs.append((slot, value))
        act = _inform_act(st, pairs)
        return act, _belief(st), st

    if intent in ("offer", "inform"):
        provided = [s for s, v in last_agent_act.slot_values if v is not None]
        st.pending_requests = [s for s in st.pending_requests if s not in provided]
        st.stack = [a for a in st.stack
                    if not (a.intent == "request" and a.slots[0] in provided)]
        if intent == "offer":
            if not _offer_consistent(st.goal, last_agent_act):
                pairs = _pop_informs(st, k)
                if pairs:
                    return _inform_act(st, pairs), _belief(st), st
                return _close(st), _belief(st), st
            st.offer_received = True
        if st.offer_received:
            st.phase = "requesting"
            slots = _next_requests(st, k)
            if slots:
                st.stack = [a for a in st.stack
                            if not (a.intent == "request" and a.slots[0] in slots)]
                act = DialogAct(USER, "request", tuple((s, None) for s in slots))
                return act, _belief(st), st
            return _close(st), _belief(st), st

    if intent == "notify_failure":
        if st.retry_on_failure and st.start_overs_used == 0:
            st.start_overs_used += 1
            fresh = init_agenda(st.goal, derive_seed(st.seed, 7 + st.start_overs_used),
                                st.retry_on_failure)
            fresh.turn = st.turn
            fresh.start_overs_used = st.start_overs_used
            return DialogAct(USER, "start_over"), BeliefState(st.goal.domain_name), fresh
        return _close(st), _belief(st), st

    if intent == "bye":
        return _close(st), _belief(st), st

    pairs = _pop_informs(st, k)
    if pairs:
        return _inform_act(st, pairs), _belief(st), st
    # nothing left to constrain: surface the next request to nudge the agent
    slots = _next_requests(st, k)
    if slots:
        act = DialogAct(USER, "request", tuple((s, None) for s in slots))
        st.stack = [a for a in st.stack
                    if not (a.intent == "request" and a.slots[0] in slots)]
        return act, _belief(st), st
    return _close(st), _belief(st), st


# ---------------------------------------------------------------------------
# Agent simulator

@dataclass
class AgentState:
    belief: BeliefState
    asked_slots: set[str] = field(default_factory=set)
    last_db_bucket: str | None = None
    current_block: str = ""
    user_requested: tuple[str, ...] = ()

    def copy(self) -> "AgentState":
        return replace(self, belief=self.belief.copy(), asked_slots=set(self.asked_slots))


def init_agent(schema: TaskSchema) -> AgentState:
    return AgentState(
        belief=BeliefState(schema.domain_name),
        current_block=schema.flow.entry_block,
    )


def _advance(st: AgentState, schema: TaskSchema, cond: str):
    nxt = schema.flow.next_block(st.current_block, cond)
    if nxt is None:
        raise FlowError(
            f"block {st.current_block!r} has no outgoing {cond!r} edge"
        )
    st.current_block = nxt


def agent_step(
    state: AgentState, user_act: DialogAct, schema: TaskSchema
) -> tuple[DialogAct, AgentState]:
    """One agent turn: merge the user act, walk the flow, emit the next act."""
    if user_act.speaker != USER:
        raise ValueError("agent_step expects a user act")
    st = state.copy()
    db = schema.database
    informable = set(schema.informable_slots)

    if user_act.intent == "bye":
        end = next((b.id for b in schema.flow.blocks if b.kind == "end"), st.current_block)
        st.current_block = end
        return DialogAct(AGENT, "bye"), st
    if user_act.intent == "start_over":
        st.belief = BeliefState(schema.domain_name)
        st.asked_slots = set()
        st.user_requested = ()
        st.last_db_bucket = None
        st.current_block = schema.flow.entry_block
    elif user_act.intent == "inform":
        for s, v in user_act.slot_values:
            if s in informable and v is not None:
                st.belief.slot_values[s] = v
    elif user_act.intent == "request":
        new = tuple(s for s in user_act.slots if s not in st.user_requested)
        st.user_requested += new

    for _ in range(2 * len(schema.flow.blocks) + 4):
        block = schema.flow.block(st.current_block)
        if block.kind == "request_slots":
            missing = [s for s in block.slots
                       if s in informable and s not in st.belief.slot_values]
            if missing:
                slot = missing[0]
                st.asked_slots.add(slot)
                return DialogAct(AGENT, "request", ((slot, None),)), st
            _advance(st, schema, "always")
        elif block.kind == "query_db":
            matches = query(db, st.belief.slot_values)
            st.last_db_bucket = db_state(len(matches))
            _advance(st, schema, "match" if matches else "no_match")
        elif block.kind == "inform_result":
            matches = query(db, st.belief.slot_values)
            if not matches:
                return DialogAct(AGENT, "notify_failure"), st
            rec = matches[0]
            if user_act.intent == "request":
                pairs = tuple((s, rec.get(s, "none")) for s in user_act.slots)
                return DialogAct(AGENT, "inform", pairs), st
            pk = db.primary_key
            pairs = [(pk, rec[pk])]
            pairs += [(s, rec.get(s, "none")) for s in st.user_requested if s != pk]
            return DialogAct(AGENT, "offer", tuple(pairs)), st
        elif block.kind == "ask_start_over":
            return DialogAct(AGENT, "notify_failure"), st
        elif block.kind == "end":
            return DialogAct(AGENT, "bye"), st
    raise FlowError(f"flow made no progress from block {state.current_block!r}")
