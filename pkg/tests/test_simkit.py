import pytest

from taskbot.acts import AGENT, USER, DialogAct
from taskbot.errors import FlowError, ProtocolError
from taskbot.schema import UserGoal
from taskbot.simkit import (
    agent_step,
    init_agenda,
    init_agent,
    user_step,
)


GOAL = UserGoal(
    domain_name="hotel",
    constraints=(("price", "moderate"), ("stars", "4")),
    requests=("parking", "internet"),
    satisfiable=True,
)

UNSAT_GOAL = UserGoal(
    domain_name="hotel",
    constraints=(("price", "expensive"), ("stars", "2")),
    requests=("parking",),
    satisfiable=False,
)


def run_dialog(schema, goal, seed=0, max_turns=20, retry_on_failure=False):
    agenda = init_agenda(goal, seed, retry_on_failure=retry_on_failure)
    agent = init_agent(schema)
    last = None
    turns = []
    for _ in range(max_turns):
        user_act, belief, agenda = user_step(agenda, last)
        agent_act, agent = agent_step(agent, user_act, schema)
        turns.append((user_act, belief, agent_act))
        if user_act.intent == "bye" or agent_act.intent == "bye":
            break
        last = agent_act
    return turns


class TestAgenda:
    def test_informs_above_requests(self):
        st = init_agenda(GOAL, seed=3)
        intents = [a.intent for a in st.stack]
        assert intents == sorted(intents, key=lambda i: i != "inform")
        assert set(st.pending_requests) == {"parking", "internet"}

    def test_seed_changes_order(self):
        orders = {tuple(a.slots[0] for a in init_agenda(GOAL, s).stack)
                  for s in range(10)}
        assert len(orders) > 1

    def test_same_seed_same_agenda(self):
        a = init_agenda(GOAL, 5)
        b = init_agenda(GOAL, 5)
        assert a.stack == b.stack

    def test_step_after_close_raises(self):
        st = init_agenda(GOAL, 0)
        st.closed = True
        with pytest.raises(ProtocolError):
            user_step(st, None)

    def test_step_does_not_mutate_input(self):
        st = init_agenda(GOAL, 0)
        before = list(st.stack)
        user_step(st, None)
        assert st.stack == before and st.turn == 0


class TestUserStep:
    def test_answers_agent_request_with_constraint(self):
        st = init_agenda(GOAL, 0)
        ask = DialogAct(AGENT, "request", (("price", None),))
        act, belief, _ = user_step(st, ask)
        assert act.intent == "inform"
        assert dict(act.slot_values) == {"price": "moderate"}
        assert belief.slot_values == {"price": "moderate"}

    def test_answers_unconstrained_request_with_dontcare(self):
        st = init_agenda(GOAL, 0)
        ask = DialogAct(AGENT, "request", (("area", None),))
        act, _, _ = user_step(st, ask)
        assert dict(act.slot_values) == {"area": "dontcare"}

    def test_requests_after_consistent_offer(self):
        st = init_agenda(GOAL, 0)
        st.stack = []  # all constraints delivered
        offer = DialogAct(AGENT, "offer", (("name", "acorn guest house"),))
        act, _, nxt = user_step(st, offer)
        assert act.intent == "request"
        assert set(act.slots) <= {"parking", "internet"}
        assert nxt.offer_received

    def test_byes_once_requests_satisfied(self):
        st = init_agenda(GOAL, 0)
        st.stack = []
        st.offer_received = True
        st.pending_requests = []
        act, _, nxt = user_step(st, DialogAct(AGENT, "inform", (("parking", "yes"),)))
        assert act.intent == "bye" and nxt.closed

    def test_agent_inform_clears_pending_request(self):
        st = init_agenda(GOAL, 0)
        st.stack = []
        st.offer_received = True
        inform = DialogAct(AGENT, "inform", (("parking", "yes"),))
        _, _, nxt = user_step(st, inform)
        assert "parking" not in nxt.pending_requests

    def test_notify_failure_defaults_to_bye(self):
        st = init_agenda(UNSAT_GOAL, 0)
        act, _, nxt = user_step(st, DialogAct(AGENT, "notify_failure"))
        assert act.intent == "bye" and nxt.closed

    def test_notify_failure_with_retry_starts_over_once(self):
        st = init_agenda(UNSAT_GOAL, 0, retry_on_failure=True)
        act, belief, nxt = user_step(st, DialogAct(AGENT, "notify_failure"))
        assert act.intent == "start_over"
        assert belief.slot_values == {}
        assert nxt.start_overs_used == 1
        act2, _, _ = user_step(nxt, DialogAct(AGENT, "notify_failure"))
        assert act2.intent == "bye"

    def test_pack_size_bounded(self):
        for seed in range(20):
            st = init_agenda(GOAL, seed)
            act, _, _ = user_step(st, None)
            assert 1 <= len(act.slot_values) <= 2


class TestAgentStep:
    def test_requests_missing_slot_in_block_order(self, hotel_schema):
        st = init_agent(hotel_schema)
        act, nxt = agent_step(st, DialogAct(USER, "inform", (("area", "west"),)),
                              hotel_schema)
        assert act.intent == "request" and act.slots == ("price",)
        assert nxt.belief.slot_values == {"area": "west"}

    def test_offers_primary_key_after_constraints(self, hotel_schema):
        st = init_agent(hotel_schema)
        full = DialogAct(USER, "inform",
                         (("area", "west"), ("price", "moderate"), ("stars", "4")))
        act, nxt = agent_step(st, full, hotel_schema)
        assert act.intent == "offer"
        assert dict(act.slot_values)["name"] == "acorn guest house"
        assert nxt.last_db_bucket == "few"  # acorn + den house both match

    def test_answers_user_request_from_top_match(self, hotel_schema):
        st = init_agent(hotel_schema)
        st, _ = st, None
        _, st2 = agent_step(
            st,
            DialogAct(USER, "inform",
                      (("area", "west"), ("price", "moderate"), ("stars", "4"))),
            hotel_schema)
        act, _ = agent_step(st2, DialogAct(USER, "request", (("parking", None),)),
                            hotel_schema)
        assert act.intent == "inform"
        assert dict(act.slot_values) == {"parking": "yes"}

    def test_no_match_leads_to_notify_failure(self, hotel_schema):
        st = init_agent(hotel_schema)
        bad = DialogAct(USER, "inform",
                        (("area", "north"), ("price", "cheap"), ("stars", "5")))
        act, nxt = agent_step(st, bad, hotel_schema)
        assert act.intent == "notify_failure"
        assert nxt.last_db_bucket == "none"

    def test_start_over_resets_belief(self, hotel_schema):
        st = init_agent(hotel_schema)
        _, st = agent_step(st, DialogAct(USER, "inform", (("area", "west"),)),
                           hotel_schema)
        act, st = agent_step(st, DialogAct(USER, "start_over"), hotel_schema)
        assert st.belief.slot_values == {}
        assert act.intent == "request"

    def test_bye_is_terminal(self, hotel_schema):
        st = init_agent(hotel_schema)
        act, nxt = agent_step(st, DialogAct(USER, "bye"), hotel_schema)
        assert act.intent == "bye"
        block = hotel_schema.flow.block(nxt.current_block)
        assert block.kind == "end"

    def test_rejects_agent_act(self, hotel_schema):
        st = init_agent(hotel_schema)
        with pytest.raises(ValueError):
            agent_step(st, DialogAct(AGENT, "bye"), hotel_schema)

    def test_missing_edge_raises_flow_error(self, hotel_schema):
        import dataclasses

        flow = hotel_schema.flow
        pruned = dataclasses.replace(
            flow, edges=tuple(e for e in flow.edges if e.cond != "no_match"))
        broken = dataclasses.replace(hotel_schema, flow=pruned)
        st = init_agent(broken)
        bad = DialogAct(USER, "inform",
                        (("area", "north"), ("price", "cheap"), ("stars", "5")))
        with pytest.raises(FlowError):
            agent_step(st, bad, broken)


class TestFullDialogs:
    def test_satisfiable_goal_reaches_offer_and_answers(self, hotel_schema):
        for seed in range(5):
            turns = run_dialog(hotel_schema, GOAL, seed)
            agent_acts = [a for _, _, a in turns]
            assert any(a.intent == "offer" for a in agent_acts)
            answered = {s for a in agent_acts if a.intent in ("offer", "inform")
                        for s, v in a.slot_values if v is not None}
            assert set(GOAL.requests) <= answered
            assert turns[-1][0].intent == "bye" or turns[-1][2].intent == "bye"

    def test_unsatisfiable_goal_gets_notify_failure(self, hotel_schema):
        turns = run_dialog(hotel_schema, UNSAT_GOAL, 0)
        assert any(a.intent == "notify_failure" for _, _, a in turns)
        assert turns[-1][0].intent == "bye"

    def test_dialogs_deterministic(self, hotel_schema):
        assert run_dialog(hotel_schema, GOAL, 9) == run_dialog(hotel_schema, GOAL, 9)
