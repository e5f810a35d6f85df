import json

import pytest

from taskbot.acts import AGENT, USER, BeliefState, DialogAct
from taskbot.corpus import (
    DialogSession,
    SessionTurn,
    corpus_digest,
    export_jsonl,
    import_jsonl,
    session_from_json,
    session_to_json,
    to_training_sequences,
)
from taskbot.errors import (
    CorpusParseError,
    FormatVersionMismatch,
    IncompleteAnnotation,
)
from taskbot.nlg import realize_sketch
from taskbot.schema import GoalConfig, UserGoal
from taskbot.selfplay import GenerationConfig, generate_corpus


def make_session():
    goal = UserGoal("hotel", (("price", "moderate"),), ("parking",), True)
    turns = [
        SessionTurn(
            user_utterance="I want a moderate place.",
            user_act=DialogAct(USER, "inform", (("price", "moderate"),)),
            belief=BeliefState("hotel", {"price": "moderate"}),
            db_bucket="few",
            agent_act=DialogAct(AGENT, "offer", (("name", "acorn guest house"),)),
            response_delex="How about [name]?",
            response_lex="How about acorn guest house?",
        ),
        SessionTurn(
            user_utterance="What is the parking?",
            user_act=DialogAct(USER, "request", (("parking", None),)),
            belief=BeliefState("hotel", {"price": "moderate"}),
            db_bucket="few",
            agent_act=DialogAct(AGENT, "inform", (("parking", "yes"),)),
            response_delex="The parking is [parking].",
            response_lex="The parking is yes.",
        ),
    ]
    return DialogSession("hotel-0001", "hotel", goal, turns, "success", "simulated")


class TestTrainingSequences:
    def test_layout_first_turn(self):
        seq = to_training_sequences(make_session())[0]
        assert seq.text == (
            "user : I want a moderate place. => "
            "belief : hotel { price = moderate } <EOB> "
            "db : few <EOKB> How about [name]? <EOS>"
        )

    def test_history_grows_with_system_turns(self):
        seqs = to_training_sequences(make_session())
        assert seqs[1].text.startswith(
            "user : I want a moderate place. "
            "system : How about [name]? "
            "user : What is the parking?"
        )

    def test_belief_slots_sorted(self):
        session = make_session()
        session.turns[0].belief = BeliefState(
            "hotel", {"stars": "4", "area": "west"})
        seq = to_training_sequences(session)[0]
        assert "belief : hotel { area = west ; stars = 4 }" in seq.text

    def test_empty_belief_renders_empty_braces(self):
        session = make_session()
        session.turns[0].belief = BeliefState("hotel")
        seq = to_training_sequences(session)[0]
        assert "belief : hotel { } <EOB>" in seq.text

    def test_missing_annotation_raises(self):
        session = make_session()
        session.turns[1].db_bucket = ""
        with pytest.raises(IncompleteAnnotation):
            to_training_sequences(session)


class TestJsonRoundTrip:
    def test_session_round_trip(self):
        session = make_session()
        assert session_from_json(session_to_json(session)) == session

    def test_goal_constraint_order_preserved(self):
        goal = UserGoal("hotel", (("stars", "4"), ("area", "west")), (), True)
        session = make_session()
        session.goal = goal
        back = session_from_json(session_to_json(session))
        assert back.goal.constraints == goal.constraints

    def test_goalless_session(self):
        session = make_session()
        session.goal = None
        assert session_from_json(session_to_json(session)).goal is None


class TestJsonl:
    def test_export_import_round_trip(self, tmp_path):
        path = tmp_path / "corpus.jsonl"
        sessions = [make_session()]
        export_jsonl(sessions, path, config_digest="abc")
        back, header = import_jsonl(path)
        assert back == sessions
        assert header["format_version"] == 1
        assert header["domain"] == "hotel"
        assert header["config_digest"] == "abc"
        assert header["sessions"] == 1
        assert header["corpus_digest"] == corpus_digest(sessions)

    def test_export_is_byte_deterministic(self, tmp_path, hotel_schema):
        config = GenerationConfig(
            seed=5, goal_config=GoalConfig(include_unsatisfiable=True, seed=5))
        sketches = generate_corpus(hotel_schema, config)
        sessions = [realize_sketch(s, None, seed=i) for i, s in enumerate(sketches)]
        a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
        export_jsonl(sessions, a)
        export_jsonl(sessions, b)
        assert a.read_bytes() == b.read_bytes()

    def test_digest_changes_with_content(self):
        one = make_session()
        other = make_session()
        other.turns[0].user_utterance += "!"
        assert corpus_digest([one]) != corpus_digest([other])

    def test_wrong_format_version(self, tmp_path):
        path = tmp_path / "bad.jsonl"
        path.write_text(json.dumps({"format_version": 99}) + "\n")
        with pytest.raises(FormatVersionMismatch):
            import_jsonl(path)

    def test_malformed_body_line_reports_line_number(self, tmp_path):
        path = tmp_path / "bad.jsonl"
        path.write_text(json.dumps({"format_version": 1}) + "\n{broken\n")
        with pytest.raises(CorpusParseError):
            import_jsonl(path)

    def test_empty_file_rejected(self, tmp_path):
        path = tmp_path / "empty.jsonl"
        path.write_text("")
        with pytest.raises(CorpusParseError):
            import_jsonl(path)
