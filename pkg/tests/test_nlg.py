import pytest

from taskbot.acts import AGENT, USER, DialogAct
from taskbot.errors import TemplateFormatError, ValueNotFound
from taskbot.nlg import (
    Template,
    delexicalize,
    load_templates,
    realize,
    realize_sketch,
)
from taskbot.schema import GoalConfig, enumerate_goals
from taskbot.selfplay import GenerationConfig, generate_corpus, generate_sketch

TEMPLATES_TSV = "\n".join([
    "# comment line",
    "",
    "agent\tinform\tprice\t1.0\tThe price range is {price}.",
    "agent\tinform\tprice\t3.0\tIt is in the {price} price range.",
    "agent\trequest\tarea\t1.0\tWhich {area} would you like?",
    "user\tinform\tprice,stars\t1.0\tI want a {price} place with {stars} stars.",
    "agent\tnotify_failure\t\t1.0\tSorry, nothing matches.",
])


@pytest.fixture
def store():
    return load_templates(TEMPLATES_TSV)


class TestLoad:
    def test_loads_and_counts(self, store):
        assert len(store) == 5

    def test_bad_field_count(self):
        with pytest.raises(TemplateFormatError):
            load_templates("agent\tinform\tprice\tThe price is {price}.")

    def test_bad_weight(self):
        with pytest.raises(TemplateFormatError):
            load_templates("agent\tinform\tprice\theavy\tThe price is {price}.")

    def test_placeholder_signature_mismatch(self):
        with pytest.raises(TemplateFormatError):
            Template("inform", ("price",), "agent", "The stars are {stars}.")

    def test_nonpositive_weight_rejected(self):
        with pytest.raises(TemplateFormatError):
            Template("inform", ("price",), "agent", "Price {price}.", weight=0)


class TestRealize:
    def test_template_substitution(self, store):
        act = DialogAct(AGENT, "request", (("area", None),))
        lex, delex = realize(act, store)
        # value-less slots substitute the slot name itself
        assert lex == delex == "Which area would you like?"

    def test_inform_lex_and_delex(self, store):
        act = DialogAct(AGENT, "inform", (("price", "moderate"),))
        lex, delex = realize(act, store, seed=1)
        assert "moderate" in lex
        assert "[price]" in delex and "moderate" not in delex

    def test_seeded_choice_is_stable(self, store):
        act = DialogAct(AGENT, "inform", (("price", "cheap"),))
        assert realize(act, store, seed=7) == realize(act, store, seed=7)

    def test_weights_bias_choice(self, store):
        act = DialogAct(AGENT, "inform", (("price", "cheap"),))
        picks = {realize(act, store, seed=s)[0] for s in range(40)}
        assert len(picks) == 2  # both templates reachable

    def test_fallback_without_store(self):
        act = DialogAct(AGENT, "inform", (("price", "moderate"), ("stars", "4")))
        lex, delex = realize(act, None)
        assert lex == "The price is moderate. The stars is 4."
        assert delex == "The price is [price]. The stars is [stars]."

    def test_fallback_request_and_failure(self):
        lex, _ = realize(DialogAct(AGENT, "request", (("area", None),)), None)
        assert lex == "What is the area?"
        lex, _ = realize(DialogAct(AGENT, "notify_failure"), None)
        assert lex == "No matching entities were found."
        lex, _ = realize(DialogAct(USER, "bye"), None)
        assert lex == "Goodbye."

    def test_fallback_missing_value_raises(self):
        # inform acts with missing values cannot even be constructed, and the
        # fallback guards against hand-built ones too
        with pytest.raises(Exception):
            realize(DialogAct(AGENT, "inform", (("price", None),)), None)

    def test_no_matching_signature_falls_back(self, store):
        act = DialogAct(AGENT, "inform", (("stars", "4"),))
        lex, _ = realize(act, store)
        assert lex == "The stars is 4."


class TestDelexicalize:
    def test_basic(self):
        act = DialogAct(AGENT, "inform", (("price", "moderate"),))
        out = delexicalize("It is a moderate hotel.", act)
        assert out == "It is a [price] hotel."

    def test_case_insensitive(self):
        act = DialogAct(AGENT, "offer", (("name", "Acorn Guest House"),))
        out = delexicalize("Try the acorn guest house!", act)
        assert out == "Try the [name]!"

    def test_longest_value_first(self):
        # "4" occurs inside "4 star hotel" value; the longer value must win
        act = DialogAct(AGENT, "inform", (("stars", "4"), ("name", "4 star hotel")))
        out = delexicalize("The 4 star hotel has 4 stars.", act)
        assert out == "The [name] has [stars] stars."

    def test_missing_value_raises(self):
        act = DialogAct(AGENT, "inform", (("price", "expensive"),))
        with pytest.raises(ValueNotFound):
            delexicalize("It is cheap.", act)

    def test_value_equal_to_marker_safe(self):
        act = DialogAct(AGENT, "inform", (("a", "[b]"), ("b", "x")))
        out = delexicalize("pair [b] x", act)
        assert out == "pair [a] [b]"


class TestRealizeSketch:
    def test_annotations_copied_verbatim(self, hotel_schema):
        goal = next(iter(enumerate_goals(hotel_schema, GoalConfig())))
        sketch = generate_sketch(hotel_schema, goal, seed=0)
        session = realize_sketch(sketch, None, seed=0)
        assert session.provenance == "simulated"
        assert session.outcome == sketch.outcome
        assert len(session.turns) == len(sketch.turns)
        for st, rt in zip(sketch.turns, session.turns):
            assert rt.belief == st.belief
            assert rt.db_bucket == st.db_bucket
            assert rt.user_act == st.user_act
            assert rt.agent_act == st.agent_act
            assert rt.user_utterance and rt.response_delex

    def test_session_ids_unique_and_stable(self, hotel_schema):
        config = GenerationConfig(goal_config=GoalConfig(include_unsatisfiable=True))
        sketches = generate_corpus(hotel_schema, config)
        ids = [realize_sketch(s, None, seed=i).id for i, s in enumerate(sketches)]
        assert len(set(ids)) == len(ids)
        again = [realize_sketch(s, None, seed=i).id for i, s in enumerate(sketches)]
        assert ids == again
