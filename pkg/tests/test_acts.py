import pytest
from hypothesis import given, strategies as st

from taskbot.acts import (
    AGENT,
    USER,
    BeliefState,
    DialogAct,
    norm_value,
    parse_act,
    render_act,
    values_match,
)
from taskbot.errors import ActSyntaxError
from taskbot.hashing import derive_seed, fnv1a64


class TestNormalization:
    def test_norm_value(self):
        assert norm_value("  Acorn   Guest House ") == "acorn guest house"

    def test_values_match_dontcare(self):
        assert values_match("dontcare", "anything")
        assert values_match("WEST", " west ")
        assert not values_match("west", "east")


class TestDialogAct:
    def test_valid_acts(self):
        DialogAct(USER, "inform", (("price", "cheap"),))
        DialogAct(AGENT, "request", (("area", None),))
        DialogAct(AGENT, "offer", (("name", "x"),))
        DialogAct(USER, "bye")

    @pytest.mark.parametrize("speaker,intent,sv", [
        ("robot", "inform", ()),                       # bad speaker
        (USER, "offer", (("name", "x"),)),             # user cannot offer
        (AGENT, "start_over", ()),                     # agent cannot start over
        (USER, "request", (("area", "west"),)),        # request with value
        (AGENT, "inform", (("price", None),)),         # inform without value
    ])
    def test_invalid_acts(self, speaker, intent, sv):
        with pytest.raises(ValueError):
            DialogAct(speaker, intent, sv)

    def test_accessors(self):
        act = DialogAct(USER, "inform", (("a", "1"), ("b", "2")))
        assert act.slots == ("a", "b")
        assert act.value_of("b") == "2"
        assert act.value_of("zzz") is None


class TestGrammar:
    def test_render(self):
        act = DialogAct(USER, "inform", (("price", "cheap"), ("stars", "4")))
        assert render_act(act) == "inform(price=cheap, stars=4)"
        assert render_act(DialogAct(USER, "request", (("area", None),))) == \
            "request(area)"
        assert render_act(DialogAct(USER, "bye")) == "bye()"

    def test_parse(self):
        act = parse_act("inform(price=cheap, stars=4)", USER)
        assert act.slot_values == (("price", "cheap"), ("stars", "4"))
        assert parse_act("bye()", USER).intent == "bye"

    def test_round_trip(self):
        for text in ["inform(price=cheap)", "request(area, stars)",
                     "offer(name=acorn guest house, parking=yes)", "bye()"]:
            speaker = AGENT if text.startswith(("offer", "notify")) else USER
            assert render_act(parse_act(text, speaker)) == text

    @pytest.mark.parametrize("bad", [
        "inform", "inform(", "inform(=x)", "inform(a=)", "inform(a,,b)",
        "shout(x=1)",
    ])
    def test_syntax_errors(self, bad):
        with pytest.raises(ActSyntaxError):
            parse_act(bad, USER)

    @given(st.dictionaries(
        st.from_regex(r"[a-z][a-z_]{0,8}", fullmatch=True),
        st.from_regex(r"[a-z0-9][a-z0-9 ]{0,10}[a-z0-9]", fullmatch=True),
        min_size=1, max_size=4))
    def test_grammar_round_trip_property(self, pairs):
        act = DialogAct(USER, "inform", tuple(pairs.items()))
        assert parse_act(render_act(act), USER) == act


class TestBeliefState:
    def test_eq_normalizes(self):
        a = BeliefState("hotel", {"area": " WEST "})
        b = BeliefState("hotel", {"area": "west"})
        assert a == b
        assert a != BeliefState("train", {"area": "west"})

    def test_copy_is_independent(self):
        a = BeliefState("hotel", {"x": "1"})
        b = a.copy()
        b.slot_values["x"] = "2"
        assert a.slot_values["x"] == "1"


class TestHashing:
    def test_fnv_known_vectors(self):
        # standard FNV-1a 64-bit test vectors
        assert fnv1a64(b"") == 0xCBF29CE484222325
        assert fnv1a64(b"a") == 0xAF63DC4C8601EC8C
        assert fnv1a64(b"foobar") == 0x85944171F73967E8

    def test_derive_seed_stable_and_spread(self):
        assert derive_seed(1, 2) == derive_seed(1, 2)
        seeds = {derive_seed(0, i) for i in range(100)}
        assert len(seeds) == 100
