import dataclasses

import pytest

from taskbot.acts import BeliefState
from taskbot.schema import GoalConfig, enumerate_goals
from taskbot.selfplay import (
    GenerationConfig,
    generate_corpus,
    generate_sketch,
    replay_check,
)


class TestGenerateSketch:
    def test_satisfiable_goal_succeeds(self, hotel_schema):
        goal = next(g for g in enumerate_goals(hotel_schema, GoalConfig())
                    if g.satisfiable)
        sketch = generate_sketch(hotel_schema, goal, seed=1)
        assert sketch.outcome == "success"
        assert sketch.turns[-1].user_act.intent == "bye" or \
            sketch.turns[-1].agent_act.intent == "bye"

    def test_unsatisfiable_goal_failure_informed(self, hotel_schema):
        goal = next(g for g in enumerate_goals(
            hotel_schema, GoalConfig(include_unsatisfiable=True))
            if not g.satisfiable)
        sketch = generate_sketch(hotel_schema, goal, seed=1)
        assert sketch.outcome == "failure_informed"
        assert any(t.agent_act.intent == "notify_failure" for t in sketch.turns)

    def test_turn_cap_yields_aborted(self, hotel_schema):
        goal = next(g for g in enumerate_goals(hotel_schema, GoalConfig())
                    if g.satisfiable)
        sketch = generate_sketch(hotel_schema, goal, seed=1, max_turns=2)
        assert len(sketch.turns) <= 2
        assert sketch.outcome == "aborted"

    def test_belief_annotations_accumulate(self, hotel_schema):
        goal = next(iter(enumerate_goals(hotel_schema, GoalConfig())))
        sketch = generate_sketch(hotel_schema, goal, seed=0)
        seen: dict[str, str] = {}
        for turn in sketch.turns:
            if turn.user_act.intent == "inform":
                seen.update({s: v for s, v in turn.user_act.slot_values
                             if v is not None})
            assert turn.belief == BeliefState(goal.domain_name, dict(seen))

    def test_deterministic(self, hotel_schema):
        goal = next(iter(enumerate_goals(hotel_schema, GoalConfig())))
        assert generate_sketch(hotel_schema, goal, 42) == \
            generate_sketch(hotel_schema, goal, 42)


class TestGenerationConfig:
    def test_max_turns_floor(self):
        with pytest.raises(ValueError):
            GenerationConfig(max_turns=1)


class TestGenerateCorpus:
    def test_one_sketch_per_goal_in_order(self, hotel_schema):
        config = GenerationConfig(goal_config=GoalConfig(include_unsatisfiable=True))
        goals = list(enumerate_goals(hotel_schema, config.goal_config))
        sketches = generate_corpus(hotel_schema, config)
        assert [s.goal for s in sketches] == goals

    def test_max_sketches_subsample(self, hotel_schema):
        config = GenerationConfig(
            goal_config=GoalConfig(include_unsatisfiable=True), max_sketches=4)
        sketches = generate_corpus(hotel_schema, config)
        assert len(sketches) == 4

    def test_jobs_matches_serial(self, hotel_schema):
        base = GenerationConfig(goal_config=GoalConfig(include_unsatisfiable=True))
        parallel = dataclasses.replace(base, jobs=4)
        assert generate_corpus(hotel_schema, base) == \
            generate_corpus(hotel_schema, parallel)

    def test_seed_changes_corpus(self, hotel_schema):
        a = generate_corpus(hotel_schema, GenerationConfig(seed=0))
        b = generate_corpus(hotel_schema, GenerationConfig(seed=1))
        assert a != b


class TestReplayCheck:
    def test_all_generated_sketches_pass(self, hotel_schema):
        config = GenerationConfig(goal_config=GoalConfig(include_unsatisfiable=True))
        for sketch in generate_corpus(hotel_schema, config):
            assert replay_check(sketch, hotel_schema)

    def test_corrupted_belief_detected(self, hotel_schema):
        sketch = generate_corpus(hotel_schema, GenerationConfig())[0]
        bad_turn = dataclasses.replace(
            sketch.turns[0],
            belief=BeliefState("hotel", {"area": "nowhere"}))
        sketch.turns[0] = bad_turn
        assert not replay_check(sketch, hotel_schema)

    def test_corrupted_bucket_detected(self, hotel_schema):
        sketch = generate_corpus(hotel_schema, GenerationConfig())[0]
        wrong = "many" if sketch.turns[0].db_bucket != "many" else "none"
        sketch.turns[0] = dataclasses.replace(sketch.turns[0], db_bucket=wrong)
        assert not replay_check(sketch, hotel_schema)

    def test_pack_corpus_replays(self, pack_schemas):
        for schema in pack_schemas.values():
            config = GenerationConfig(
                goal_config=GoalConfig(max_goals=30, seed=3))
            sketches = generate_corpus(schema, config)
            assert sketches and all(replay_check(s, schema) for s in sketches)
