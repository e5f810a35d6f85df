"""Self-play sketch generation: drive the user and agent simulators over
enumerated goals and verify label correctness with a replay oracle."""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .acts import BeliefState, DialogAct
from .hashing import derive_seed
from .schema import GoalConfig, TaskSchema, UserGoal, db_state, enumerate_goals, query
from .simkit import _offer_consistent, agent_step, init_agenda, init_agent, user_step

DEFAULT_MAX_TURNS = 20


@dataclass(frozen=True)
class SketchTurn:
    user_act: DialogAct
    belief: BeliefState
    agent_act: DialogAct
    db_bucket: str


@dataclass
class DialogSketch:
    goal: UserGoal
    turns: list[SketchTurn]
    outcome: str  # success | failure_informed | aborted
    seed: int = 0


@dataclass(frozen=True)
class GenerationConfig:
    seed: int = 0
    max_turns: int = DEFAULT_MAX_TURNS
    goal_config: GoalConfig = GoalConfig()
    max_sketches: int | None = None
    jobs: int = 1

    def __post_init__(self):
        if self.max_turns < 2:
            raise ValueError("max_turns must be >= 2")


def generate_sketch(
    schema: TaskSchema,
    goal: UserGoal,
    seed: int,
    max_turns: int = DEFAULT_MAX_TURNS,
) -> DialogSketch:
    agenda = init_agenda(goal, seed)
    agent = init_agent(schema)
    turns: list[SketchTurn] = []
    last_agent_act: DialogAct | None = None
    while len(turns) < max_turns:
        user_act, belief, agenda = user_step(agenda, last_agent_act)
        agent_act, agent = agent_step(agent, user_act, schema)
        bucket = db_state(len(query(schema.database, belief.slot_values)))
        turns.append(SketchTurn(user_act, belief, agent_act, bucket))
        if user_act.intent == "bye" or agent_act.intent == "bye":
            break
        last_agent_act = agent_act
    return DialogSketch(goal, turns, _classify(goal, turns), seed)


def _classify(goal: UserGoal, turns: list[SketchTurn]) -> str:
    closed = turns and (turns[-1].user_act.intent == "bye"
                        or turns[-1].agent_act.intent == "bye")
    agent_acts = [t.agent_act for t in turns]
    if goal.satisfiable:
        offered = any(a.intent == "offer" and _offer_consistent(goal, a) for a in agent_acts)
        answered = {
            s for a in agent_acts if a.intent in ("offer", "inform")
            for s, v in a.slot_values if v is not None
        }
        if closed and offered and set(goal.requests) <= answered:
            return "success"
        return "aborted"
    if closed and any(a.intent == "notify_failure" for a in agent_acts):
        return "failure_informed"
    return "aborted"


def generate_corpus(schema: TaskSchema, config: GenerationConfig) -> list[DialogSketch]:
    """One sketch per enumerated goal, in goal order, per-goal derived seeds."""
    goals = list(enumerate_goals(schema, config.goal_config))
    indexed = list(enumerate(goals))
    if config.max_sketches is not None and len(indexed) > config.max_sketches:
        import random

        rnd = random.Random(config.seed)
        keep = sorted(rnd.sample(range(len(indexed)), config.max_sketches))
        indexed = [indexed[i] for i in keep]

    def run(item):
        i, goal = item
        return generate_sketch(schema, goal, derive_seed(config.seed, i), config.max_turns)

    if config.jobs > 1:
        with ThreadPoolExecutor(max_workers=config.jobs) as pool:
            return list(pool.map(run, indexed))
    return [run(item) for item in indexed]


def replay_check(sketch: DialogSketch, schema: TaskSchema) -> bool:
    """Recompute beliefs from raw user acts and buckets from the database;
    true iff every stored annotation matches."""
    accumulated: dict[str, str] = {}
    for turn in sketch.turns:
        act = turn.user_act
        if act.intent == "start_over":
            accumulated = {}
        elif act.intent == "inform":
            for s, v in act.slot_values:
                if v is not None:
                    accumulated[s] = v
        expected = BeliefState(sketch.goal.domain_name, dict(accumulated))
        if turn.belief != expected:
            return False
        try:
            matches = query(schema.database, expected.slot_values)
        except Exception:
            return False
        if turn.db_bucket != db_state(len(matches)):
            return False
    return True
