"""Task schema: dialog flow graph + task database, plus goal enumeration.

A schema is a single JSON document with top-level keys ``domain``, ``slots``,
``flow``, and ``database``.  All types are immutable after construction and
all operations here are pure.
"""
from __future__ import annotations

import json
import random
from dataclasses import dataclass, field, replace
from typing import Iterator

from .acts import DONTCARE, norm_value, values_match
from .errors import EmptyDatabase, SchemaSyntaxError, SemanticError, UnknownSlot

BLOCK_KINDS = {"request_slots", "query_db", "inform_result", "ask_start_over", "end"}
EDGE_CONDS = {"match", "no_match", "always"}

BUCKETS = ("none", "one", "few", "many")


def db_state(match_count: int) -> str:
    """Bucket a DB match count: 0->none, 1->one, 2-3->few, >=4->many."""
    if match_count < 0:
        raise ValueError("match_count must be non-negative")
    if match_count == 0:
        return "none"
    if match_count == 1:
        return "one"
    if match_count <= 3:
        return "few"
    return "many"


@dataclass(frozen=True)
class SlotDef:
    name: str
    informable: bool
    requestable: bool
    value_type: str = "categorical"


@dataclass(frozen=True)
class FunctionBlock:
    id: str
    kind: str
    slots: tuple[str, ...] = ()


@dataclass(frozen=True)
class FlowEdge:
    src: str
    cond: str
    dst: str


@dataclass(frozen=True)
class DialogFlow:
    blocks: tuple[FunctionBlock, ...]
    edges: tuple[FlowEdge, ...]
    entry_block: str

    def block(self, block_id: str) -> FunctionBlock:
        for b in self.blocks:
            if b.id == block_id:
                return b
        raise KeyError(block_id)

    def outgoing(self, block_id: str) -> tuple[FlowEdge, ...]:
        return tuple(e for e in self.edges if e.src == block_id)

    def next_block(self, block_id: str, cond: str) -> str | None:
        for e in self.outgoing(block_id):
            if e.cond == cond:
                return e.dst
        return None

    def reachable(self) -> set[str]:
        seen = {self.entry_block}
        frontier = [self.entry_block]
        while frontier:
            cur = frontier.pop()
            for e in self.outgoing(cur):
                if e.dst not in seen:
                    seen.add(e.dst)
                    frontier.append(e.dst)
        return seen


@dataclass(frozen=True)
class Database:
    columns: tuple[str, ...]
    records: tuple[dict[str, str], ...]
    primary_key: str


@dataclass(frozen=True)
class TaskSchema:
    domain_name: str
    flow: DialogFlow
    database: Database
    slot_defs: tuple[SlotDef, ...]

    def slot_def(self, name: str) -> SlotDef | None:
        for sd in self.slot_defs:
            if sd.name == name:
                return sd
        return None

    @property
    def informable_slots(self) -> tuple[str, ...]:
        return tuple(sd.name for sd in self.slot_defs if sd.informable)

    @property
    def requestable_slots(self) -> tuple[str, ...]:
        return tuple(sd.name for sd in self.slot_defs if sd.requestable)


@dataclass(frozen=True)
class UserGoal:
    domain_name: str
    constraints: tuple[tuple[str, str], ...]
    requests: tuple[str, ...]
    satisfiable: bool

    @property
    def constraint_map(self) -> dict[str, str]:
        return dict(self.constraints)


@dataclass(frozen=True)
class GoalConfig:
    include_unsatisfiable: bool = False
    max_goals: int | None = None
    seed: int = 0


@dataclass(frozen=True)
class Finding:
    severity: str  # error | warning | info
    path: str
    message: str


@dataclass
class ValidationReport:
    findings: list[Finding] = field(default_factory=list)

    def add(self, severity, path, message):
        self.findings.append(Finding(severity, path, message))

    @property
    def errors(self) -> list[Finding]:
        return [f for f in self.findings if f.severity == "error"]

    @property
    def ok(self) -> bool:
        return not self.errors


# ---------------------------------------------------------------------------
# Parsing / serialization

_TOP_KEYS = {"domain", "slots", "flow", "database"}
_SLOT_KEYS = {"name", "informable", "requestable", "type"}
_FLOW_KEYS = {"entry", "blocks", "edges"}
_BLOCK_KEYS = {"id", "kind", "slots"}
_EDGE_KEYS = {"from", "cond", "to"}
_DB_KEYS = {"primary_key", "columns", "records"}


def _check_keys(obj: dict, allowed: set, path: str, strict: bool):
    unknown = set(obj) - allowed
    if unknown and strict:
        raise SemanticError(path, f"unknown keys: {sorted(unknown)}")


def _require(obj: dict, key: str, path: str):
    if key not in obj:
        raise SemanticError(path, f"missing key {key!r}")
    return obj[key]


def parse_schema(document: str, strict: bool = True) -> TaskSchema:
    """Parse a schema document; raises SchemaSyntaxError / SemanticError."""
    try:
        raw = json.loads(document)
    except json.JSONDecodeError as exc:
        raise SchemaSyntaxError(exc.lineno, exc.colno, exc.msg) from exc
    if not isinstance(raw, dict):
        raise SemanticError("$", "top level must be an object")
    _check_keys(raw, _TOP_KEYS, "$", strict)

    domain = _require(raw, "domain", "$")
    if not isinstance(domain, str) or not domain:
        raise SemanticError("$.domain", "domain must be a non-empty string")

    slot_defs = []
    for i, s in enumerate(_require(raw, "slots", "$")):
        path = f"$.slots[{i}]"
        _check_keys(s, _SLOT_KEYS, path, strict)
        sd = SlotDef(
            name=_require(s, "name", path),
            informable=bool(s.get("informable", False)),
            requestable=bool(s.get("requestable", False)),
            value_type=s.get("type", "categorical"),
        )
        if not sd.informable and not sd.requestable:
            raise SemanticError(path, f"slot {sd.name!r} neither informable nor requestable")
        if sd.value_type not in ("categorical", "open"):
            raise SemanticError(path, f"bad value type {sd.value_type!r}")
        slot_defs.append(sd)
    names = [sd.name for sd in slot_defs]
    if len(set(names)) != len(names):
        raise SemanticError("$.slots", "duplicate slot names")

    fraw = _require(raw, "flow", "$")
    _check_keys(fraw, _FLOW_KEYS, "$.flow", strict)
    blocks = []
    for i, b in enumerate(_require(fraw, "blocks", "$.flow")):
        path = f"$.flow.blocks[{i}]"
        _check_keys(b, _BLOCK_KEYS, path, strict)
        kind = _require(b, "kind", path)
        if kind not in BLOCK_KINDS:
            raise SemanticError(path, f"unknown block kind {kind!r}")
        blocks.append(FunctionBlock(_require(b, "id", path), kind, tuple(b.get("slots", []))))
    edges = []
    for i, e in enumerate(fraw.get("edges", [])):
        path = f"$.flow.edges[{i}]"
        _check_keys(e, _EDGE_KEYS, path, strict)
        cond = _require(e, "cond", path)
        if cond not in EDGE_CONDS:
            raise SemanticError(path, f"unknown edge condition {cond!r}")
        edges.append(FlowEdge(_require(e, "from", path), cond, _require(e, "to", path)))
    flow = DialogFlow(tuple(blocks), tuple(edges), _require(fraw, "entry", "$.flow"))

    draw = _require(raw, "database", "$")
    _check_keys(draw, _DB_KEYS, "$.database", strict)
    columns = tuple(_require(draw, "columns", "$.database"))
    records = []
    for i, r in enumerate(draw.get("records", [])):
        path = f"$.database.records[{i}]"
        extra = set(r) - set(columns)
        if extra:
            raise SemanticError(path, f"values for non-columns: {sorted(extra)}")
        # missing / empty cells normalized to literal "none" to keep records total
        records.append({c: (str(r.get(c, "")).strip() or "none") for c in columns})
    database = Database(columns, tuple(records), _require(draw, "primary_key", "$.database"))

    schema = TaskSchema(domain, flow, database, tuple(slot_defs))
    _check_invariants(schema)
    return schema


def serialize_schema(schema: TaskSchema) -> str:
    doc = {
        "domain": schema.domain_name,
        "slots": [
            {"name": sd.name, "informable": sd.informable,
             "requestable": sd.requestable, "type": sd.value_type}
            for sd in schema.slot_defs
        ],
        "flow": {
            "entry": schema.flow.entry_block,
            "blocks": [
                {"id": b.id, "kind": b.kind, "slots": list(b.slots)}
                for b in schema.flow.blocks
            ],
            "edges": [
                {"from": e.src, "cond": e.cond, "to": e.dst}
                for e in schema.flow.edges
            ],
        },
        "database": {
            "primary_key": schema.database.primary_key,
            "columns": list(schema.database.columns),
            "records": [dict(r) for r in schema.database.records],
        },
    }
    return json.dumps(doc, indent=2, ensure_ascii=False)


def _check_invariants(schema: TaskSchema):
    """Raise SemanticError on the first violated type invariant."""
    flow, db = schema.flow, schema.database
    slot_names = {sd.name for sd in schema.slot_defs}

    for sd in schema.slot_defs:
        if sd.name not in db.columns:
            raise SemanticError("$.slots", f"slot {sd.name!r} is not a database column")

    block_ids = [b.id for b in flow.blocks]
    if len(set(block_ids)) != len(block_ids):
        raise SemanticError("$.flow.blocks", "duplicate block ids")
    if flow.entry_block not in block_ids:
        raise SemanticError("$.flow", f"entry block {flow.entry_block!r} not defined")
    for e in flow.edges:
        for endpoint in (e.src, e.dst):
            if endpoint not in block_ids:
                raise SemanticError("$.flow.edges", f"edge endpoint {endpoint!r} not defined")
    for b in flow.blocks:
        for s in b.slots:
            if s not in slot_names:
                raise SemanticError(f"$.flow.blocks[{b.id}]", f"unknown slot {s!r}")
        if b.kind == "request_slots" and not b.slots:
            raise SemanticError(f"$.flow.blocks[{b.id}]", "request_slots block lists no slots")
        out = flow.outgoing(b.id)
        conds = sorted(e.cond for e in out)
        if b.kind == "end":
            if out:
                raise SemanticError(f"$.flow.blocks[{b.id}]", "end block has outgoing edges")
        elif conds not in (["always"], ["match", "no_match"]):
            raise SemanticError(
                f"$.flow.blocks[{b.id}]",
                f"outgoing conditions {conds} are not exclusive and exhaustive",
            )
    unreachable = set(block_ids) - flow.reachable()
    if unreachable:
        raise SemanticError("$.flow", f"unreachable blocks: {sorted(unreachable)}")

    pk_values = [norm_value(r[db.primary_key]) for r in db.records]
    if db.primary_key not in db.columns:
        raise SemanticError("$.database", f"primary key {db.primary_key!r} is not a column")
    if len(set(pk_values)) != len(pk_values):
        raise SemanticError("$.database", "duplicate primary key values")


def validate_schema(schema: TaskSchema) -> ValidationReport:
    """Non-raising validation: invariants plus lint rules, as a findings report."""
    report = ValidationReport()
    try:
        _check_invariants(schema)
    except SemanticError as exc:
        report.add("error", exc.path, exc.message)
        return report

    flow = schema.flow
    # lint: a terminal block must be reachable so dialogs can end
    has_end = any(b.kind == "end" for b in flow.blocks if b.id in flow.reachable())
    if not has_end:
        report.add("error", "$.flow", "no reachable end block")

    # lint: every informable slot should be requested somewhere
    requested = {s for b in flow.blocks if b.kind == "request_slots" for s in b.slots}
    for sd in schema.slot_defs:
        if sd.informable and sd.name not in requested:
            report.add("warning", "$.slots",
                       f"informable slot {sd.name!r} never appears in a request_slots block")

    # cycles are allowed; flag them as bounded-by-max-turns info
    if _has_cycle(flow):
        report.add("info", "$.flow", "flow contains a cycle; dialogs are bounded by max_turns")
    return report


def _has_cycle(flow: DialogFlow) -> bool:
    state: dict[str, int] = {}

    def visit(node: str) -> bool:
        state[node] = 1
        for e in flow.outgoing(node):
            s = state.get(e.dst, 0)
            if s == 1 or (s == 0 and visit(e.dst)):
                return True
        state[node] = 2
        return False

    return visit(flow.entry_block)


# ---------------------------------------------------------------------------
# Querying and goal enumeration

def query(database: Database, constraints: dict[str, str]) -> list[dict[str, str]]:
    """Records matching every constraint (normalized equality, dontcare wildcard)."""
    for slot in constraints:
        if slot not in database.columns:
            raise UnknownSlot(slot)
    return [
        r for r in database.records
        if all(values_match(v, r[s]) for s, v in constraints.items())
    ]


def _request_blocks(schema: TaskSchema) -> list[FunctionBlock]:
    reachable = schema.flow.reachable()
    return [b for b in schema.flow.blocks
            if b.kind == "request_slots" and b.id in reachable]


def _corrupt_constraints(schema, constraints: dict[str, str]) -> dict[str, str] | None:
    """One-slot corruption that makes the constraint set unsatisfiable.

    Prefers the lexicographically next value in the column's value set
    (wrapping); falls back to a synthesized off-domain value.
    """
    db = schema.database
    for slot in constraints:
        values = sorted({norm_value(r[slot]) for r in db.records})
        cur = norm_value(constraints[slot])
        start = values.index(cur) if cur in values else -1
        rotated = values[start + 1:] + values[:max(start, 0)]
        for cand in rotated:
            trial = dict(constraints, **{slot: cand})
            if not query(db, trial):
                return trial
    for slot in constraints:
        trial = dict(constraints, **{slot: f"zzz-no-such-{slot}"})
        if not query(db, trial):
            return trial
    return None


def enumerate_goals(schema: TaskSchema, config: GoalConfig = GoalConfig()) -> Iterator[UserGoal]:
    """Enumerate goals record-by-record, block-by-block, deterministically."""
    if not schema.database.records:
        raise EmptyDatabase(f"{schema.domain_name}: database has no records")
    goals: list[UserGoal] = []
    informable = set(schema.informable_slots)
    requestable = schema.requestable_slots
    for record in schema.database.records:
        for block in _request_blocks(schema):
            constraints = tuple(
                (s, record[s]) for s in block.slots if s in informable
            )
            requests = tuple(s for s in requestable if s not in dict(constraints))
            goals.append(UserGoal(schema.domain_name, constraints, requests, True))
            if config.include_unsatisfiable:
                corrupted = _corrupt_constraints(schema, dict(constraints))
                if corrupted is not None:
                    goals.append(UserGoal(
                        schema.domain_name,
                        tuple((s, corrupted[s]) for s, _ in constraints),
                        requests,
                        False,
                    ))
    if config.max_goals is not None and len(goals) > config.max_goals:
        rnd = random.Random(config.seed)
        keep = sorted(rnd.sample(range(len(goals)), config.max_goals))
        goals = [goals[i] for i in keep]
    yield from goals
