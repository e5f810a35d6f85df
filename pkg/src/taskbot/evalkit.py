"""Corpus metrics (Inform, Success, BLEU, Combined, JGA) and the
interactive self-play evaluation harness."""
from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal

from .acts import norm_value
from .corpus import DialogSession, SessionTurn
from .errors import AlignmentError, EmptyInput, TaskbotError
from .hashing import derive_seed
from .nlg import TemplateStore, realize
from .runtime import ConversationState, DialogModel, converse_turn, parse_agent_utterance
from .schema import Database, GoalConfig, TaskSchema, UserGoal, enumerate_goals, query
from .simkit import init_agenda, user_step


def round2(x: float) -> float:
    """Half-up rounding to 2 decimals, as reported everywhere."""
    return float(Decimal(repr(x)).quantize(Decimal("0.01"), rounding=ROUND_HALF_UP))


@dataclass
class EvalReport:
    inform: float
    success: float
    bleu: float
    combined: float
    per_session: list[dict] = field(default_factory=list)


@dataclass
class DstReport:
    joint_goal_accuracy: float
    per_turn: list[dict] = field(default_factory=list)


# ---------------------------------------------------------------------------
# Inform / Success

def _word_found(needle: str, haystack: str) -> bool:
    return re.search(rf"(?<![\w]){re.escape(norm_value(needle))}(?![\w])",
                     norm_value(haystack)) is not None


def session_task_flags(agent_utterances: list[str], goal: UserGoal,
                       db: Database) -> tuple[bool, bool]:
    """(informed, succeeded) for one session's lexicalized agent side."""
    matching = query(db, goal.constraint_map)
    matching_pks = {norm_value(r[db.primary_key]) for r in matching}
    offered = None
    for utt in agent_utterances:
        for rec in db.records:
            pk = rec[db.primary_key]
            if _word_found(pk, utt) and norm_value(pk) in matching_pks:
                offered = rec
                break
        if offered:
            break
    informed = offered is not None
    if not informed:
        return False, False
    joined = " ".join(agent_utterances)
    succeeded = all(
        _word_found(offered.get(slot, ""), joined) for slot in goal.requests
    )
    return informed, succeeded


def inform_success(predicted: list[DialogSession], gold_goals: list[UserGoal],
                   db: Database) -> tuple[float, float, list[dict]]:
    if len(predicted) != len(gold_goals):
        raise AlignmentError(
            f"{len(predicted)} sessions vs {len(gold_goals)} goals"
        )
    flags = []
    for session, goal in zip(predicted, gold_goals):
        agent_utts = [t.response_lex for t in session.turns]
        informed, succeeded = session_task_flags(agent_utts, goal, db)
        flags.append({"id": session.id, "informed": informed, "succeeded": succeeded})
    n = len(flags) or 1
    inform = 100.0 * sum(f["informed"] for f in flags) / n
    success = 100.0 * sum(f["succeeded"] for f in flags) / n
    return inform, success, flags


# ---------------------------------------------------------------------------
# BLEU

def _tokens(text: str) -> list[str]:
    return norm_value(text).split()


def bleu(candidates: list[str], references: list[str]) -> float:
    """Corpus BLEU-4: uniform weights, brevity penalty, whitespace tokens,
    case-folded, add-one smoothing on zero n-gram counts."""
    if not candidates or len(candidates) != len(references):
        raise EmptyInput("need equal, non-empty candidate/reference lists")
    clipped = [0, 0, 0, 0]
    totals = [0, 0, 0, 0]
    cand_len = ref_len = 0
    for cand, ref in zip(candidates, references):
        c_tok, r_tok = _tokens(cand), _tokens(ref)
        cand_len += len(c_tok)
        ref_len += len(r_tok)
        for n in range(1, 5):
            c_ngrams = Counter(tuple(c_tok[i:i + n]) for i in range(len(c_tok) - n + 1))
            r_ngrams = Counter(tuple(r_tok[i:i + n]) for i in range(len(r_tok) - n + 1))
            totals[n - 1] += sum(c_ngrams.values())
            clipped[n - 1] += sum(min(c, r_ngrams.get(g, 0)) for g, c in c_ngrams.items())
    log_sum = 0.0
    for n in range(4):
        m, t = clipped[n], totals[n]
        if m == 0:
            m, t = m + 1, t + 1
        log_sum += 0.25 * math.log(m / t)
    if cand_len == 0:
        return 0.0
    bp = 1.0 if cand_len >= ref_len else math.exp(1.0 - ref_len / cand_len)
    return bp * math.exp(log_sum) * 100.0


def combined_score(inform: float, success: float, bleu_score: float) -> float:
    return round2((inform + success) * 0.5 + bleu_score)


def evaluate_corpus(predicted: list[DialogSession], gold: list[DialogSession],
                    db: Database) -> EvalReport:
    goals = [s.goal for s in gold]
    if any(g is None for g in goals):
        raise AlignmentError("gold sessions must carry goals")
    inform, success, flags = inform_success(predicted, goals, db)
    cands, refs = [], []
    for p, g in zip(predicted, gold):
        for pt, gt in zip(p.turns, g.turns):
            cands.append(pt.response_lex)
            refs.append(gt.response_lex)
    b = bleu(cands, refs) if cands else 0.0
    return EvalReport(
        inform=round2(inform),
        success=round2(success),
        bleu=round2(b),
        combined=combined_score(inform, success, b),
        per_session=flags,
    )


# ---------------------------------------------------------------------------
# Joint goal accuracy

def joint_goal_accuracy(predicted_beliefs: list[dict[str, str]],
                        gold_beliefs: list[dict[str, str]]) -> DstReport:
    if len(predicted_beliefs) != len(gold_beliefs):
        raise AlignmentError(
            f"{len(predicted_beliefs)} predicted turns vs {len(gold_beliefs)} gold"
        )
    per_turn = []
    for pred, gold in zip(predicted_beliefs, gold_beliefs):
        p = {s: norm_value(v) for s, v in pred.items()}
        g = {s: norm_value(v) for s, v in gold.items()}
        per_turn.append({"match": p == g})
    n = len(per_turn) or 1
    jga = 100.0 * sum(t["match"] for t in per_turn) / n
    return DstReport(joint_goal_accuracy=round2(jga), per_turn=per_turn)


def dst_report_for_sessions(predicted: list[DialogSession],
                            gold: list[DialogSession]) -> DstReport:
    pred_beliefs, gold_beliefs = [], []
    for p, g in zip(predicted, gold):
        if len(p.turns) != len(g.turns):
            raise AlignmentError(f"session {p.id}: turn count mismatch")
        pred_beliefs += [dict(t.belief.slot_values) for t in p.turns]
        gold_beliefs += [dict(t.belief.slot_values) for t in g.turns]
    return joint_goal_accuracy(pred_beliefs, gold_beliefs)


# ---------------------------------------------------------------------------
# Interactive self-play evaluation

@dataclass
class SelfplayResult:
    success_rate: float
    avg_turns_successful: float
    jga: float
    transcripts: list[DialogSession]
    per_goal: list[dict] = field(default_factory=list)


def selfplay_eval(model: DialogModel, schema: TaskSchema, n_goals: int,
                  seed: int = 0, max_turns: int = 20,
                  user_templates: TemplateStore | None = None) -> SelfplayResult:
    """Simulated users converse with the hosted model; success is judged
    online by the inform/success criteria."""
    goals = [g for g in enumerate_goals(schema, GoalConfig())
             if g.satisfiable][:n_goals]
    per_goal = []
    transcripts = []
    pred_beliefs, gold_beliefs = [], []
    successes, turn_counts = 0, []
    for i, goal in enumerate(goals):
        try:
            session, n_turns, g_beliefs = _run_dialog(
                model, schema, goal, derive_seed(seed, i), max_turns, user_templates
            )
        except TaskbotError as exc:
            per_goal.append({"goal": i, "succeeded": False, "error": str(exc)})
            continue
        agent_utts = [t.response_lex for t in session.turns]
        informed, succeeded = session_task_flags(agent_utts, goal, schema.database)
        if succeeded:
            successes += 1
            turn_counts.append(n_turns)
        per_goal.append({"goal": i, "informed": informed, "succeeded": succeeded})
        transcripts.append(session)
        pred_beliefs += [dict(t.belief.slot_values) for t in session.turns]
        gold_beliefs += [dict(b.slot_values) for b in g_beliefs]
    n = len(goals) or 1
    jga = joint_goal_accuracy(pred_beliefs, gold_beliefs).joint_goal_accuracy
    return SelfplayResult(
        success_rate=round2(100.0 * successes / n),
        avg_turns_successful=round2(sum(turn_counts) / len(turn_counts)) if turn_counts else 0.0,
        jga=jga,
        transcripts=transcripts,
        per_goal=per_goal,
    )


def _run_dialog(model, schema, goal, seed, max_turns, user_templates):
    agenda = init_agenda(goal, seed)
    conv = ConversationState(schema)
    turns: list[SessionTurn] = []
    gold_beliefs = []
    last_agent_act = None
    while len(turns) < max_turns:
        user_act, gold_belief, agenda = user_step(agenda, last_agent_act)
        user_lex, _ = realize(user_act, user_templates,
                              derive_seed(seed, 100 + len(turns)))
        record = converse_turn(conv, user_lex, model)
        agent_act = parse_agent_utterance(record.agent_utterance_lex, schema)
        turns.append(SessionTurn(
            user_utterance=user_lex,
            user_act=user_act,
            belief=record.prediction.belief,
            db_bucket=record.prediction.db_bucket,
            agent_act=agent_act,
            response_delex=record.prediction.response_delex,
            response_lex=record.agent_utterance_lex,
        ))
        gold_beliefs.append(gold_belief)
        if user_act.intent == "bye" or agent_act.intent == "bye":
            break
        last_agent_act = agent_act
    session = DialogSession(
        id=f"selfplay-{goal.domain_name}-{seed:016x}",
        domain_name=goal.domain_name,
        goal=goal,
        turns=turns,
        outcome="success" if turns else "aborted",
        provenance="logged",
    )
    return session, len(turns), gold_beliefs
