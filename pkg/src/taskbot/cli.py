"""Operator command line: every pipeline capability scriptable without the UI."""
from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import packs
from .corpus import export_jsonl, import_jsonl, to_training_sequences
from .errors import TaskbotError
from .evalkit import dst_report_for_sessions, evaluate_corpus, selfplay_eval
from .hashing import fnv1a64
from .nlg import load_templates, realize, realize_sketch
from .acts import parse_act
from .hashing import derive_seed
from .runtime import ExternalModel, ReferenceModel, ExemplarStore, apply_corrections
from .schema import GoalConfig, parse_schema, validate_schema
from .selfplay import GenerationConfig, generate_corpus, replay_check


def _load_schema(path):
    return parse_schema(Path(path).read_text(encoding="utf-8"))


def _load_templates(path):
    if path is None:
        return None
    return load_templates(Path(path).read_text(encoding="utf-8"))


def _emit(data: dict, as_json: bool):
    if as_json:
        click.echo(json.dumps(data, indent=2, sort_keys=True))
    else:
        for key in sorted(data):
            if isinstance(data[key], (int, float, str, bool)):
                click.echo(f"{key}: {data[key]}")


@click.group(context_settings={"auto_envvar_prefix": "SYNERGY"})
def main():
    """Schema-driven task bot toolkit."""


# -- schema ----------------------------------------------------------------

@main.group()
def schema():
    """Schema authoring commands."""


@schema.command("validate")
@click.argument("path", type=click.Path(exists=True))
@click.option("--json", "as_json", is_flag=True)
def schema_validate(path, as_json):
    """Parse and validate a schema document; exit 1 on findings."""
    try:
        parsed = _load_schema(path)
    except TaskbotError as exc:
        _emit({"valid": False, "error": str(exc)}, as_json)
        sys.exit(1)
    report = validate_schema(parsed)
    findings = [
        {"severity": f.severity, "path": f.path, "message": f.message}
        for f in report.findings
    ]
    if as_json:
        click.echo(json.dumps({"valid": report.ok, "findings": findings}, indent=2))
    else:
        for f in findings:
            click.echo(f"{f['severity']}: {f['path']}: {f['message']}")
        click.echo("valid" if report.ok else "invalid")
    if not report.ok:
        sys.exit(1)


@main.command("pack")
@click.option("--out", type=click.Path(), default="pack",
              help="Directory for the built-in example schemas.")
def pack(out):
    """Write the built-in three-domain schema pack."""
    for path in packs.write_pack(out):
        click.echo(str(path))


# -- generation ------------------------------------------------------------

@main.command()
@click.option("--schema", "schema_path", required=True, type=click.Path(exists=True))
@click.option("--templates", "templates_path", type=click.Path(exists=True))
@click.option("--seed", default=0, type=int)
@click.option("--out", required=True, type=click.Path())
@click.option("--sequences-out", type=click.Path(),
              help="Also write training sequences (aborted sketches excluded).")
@click.option("--max-sketches", type=int)
@click.option("--max-turns", default=20, type=int)
@click.option("--include-unsatisfiable/--satisfiable-only", default=True)
@click.option("--jobs", default=1, type=int)
@click.option("--json", "as_json", is_flag=True)
def generate(schema_path, templates_path, seed, out, sequences_out,
             max_sketches, max_turns, include_unsatisfiable, jobs, as_json):
    """Generate a simulated, fully annotated dialog corpus."""
    parsed = _load_schema(schema_path)
    store = _load_templates(templates_path)
    config = GenerationConfig(
        seed=seed,
        max_turns=max_turns,
        goal_config=GoalConfig(include_unsatisfiable=include_unsatisfiable, seed=seed),
        max_sketches=max_sketches,
        jobs=jobs,
    )
    sketches = generate_corpus(parsed, config)
    bad = [i for i, s in enumerate(sketches) if not replay_check(s, parsed)]
    if bad:
        raise click.ClickException(f"replay check failed for sketches {bad[:5]}")
    sessions = [realize_sketch(s, store, derive_seed(seed, 1_000_000 + i))
                for i, s in enumerate(sketches)]
    digest = f"{fnv1a64(repr(config).encode()):016x}"
    export_jsonl(sessions, out, domain=parsed.domain_name, config_digest=digest)
    if sequences_out:
        with open(sequences_out, "w", encoding="utf-8") as fh:
            for session in sessions:
                if session.outcome == "aborted":
                    continue
                for seq in to_training_sequences(session):
                    fh.write(seq.text + "\n")
    outcomes = {}
    for s in sketches:
        outcomes[s.outcome] = outcomes.get(s.outcome, 0) + 1
    _emit({"sessions": len(sessions), "out": str(out), **outcomes}, as_json)


# -- nlg -------------------------------------------------------------------

@main.group()
def nlg():
    """Template NLG utilities."""


@nlg.command("preview")
@click.option("--act", "act_text", required=True,
              help='Act in text form, e.g. "inform(price=moderate, stars=4)".')
@click.option("--speaker", type=click.Choice(["user", "agent"]), default="agent")
@click.option("--templates", "templates_path", type=click.Path(exists=True))
@click.option("--seed", default=0, type=int)
def nlg_preview(act_text, speaker, templates_path, seed):
    """Render a dialog act from the command line."""
    act = parse_act(act_text, speaker)
    store = _load_templates(templates_path)
    lex, delex = realize(act, store, seed)
    click.echo(f"lex:   {lex}")
    click.echo(f"delex: {delex}")


# -- evaluation ------------------------------------------------------------

@main.group("eval")
def eval_group():
    """Corpus, DST, and interactive evaluation."""


def _report_out(data: dict, report_dir, as_json: bool, fail_under):
    if report_dir:
        from .report import write_report

        write_report(data, report_dir)
    _emit(data, as_json)
    if fail_under is not None:
        gate = data.get("combined", data.get("success_rate", data.get("jga")))
        if gate is not None and gate < fail_under:
            sys.exit(1)


@eval_group.command("corpus")
@click.option("--pred", required=True, type=click.Path(exists=True))
@click.option("--gold", required=True, type=click.Path(exists=True))
@click.option("--schema", "schema_path", required=True, type=click.Path(exists=True))
@click.option("--json", "as_json", is_flag=True)
@click.option("--report-dir", type=click.Path())
@click.option("--fail-under", type=float)
def eval_corpus(pred, gold, schema_path, as_json, report_dir, fail_under):
    """Inform / Success / BLEU / Combined against a gold corpus."""
    parsed = _load_schema(schema_path)
    pred_sessions, _ = import_jsonl(pred)
    gold_sessions, _ = import_jsonl(gold)
    report = evaluate_corpus(pred_sessions, gold_sessions, parsed.database)
    data = {"inform": report.inform, "success": report.success,
            "bleu": report.bleu, "combined": report.combined}
    _report_out(data, report_dir, as_json, fail_under)


@eval_group.command("dst")
@click.option("--pred", required=True, type=click.Path(exists=True))
@click.option("--gold", required=True, type=click.Path(exists=True))
@click.option("--json", "as_json", is_flag=True)
@click.option("--fail-under", type=float)
def eval_dst(pred, gold, as_json, fail_under):
    """Joint goal accuracy of predicted belief states."""
    pred_sessions, _ = import_jsonl(pred)
    gold_sessions, _ = import_jsonl(gold)
    report = dst_report_for_sessions(pred_sessions, gold_sessions)
    data = {"jga": report.joint_goal_accuracy,
            "turns": len(report.per_turn)}
    _report_out(data, None, as_json, fail_under)


@eval_group.command("selfplay")
@click.option("--schema", "schema_path", required=True, type=click.Path(exists=True))
@click.option("--templates", "templates_path", type=click.Path(exists=True))
@click.option("--endpoint", help="External model endpoint; default reference model.")
@click.option("--n-goals", default=50, type=int)
@click.option("--seed", default=0, type=int)
@click.option("--max-turns", default=20, type=int)
@click.option("--transcripts-out", type=click.Path())
@click.option("--json", "as_json", is_flag=True)
@click.option("--report-dir", type=click.Path())
@click.option("--fail-under", type=float)
def eval_selfplay(schema_path, templates_path, endpoint, n_goals, seed,
                  max_turns, transcripts_out, as_json, report_dir, fail_under):
    """Interactive evaluation: simulated users converse with the model."""
    parsed = _load_schema(schema_path)
    store = _load_templates(templates_path)
    if endpoint:
        model = ExternalModel(endpoint, parsed)
    else:
        model = ReferenceModel(parsed, templates=None)
    result = selfplay_eval(model, parsed, n_goals, seed, max_turns, store)
    if transcripts_out:
        export_jsonl(result.transcripts, transcripts_out, domain=parsed.domain_name)
    data = {
        "success_rate": result.success_rate,
        "avg_turns_successful": result.avg_turns_successful,
        "jga": result.jga,
        "n_goals": len(result.per_goal),
        "turn_counts": [len(t.turns) for t in result.transcripts],
    }
    _report_out(data, report_dir, as_json, fail_under)


# -- service ---------------------------------------------------------------

@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True))
@click.option("--schema", "schema_path", type=click.Path(exists=True))
@click.option("--data-dir", type=click.Path())
@click.option("--templates", "templates_path", type=click.Path(exists=True))
@click.option("--endpoint")
@click.option("--host")
@click.option("--port", type=int)
@click.option("--ui-dir", type=click.Path())
def serve(config_path, schema_path, data_dir, templates_path, endpoint,
          host, port, ui_dir):
    """Run the machine-teaching HTTP service."""
    from .teachsvc import ServiceConfig, create_app

    config = ServiceConfig.load(
        config_path,
        schema_path=schema_path,
        data_dir=data_dir,
        templates_path=templates_path,
        model_endpoint=endpoint,
        host=host,
        port=port,
        ui_dir=ui_dir,
    )
    import uvicorn

    uvicorn.run(create_app(config), host=config.host, port=config.port)


@main.command()
@click.option("--data-dir", required=True, type=click.Path(exists=True))
@click.option("--schema", "schema_path", required=True, type=click.Path(exists=True))
@click.option("--out", required=True, type=click.Path())
@click.option("--since")
def export(data_dir, schema_path, out, since):
    """Export the corrected teaching corpus from a service data directory."""
    from .teachsvc import LogStore

    parsed = _load_schema(schema_path)
    store = LogStore(data_dir)
    sessions = store.export_teaching_corpus(parsed, since=since)
    export_jsonl(sessions, out, domain=parsed.domain_name)
    click.echo(f"exported {len(sessions)} corrected sessions to {out}")


@main.command()
@click.option("--data-dir", required=True, type=click.Path(exists=True))
@click.option("--schema", "schema_path", required=True, type=click.Path(exists=True))
@click.option("--handoff-dir", type=click.Path(),
              help="Write corpus handoff files instead of exemplar injection.")
def retrain(data_dir, schema_path, handoff_dir):
    """Fold corrections into the reference model's exemplar store."""
    from .teachsvc import LogStore

    parsed = _load_schema(schema_path)
    store = LogStore(data_dir)
    if not store.corrections:
        raise click.ClickException("no corrections recorded")
    if handoff_dir:
        sessions = store.export_teaching_corpus(parsed)
        handoff = Path(handoff_dir)
        handoff.mkdir(parents=True, exist_ok=True)
        export_jsonl(sessions, handoff / "teaching_corpus.jsonl",
                     domain=parsed.domain_name)
        with open(handoff / "teaching_sequences.txt", "w", encoding="utf-8") as fh:
            for session in sessions:
                for seq in to_training_sequences(session):
                    fh.write(seq.text + "\n")
        click.echo(f"handoff written to {handoff}")
        return
    exemplar_path = Path(data_dir) / "exemplars.json"
    exemplars = ExemplarStore()
    if exemplar_path.exists():
        exemplars = ExemplarStore.from_json(
            json.loads(exemplar_path.read_text(encoding="utf-8")))
    exemplars = apply_corrections(exemplars, store.corrections, store.sessions)
    exemplar_path.write_text(json.dumps(exemplars.to_json(), indent=2),
                             encoding="utf-8")
    click.echo(f"exemplar store now holds {len(exemplars)} entries")


if __name__ == "__main__":
    main()
