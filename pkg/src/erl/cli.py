"""Facilitator command line.

Subcommands: ``lint``, ``session new|resume|replay``, ``score``,
``report``, ``compare``, ``serve``, ``convert``. Works standalone against
a catalog manifest and a store directory; the web UI is optional.

Exit codes: 0 success, 1 lint errors (or warnings under ``--strict``),
2 usage error (bad arguments, unknown ids, gate violations), 3 runtime or
storage failure.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import os
import sys
from pathlib import Path

import click

from .catalog import (
    Catalog,
    IndicatorId,
    convert_block_rows,
    lint_catalog,
    load_catalog,
    parse_catalog,
)
from .errors import ErlError, OutOfOrderAnswer, ParseError, StructureError
from .points import format_points, points
from .scoring import ScoreReport, ScoringConfig, score_session
from .serialize import canonical_json
from .store import SessionStore
from .traversal import (
    AnswerValue,
    Session,
    SessionMetadata,
    current_question,
    reachable_upper_bound,
    revise_answer,
    start_session,
    submit_answer,
)

ANSWER_TOKENS = {"y": "yes", "yes": "yes", "n": "no", "no": "no", "u": "unsure", "unsure": "unsure"}


def fail(message: str, exit_code: int) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(exit_code)


def load_config(config_path: str | None) -> dict:
    path = config_path or os.environ.get("ERL_CONFIG")
    if not path:
        return {}
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        fail(f"cannot read config {path}: {exc}", 3)
    except json.JSONDecodeError as exc:
        fail(f"bad config {path}: {exc}", 2)


@click.group()
@click.option("--config", "config_path", type=str, default=None,
              help="JSON config with store/catalog/mode (or set ERL_CONFIG).")
@click.pass_context
def main(ctx, config_path):
    """Ethics readiness evaluations: lint catalogs, run sessions, track progress."""
    ctx.obj = load_config(config_path)


def _resolve(ctx_obj: dict, option: str | None, key: str, what: str):
    value = option or ctx_obj.get(key)
    if not value:
        fail(f"no {what} configured (pass --{key} or set it in the config file)", 2)
    return value


def open_catalog(ctx_obj: dict, catalog_path: str | None) -> Catalog:
    path = _resolve(ctx_obj, catalog_path, "catalog", "catalog manifest")
    try:
        return load_catalog(path)
    except OSError as exc:
        fail(f"cannot read catalog: {exc}", 3)
    except (ParseError, StructureError) as exc:
        fail(f"catalog does not parse: {exc}", 3)


def open_store(ctx_obj: dict, store_path: str | None, catalog: Catalog) -> SessionStore:
    path = _resolve(ctx_obj, store_path, "store", "store directory")
    return SessionStore(path, catalog)


def scoring_config(ctx_obj: dict, mode: str | None) -> ScoringConfig:
    chosen = mode or ctx_obj.get("mode") or "global_sum"
    try:
        return ScoringConfig(mode=chosen)
    except ValueError as exc:
        fail(str(exc), 2)


# --- lint -----------------------------------------------------------------------


@main.command("lint")
@click.argument("paths", nargs=-1, required=True, type=str)
@click.option("--strict", is_flag=True, help="Exit 1 on warnings too.")
@click.option("--tolerance", default="0.000", show_default=True,
              help="Allowed |residual| before ZERO_SUM fires.")
@click.option("--format", "fmt", type=click.Choice(["human", "json"]), default="human")
def cmd_lint(paths, strict, tolerance, fmt):
    """Check catalog files for weight-design and structural problems."""
    json_paths = [p for p in paths if p.endswith(".json")]
    if json_paths and len(paths) > 1:
        fail("pass either one catalog manifest or a list of block CSV files", 2)
    try:
        allowed_residual = points(tolerance)
    except (ValueError, ArithmeticError, TypeError):
        fail(f"bad --tolerance {tolerance!r}", 2)
    try:
        if json_paths:
            catalog = load_catalog(json_paths[0])
        else:
            sources = []
            for raw in paths:
                path = Path(raw)
                sources.append((path.stem, path.stem, path.read_text(encoding="utf-8")))
            catalog = parse_catalog(sources, catalog_id="lint", version="0")
        report = lint_catalog(catalog, zero_sum_tolerance=allowed_residual)
    except OSError as exc:
        fail(f"cannot read catalog: {exc}", 3)
    except (ParseError, StructureError) as exc:
        fail(str(exc), 1)

    if fmt == "json":
        click.echo(canonical_json(report.to_json_dict()))
    else:
        if not report.findings:
            click.echo("clean: no findings")
        for finding in report.findings:
            where = finding.block_id + (f":{finding.number}" if finding.number else "")
            residual = f" residual={format_points(finding.residual)}" if finding.residual is not None else ""
            click.echo(f"{finding.severity} {finding.code} {where}{residual}  {finding.message}")

    if report.errors or (strict and report.warnings):
        sys.exit(1)


# --- sessions --------------------------------------------------------------------


@main.group("session")
def cmd_session():
    """Run, resume, or replay evaluation sessions."""


def session_options(fn):
    fn = click.option("--catalog", "catalog_path", default=None, help="Catalog manifest path.")(fn)
    fn = click.option("--store", "store_path", default=None, help="Store directory.")(fn)
    fn = click.option("--mode", default=None, type=click.Choice(["global_sum", "block_min"]))(fn)
    return fn


def print_report(report: ScoreReport, catalog: Catalog) -> None:
    click.echo(f"\nsession {report.session_id}")
    click.echo(f"global score: {format_points(report.global_score)}  "
               f"ERL {report.erl.level} ({report.erl.label})")
    click.echo("block scores:")
    for block in report.block_scores:
        click.echo(f"  {block.block_id:<16} raw {format_points(block.raw_sum):>8}   "
                   f"normalized {format_points(block.normalized)}")
    strongest = [c for c in report.contributions if c.contribution != 0][:5]
    if strongest:
        click.echo("largest contributions:")
        for c in strongest:
            label = f"{c.block_id}:{c.indicator.id}"
            click.echo(f"  {label:<20} {c.value.verdict:<4} {format_points(c.contribution):>8}")
    if report.unsure_followups:
        click.echo("follow up (answered unsure):")
        for block_id, number in report.unsure_followups:
            text = catalog.block(block_id).indicators[number].text
            click.echo(f"  {block_id}:{number}  {text}")


def run_interactive(session: Session, store: SessionStore, config: ScoringConfig) -> None:
    catalog = session.catalog
    click.echo("answer with y / n / u (unsure, counts as no); q saves a draft and quits")
    while (key := current_question(session)) is not None:
        block_id, number = key
        indicator = catalog.block(block_id).indicators[number]
        remaining = reachable_upper_bound(session)
        click.echo(f"\n[{len(session.answers)} answered, at most {remaining} to go] "
                   f"{block_id} {number}")
        click.echo(f"  {indicator.text}")
        while True:
            token = click.prompt("answer", default="", show_default=False).strip().lower()
            if token == "q":
                store.save_session(session.metadata.use_case_id, session, config)
                click.echo(f"draft saved as session {session.session_id}")
                return
            if token in ANSWER_TOKENS:
                break
            click.echo("  please answer y, n, u, or q")
        verdict = ANSWER_TOKENS[token]
        value = AnswerValue("no", unsure=True) if verdict == "unsure" else AnswerValue(verdict)
        comment = click.prompt("comment", default="", show_default=False).strip() or None
        submit_answer(session, key, value, comment)

    store.save_session(session.metadata.use_case_id, session, config)
    click.echo(f"\nsession complete and saved as {session.session_id}")
    print_report(score_session(session, config), catalog)


@cmd_session.command("new")
@session_options
@click.option("--blocks", required=True, help="Comma-separated block ids, in order.")
@click.option("--use-case", "use_case_id", required=True)
@click.option("--title", default="")
@click.option("--participants", default="", help="Comma-separated participant roles.")
@click.option("--trl", default=None)
@click.option("--date", "session_date", default="", help="Session date (YYYY-MM-DD), default today.")
@click.pass_obj
def session_new(ctx_obj, catalog_path, store_path, mode, blocks, use_case_id, title,
                participants, trl, session_date):
    """Start an interactive evaluation session."""
    catalog = open_catalog(ctx_obj, catalog_path)
    store = open_store(ctx_obj, store_path, catalog)
    config = scoring_config(ctx_obj, mode)
    metadata = SessionMetadata(
        use_case_id=use_case_id,
        title=title,
        participants=tuple(p.strip() for p in participants.split(",") if p.strip()),
        trl=trl,
        session_date=session_date,
    )
    try:
        session = start_session(catalog, [b.strip() for b in blocks.split(",") if b.strip()], metadata)
    except ErlError as exc:
        fail(str(exc), 2)
    try:
        run_interactive(session, store, config)
    except ErlError as exc:
        fail(str(exc), 3)


@cmd_session.command("resume")
@session_options
@click.argument("session_id")
@click.pass_obj
def session_resume(ctx_obj, catalog_path, store_path, mode, session_id):
    """Continue a saved draft session."""
    catalog = open_catalog(ctx_obj, catalog_path)
    store = open_store(ctx_obj, store_path, catalog)
    config = scoring_config(ctx_obj, mode)
    try:
        use_case_id = store.find_session(session_id)
        session = store.load_session(use_case_id, session_id)
    except ErlError as exc:
        fail(str(exc), 2)
    if session.state == "complete":
        fail(f"session {session_id} is already complete", 2)
    try:
        run_interactive(session, store, config)
    except ErlError as exc:
        fail(str(exc), 3)


@cmd_session.command("replay")
@session_options
@click.option("--answers", "answers_path", required=True, type=str,
              help="CSV with header block_id,number,answer,comment.")
@click.option("--blocks", required=True, help="Comma-separated block ids, in order.")
@click.option("--use-case", "use_case_id", required=True)
@click.option("--date", "session_date", default="")
@click.option("--quiet", is_flag=True, help="Suppress the final report.")
@click.pass_obj
def session_replay(ctx_obj, catalog_path, store_path, mode, answers_path, blocks,
                   use_case_id, session_date, quiet):
    """Apply an answers file non-interactively; must follow the question order."""
    catalog = open_catalog(ctx_obj, catalog_path)
    store = open_store(ctx_obj, store_path, catalog)
    config = scoring_config(ctx_obj, mode)
    metadata = SessionMetadata(use_case_id=use_case_id, session_date=session_date)
    try:
        session = start_session(catalog, [b.strip() for b in blocks.split(",") if b.strip()], metadata)
    except ErlError as exc:
        fail(str(exc), 2)

    try:
        text = Path(answers_path).read_text(encoding="utf-8")
    except OSError as exc:
        fail(f"cannot read answers file: {exc}", 3)
    reader = csv.reader(text.splitlines())
    header = next(reader, None)
    if header != ["block_id", "number", "answer", "comment"]:
        fail(f"answers file needs header block_id,number,answer,comment, got {header}", 2)

    for lineno, row in enumerate(reader, start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != 4:
            fail(f"answers line {lineno}: expected 4 columns", 2)
        block_id, number, token, comment = (cell.strip() for cell in row)
        if token.lower() not in ANSWER_TOKENS:
            fail(f"answers line {lineno}: bad answer token {token!r}", 2)
        verdict = ANSWER_TOKENS[token.lower()]
        value = AnswerValue("no", unsure=True) if verdict == "unsure" else AnswerValue(verdict)
        try:
            submit_answer(session, (block_id, IndicatorId.parse(number)), value, comment or None)
        except (OutOfOrderAnswer, ErlError, ValueError) as exc:
            fail(f"answers line {lineno} ({block_id},{number}): {exc}", 2)

    try:
        store.save_session(use_case_id, session, config)
    except ErlError as exc:
        fail(str(exc), 3)
    state = "complete" if session.state == "complete" else "draft"
    click.echo(f"replayed {len(session.answers)} answers; session {session.session_id} saved ({state})")
    if not quiet:
        print_report(score_session(session, config), catalog)


# --- scoring / reporting --------------------------------------------------------------


@main.command("score")
@session_options
@click.argument("session_id")
@click.option("--format", "fmt", type=click.Choice(["human", "json", "csv"]), default="human")
@click.pass_obj
def cmd_score(ctx_obj, catalog_path, store_path, mode, session_id, fmt):
    """Recompute and print the score report for a stored session."""
    catalog = open_catalog(ctx_obj, catalog_path)
    store = open_store(ctx_obj, store_path, catalog)
    try:
        use_case_id = store.find_session(session_id)
        record = store.use_case(use_case_id)
        session = store.load_session(use_case_id, session_id)
    except ErlError as exc:
        fail(str(exc), 2)
    config = dataclasses.replace(record.config, mode=mode) if mode else record.config
    report = score_session(session, config)
    if fmt == "json":
        click.echo(canonical_json(report.to_json_dict()))
    elif fmt == "csv":
        click.echo(report.contributions_csv(), nl=False)
        click.echo()
        click.echo(report.block_scores_csv(), nl=False)
    else:
        print_report(report, catalog)


@main.command("report")
@session_options
@click.option("--use-case", "use_case_id", required=True)
@click.option("--session", "session_id", default=None,
              help="Session for breakdown/block output (default: latest).")
@click.option("--format", "fmt", type=click.Choice(["json", "csv", "md"]), default="md")
@click.pass_obj
def cmd_report(ctx_obj, catalog_path, store_path, mode, use_case_id, session_id, fmt):
    """Emit the use case's timeline plus the chosen session's breakdown."""
    catalog = open_catalog(ctx_obj, catalog_path)
    store = open_store(ctx_obj, store_path, catalog)
    try:
        record = store.use_case(use_case_id)
        timeline = store.timeline(use_case_id)
    except ErlError as exc:
        fail(str(exc), 2)

    report = None
    if record.sessions:
        chosen = session_id or record.sessions[-1]["session_id"]
        try:
            session = store.load_session(use_case_id, chosen)
        except ErlError as exc:
            fail(str(exc), 2)
        report = score_session(session, record.config)

    if fmt == "json":
        payload = {"timeline": timeline.to_json_dict()}
        if report:
            payload["latest"] = report.to_json_dict()
        click.echo(canonical_json(payload))
    elif fmt == "csv":
        if report:
            click.echo(report.block_scores_csv(), nl=False)
        else:
            click.echo(timeline.to_csv(), nl=False)
    else:
        click.echo(f"# Ethics readiness report: {record.title or use_case_id}\n")
        click.echo("## Timeline\n")
        click.echo("| session | date | global score | ERL |")
        click.echo("| --- | --- | --- | --- |")
        for point in timeline.points:
            click.echo(f"| {point.session_id} | {point.session_date} | "
                       f"{format_points(point.global_score)} | {point.erl_level} |")
        if report:
            click.echo("\n## Breakdown (largest impact first)\n")
            click.echo("| indicator | verdict | contribution |")
            click.echo("| --- | --- | --- |")
            for c in report.contributions:
                click.echo(f"| {c.block_id}:{c.indicator.id} | {c.value.verdict} | "
                           f"{format_points(c.contribution)} |")
            click.echo("\n## To do (answered unsure)\n")
            if report.unsure_followups:
                for block_id, number in report.unsure_followups:
                    text = catalog.block(block_id).indicators[number].text
                    click.echo(f"- [ ] {block_id}:{number} {text}")
            else:
                click.echo("- nothing flagged")


@main.command("compare")
@session_options
@click.option("--from", "from_id", required=True)
@click.option("--to", "to_id", required=True)
@click.option("--format", "fmt", type=click.Choice(["json", "csv", "md"]), default="md")
@click.pass_obj
def cmd_compare(ctx_obj, catalog_path, store_path, mode, from_id, to_id, fmt):
    """Diff two sessions of the same use case."""
    catalog = open_catalog(ctx_obj, catalog_path)
    store = open_store(ctx_obj, store_path, catalog)
    try:
        diff = store.diff_sessions(from_id, to_id)
    except ErlError as exc:
        fail(str(exc), 2)
    if fmt == "json":
        click.echo(canonical_json(diff.to_json_dict()))
    elif fmt == "csv":
        click.echo(diff.block_deltas_csv(), nl=False)
    else:
        click.echo(f"# {from_id} -> {to_id}\n")
        click.echo(f"global delta: {format_points(diff.global_delta)} "
                   f"(ERL {diff.erl_change[0]} -> {diff.erl_change[1]})\n")
        click.echo("| block | old | new | delta |")
        click.echo("| --- | --- | --- | --- |")
        for d in diff.block_deltas:
            click.echo(f"| {d['block_id']} | {d['old']} | {d['new']} | {d['delta']} |")
        if diff.answer_changes:
            click.echo("\nanswer changes:")
            for change in diff.answer_changes:
                old = change["old"]["verdict"] if change["old"] else "-"
                new = change["new"]["verdict"] if change["new"] else "-"
                click.echo(f"- {change['block_id']}:{change['number']}  {old} -> {new}")


# --- serve / convert ----------------------------------------------------------------


@main.command("serve")
@session_options
@click.option("--bind", default="127.0.0.1:8000", show_default=True)
@click.option("--token", default=None, help="Require this bearer token on /v1 routes.")
@click.option("--ui", "ui_dir", default=None, type=str, help="Static UI directory to mount at /.")
@click.pass_obj
def cmd_serve(ctx_obj, catalog_path, store_path, mode, bind, token, ui_dir):
    """Serve the HTTP API (and optionally the web console)."""
    import uvicorn

    from .service import create_app

    catalog = open_catalog(ctx_obj, catalog_path)
    report = lint_catalog(catalog)
    for finding in report.warnings:
        click.echo(f"lint warning: {finding.code} {finding.block_id}"
                   f"{':' + str(finding.number) if finding.number else ''}", err=True)
    if report.errors:
        fail("catalog has lint errors; fix them before serving", 3)
    store = open_store(ctx_obj, store_path, catalog)
    config = scoring_config(ctx_obj, mode)
    app = create_app({catalog.catalog_id: catalog}, store, config, token=token, ui_dir=ui_dir)
    host, _, port = bind.partition(":")
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port or 8000))


@main.command("convert")
@click.argument("source", type=str)
@click.option("-o", "--output", default="-", help="Output file (default stdout).")
def cmd_convert(source, output):
    """Convert an externally-maintained indicator CSV to the catalog format."""
    try:
        with open(source, newline="", encoding="utf-8") as handle:
            rows = list(csv.reader(handle))
    except OSError as exc:
        fail(f"cannot read {source}: {exc}", 3)
    try:
        text = convert_block_rows(rows)
    except ParseError as exc:
        fail(str(exc), 2)
    if output == "-":
        click.echo(text, nl=False)
    else:
        Path(output).write_text(text, encoding="utf-8")
        click.echo(f"wrote {output}")


if __name__ == "__main__":
    main()
