"""
Interfejs wiersza poleceń ``tvcreeper`` (Click przez ``flask.cli.FlaskGroup``).

Potok: ``crawl`` -> ``submodel`` -> ``gen`` -> ``run`` -> ``mutate`` (+ ``report``, ``verify``).
Każda komenda czyta i zapisuje wyłącznie udokumentowane artefakty JSON; artefakty
niosą skróty poprzedników, więc nieaktualny plik pośredni jest odrzucany.

Kody wyjścia: 0 sukces, 3 błąd walidacji / nieaktualny artefakt / nieznany cel,
4 krawędzie nie do pokrycia, 5 werdykt inny niż ``pass``, 6 brak mutantów.
"""

import functools
import logging
from pathlib import Path

import click
from flask import current_app
from flask.cli import FlaskGroup, with_appcontext
from sqlalchemy import text

from artifacts import (
    check_lineage,
    content_hash,
    read_artifact,
    read_json,
    verify_artifacts,
    write_artifact,
)
from creeper.crawler import CrawlConfig, crawl
from creeper.errors import (
    EXIT_NO_MUTANTS,
    EXIT_NOT_PASSED,
    EXIT_UNCOVERABLE,
    EXIT_VALIDATION,
    CreeperError,
    SpecSchemaError,
    ValidationError,
)
from creeper.executor import execute_keys, execute_suite, verdicts_to_document
from creeper.graph import (
    MODEL_SCHEMA,
    export_dot,
    extract_sub_model,
    find_node,
    load_model,
    save_model,
)
from creeper.mutation import (
    MUTANTS_SCHEMA,
    OPERATOR_HEADERS,
    PATH_HEADERS,
    MutationOperator,
    apply_mutant,
    enumerate_mutants,
    format_report,
    mutants_from_document,
    mutants_to_document,
    parse_operators,
    path_rows,
    render_table,
    report_to_document,
    run_campaign,
)
from creeper.testgen import (
    SUITE_SCHEMA,
    format_keys,
    generate_tests,
    parse_keys,
    suite_from_document,
    suite_to_document,
)
from creeper.tvsim import derive_nav_from_grid, parse_app_spec
from extensions import db
from models import CampaignRecord, CrawlRecord

app_logger = logging.getLogger("application")
error_logger = logging.getLogger("error")


def reports_errors(command):
    """Zamienia :class:`CreeperError` na komunikat i kod wyjścia komendy."""

    @functools.wraps(command)
    def wrapper(*args, **kwargs):
        try:
            return command(*args, **kwargs)
        except CreeperError as e:
            app_logger.warning("COMMAND_REJECTED", extra={
                'event': 'CLI',
                'error': type(e).__name__,
                'detail': str(e),
            })
            failure = click.ClickException(str(e))
            failure.exit_code = e.exit_code
            raise failure from e

    return wrapper


def _load_spec(path):
    """Specyfikacja (z nawigacją uzupełnioną z siatki) i jej surowy dokument do skrótów."""
    document = read_json(path)
    if not isinstance(document, dict):
        raise SpecSchemaError("dokument specyfikacji musi być obiektem", str(path))
    return derive_nav_from_grid(parse_app_spec(document)), document


def _inject_mutant(spec, spec_document, mutants_path, mutant_id):
    """Specyfikacja z jednym mutantem z pliku ``mutants.json`` (zapisanego dla tej aplikacji)."""
    document = read_artifact(mutants_path, MUTANTS_SCHEMA)
    check_lineage(document, "spec", spec_document)
    mutant = next((m for m in mutants_from_document(document) if m.id == mutant_id), None)
    if mutant is None:
        raise ValidationError(f"nieznany mutant '{mutant_id}'", str(mutants_path))
    app_logger.info("MUTANT_INJECTED", extra={
        'event': 'EXECUTE',
        'mutant': mutant.id,
        'fatal': mutant.fatal,
    })
    return apply_mutant(spec, mutant)


def _should_record(flag):
    return current_app.config['RECORD_HISTORY'] if flag is None else flag


def _jobs(value):
    return value if value is not None else current_app.config['JOBS']


def _save(record):
    try:
        db.session.add(record)
        db.session.commit()
    except Exception:
        db.session.rollback()
        error_logger.error("HISTORY_WRITE_FAILED", exc_info=True, extra={'event': 'DB'})
        click.echo("Uwaga: nie udało się zapisać historii w bazie danych.", err=True)


def _parse_ops(ctx, param, value):
    if not value:
        return None
    try:
        return parse_operators(value)
    except ValueError as e:
        raise click.BadParameter(f"nieznany operator ({e})") from e


@click.command("crawl")
@click.argument("spec_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--focus", help="Punkt fokusu (gdy ekran główny nie ma initialFocus).")
@click.option("--max-actions", type=int, default=None, help="Limit naciśnięć sondujących.")
@click.option("--out", "out_path", default="model.json", show_default=True, type=click.Path(dir_okay=False))
@click.option("--dot", "dot_path", default=None, type=click.Path(dir_okay=False), help="Eksport GraphViz DOT.")
@click.option("--record/--no-record", default=None, help="Zapis statystyk w historii.")
@with_appcontext
@reports_errors
def crawl_command(spec_path, focus, max_actions, out_path, dot_path, record):
    """Eksploruje aplikację i zapisuje mega-model."""
    spec, spec_document = _load_spec(spec_path)
    if max_actions is None:
        max_actions = current_app.config['MAX_ACTIONS']
    result = crawl(spec, CrawlConfig(max_actions=max_actions, focus=focus))

    write_artifact(out_path, save_model(result.model), upstream=spec_document)
    if dot_path:
        Path(dot_path).write_text(export_dot(result.model), encoding="utf-8")
    if _should_record(record):
        _save(CrawlRecord.from_result(result, content_hash(spec_document)))

    click.echo(f"Mega-model '{spec.name}': {len(result.model.nodes)} węzłów, "
               f"{len(result.model.edges)} krawędzi, {len(result.model.end_nodes)} węzłów końcowych, "
               f"{result.actions_used} akcji{' (przerwano limitem)' if result.truncated else ''}.")


@click.command("submodel")
@click.argument("model_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--dest", "destinations", multiple=True, required=True,
              help="Id lub etykieta węzła docelowego (można powtarzać).")
@click.option("--out", "out_path", default="submodel.json", show_default=True, type=click.Path(dir_okay=False))
@click.option("--dot", "dot_path", default=None, type=click.Path(dir_okay=False))
@with_appcontext
@reports_errors
def submodel_command(model_path, destinations, out_path, dot_path):
    """Wycina pod-model prowadzący do wskazanych celów."""
    document = read_artifact(model_path, MODEL_SCHEMA)
    model = load_model(document)
    sub = extract_sub_model(model, [find_node(model, d) for d in destinations])

    write_artifact(out_path, save_model(sub), upstream=document)
    if dot_path:
        Path(dot_path).write_text(export_dot(sub), encoding="utf-8")
    click.echo(f"Pod-model: {len(sub.nodes)} węzłów, {len(sub.edges)} krawędzi, "
               f"cele: {', '.join(sorted(sub.destinations))}.")


@click.command("gen")
@click.argument("model_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_path", default="suite.json", show_default=True, type=click.Path(dir_okay=False))
@click.option("--keys", "keys_path", default=None, type=click.Path(dir_okay=False), help="Plik .keys.")
@with_appcontext
@reports_errors
def gen_command(model_path, out_path, keys_path):
    """Generuje zestaw testów All Edge Coverage z (pod-)modelu."""
    document = read_artifact(model_path, MODEL_SCHEMA)
    model = load_model(document)
    suite = generate_tests(model)

    write_artifact(out_path, suite_to_document(suite, focus=model.node(model.start).widget), upstream=document)
    if keys_path:
        Path(keys_path).write_text(format_keys(suite), encoding="utf-8")

    click.echo(f"Zestaw: {len(suite.tests)} testów, pokryte krawędzie: {len(suite.covered_edges)}.")
    if suite.uncoverable:
        click.echo(f"Krawędzie nie do pokrycia: {', '.join(sorted(suite.uncoverable))}", err=True)
        click.get_current_context().exit(EXIT_UNCOVERABLE)


@click.command("run")
@click.argument("spec_path", type=click.Path(exists=True, dir_okay=False))
@click.argument("suite_path", required=False, type=click.Path(exists=True, dir_okay=False))
@click.option("--keys", "keys_path", default=None, type=click.Path(exists=True, dir_okay=False),
              help="Plik .keys odtwarzany zamiast zestawu (tylko wykrywanie błędów).")
@click.option("--mutant", "mutant_id", default=None, help="Id mutanta wstrzykiwanego przed wykonaniem.")
@click.option("--mutants", "mutants_path", default="mutants.json", show_default=True,
              type=click.Path(dir_okay=False), help="Plik mutantów dla --mutant.")
@click.option("--focus", default=None)
@click.option("--out", "out_path", default="verdicts.json", show_default=True, type=click.Path(dir_okay=False))
@click.option("--jobs", type=click.IntRange(min=1), default=None, help="Liczba wątków.")
@with_appcontext
@reports_errors
def run_command(spec_path, suite_path, keys_path, mutant_id, mutants_path, focus, out_path, jobs):
    """
    Wykonuje zestaw testów (albo sekwencje z pliku .keys) na aplikacji i zapisuje werdykty.

    Sekwencje z ``--keys`` nie mają oczekiwanych węzłów, więc oceniane są tylko
    po błędach zgłoszonych przez aplikację. ``--mutant`` odtwarza wykonanie na
    aplikacji z jednym mutantem z kampanii.
    """
    if (suite_path is None) == (keys_path is None):
        raise click.UsageError("podaj albo SUITE_PATH, albo --keys")
    spec, spec_document = _load_spec(spec_path)
    if mutant_id:
        spec = _inject_mutant(spec, spec_document, mutants_path, mutant_id)
    if keys_path:
        sequences = parse_keys(Path(keys_path).read_text(encoding="utf-8"))
        verdicts = [execute_keys(spec, keys, focus) for keys in sequences]
        write_artifact(out_path, verdicts_to_document(verdicts), upstream=spec_document)
    else:
        suite_document = read_artifact(suite_path, SUITE_SCHEMA)
        check_lineage(suite_document, "spec", spec_document)
        suite = suite_from_document(suite_document)
        verdicts = execute_suite(spec, suite, focus or suite_document.get("focus"), _jobs(jobs))
        write_artifact(out_path, verdicts_to_document(verdicts), upstream=suite_document)

    for i, verdict in enumerate(verdicts):
        step = "" if verdict.failed_step is None else f" (klawisz {verdict.failed_step + 1})"
        app_logger.info("TEST_EXECUTED", extra={
            'event': 'EXECUTE',
            'test': i,
            'outcome': verdict.outcome.value,
            'failed_step': verdict.failed_step,
        })
        click.echo(f"Test {i + 1}: {verdict.outcome.value}{step}")
    failed = sum(not v.passed for v in verdicts)
    click.echo(f"Zaliczone: {len(verdicts) - failed}/{len(verdicts)}.")
    if failed:
        click.get_current_context().exit(EXIT_NOT_PASSED)


@click.command("mutate")
@click.argument("spec_path", type=click.Path(exists=True, dir_okay=False))
@click.argument("suite_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--ops", callback=_parse_ops, default=None, help="Operatory, np. RAR,NEE (domyślnie wszystkie).")
@click.option("--scope", "scope_path", default=None, type=click.Path(exists=True, dir_okay=False),
              help="Pod-model ograniczający miejsca mutacji.")
@click.option("--fatal", is_flag=True, default=False, help="Każdy mutant zatrzymuje aplikację.")
@click.option("--focus", default=None)
@click.option("--jobs", type=click.IntRange(min=1), default=None)
@click.option("--mutants", "mutants_path", default="mutants.json", show_default=True,
              type=click.Path(dir_okay=False))
@click.option("--reuse", "reuse_path", default=None, type=click.Path(exists=True, dir_okay=False),
              help="Ponowna kampania na mutantach z wcześniejszego mutants.json.")
@click.option("--out", "out_path", default="report.json", show_default=True, type=click.Path(dir_okay=False))
@click.option("--table", "table_path", default=None, type=click.Path(dir_okay=False))
@click.option("--record/--no-record", default=None)
@with_appcontext
@reports_errors
def mutate_command(spec_path, suite_path, ops, scope_path, fatal, focus, jobs,
                   mutants_path, reuse_path, out_path, table_path, record):
    """Kampania mutacyjna: wylicza mutanty, wykonuje zestaw dla każdego i liczy wynik."""
    if reuse_path and (ops or scope_path or fatal):
        raise click.UsageError("--reuse wyklucza --ops, --scope i --fatal")
    spec, spec_document = _load_spec(spec_path)
    suite_document = read_artifact(suite_path, SUITE_SCHEMA)
    check_lineage(suite_document, "spec", spec_document)
    suite = suite_from_document(suite_document)

    scope = None
    if scope_path:
        scope_document = read_artifact(scope_path, MODEL_SCHEMA)
        check_lineage(scope_document, "spec", spec_document)
        scope = load_model(scope_document)

    if reuse_path:
        mutants_document = read_artifact(reuse_path, MUTANTS_SCHEMA)
        check_lineage(mutants_document, "suite", suite_document)
        mutants = mutants_from_document(mutants_document)
    else:
        mutants = enumerate_mutants(spec, ops, scope=scope, fatal=fatal)
        write_artifact(mutants_path, mutants_to_document(mutants), upstream=suite_document)

    report = run_campaign(spec, suite, mutants, focus or suite_document.get("focus"), _jobs(jobs))
    write_artifact(out_path, report_to_document(report, spec.name), upstream=suite_document)
    table = format_report(report, spec.name)
    if table_path:
        Path(table_path).write_text(table, encoding="utf-8")
    if _should_record(record):
        _save(CampaignRecord.from_report(report, spec.name, content_hash(suite_document)))

    click.echo(table, nl=False)
    if report.score is None:
        click.echo("Brak mutantów - wynik mutacyjny niezdefiniowany.", err=True)
        click.get_current_context().exit(EXIT_NO_MUTANTS)


@click.command("report")
@with_appcontext
def report_command():
    """Historia kampanii (zabicia per ścieżka, operatory) i crawlingów z bazy danych."""
    campaigns = CampaignRecord.query.order_by(CampaignRecord.id_campaign).all()
    if not campaigns:
        click.echo("Brak zapisanych kampanii.")
    else:
        path_table, operator_table = [], []
        for campaign in campaigns:
            path_table.extend(path_rows(campaign.app_name, [p.killed_new for p in campaign.paths],
                                        campaign.killed, campaign.alive, campaign.score))
            for i, operator in enumerate(campaign.operators):
                operator_table.append([campaign.app_name if i == 0 else "", operator.operator,
                                       MutationOperator(operator.operator).title, operator.mutants])
            operator_table.append(["", "", "Total Number", campaign.mutants])
        click.echo(render_table(PATH_HEADERS, path_table))
        click.echo(render_table(OPERATOR_HEADERS, operator_table), nl=False)

    crawls = db.session.execute(text(
        "SELECT app_name, COUNT(*) AS runs, MAX(nodes) AS nodes, MAX(edges) AS edges, "
        "AVG(elapsed_ms) AS elapsed_ms FROM crawl GROUP BY app_name ORDER BY app_name"
    )).fetchall()
    if crawls:
        click.echo()
        click.echo(render_table(
            ("Application", "Crawls", "Nodes", "Edges", "Avg ms"),
            [[c.app_name, c.runs, c.nodes, c.edges, f"{c.elapsed_ms:.0f}"] for c in crawls],
        ), nl=False)


@click.command("verify")
@click.argument("paths", nargs=-1, required=True, type=click.Path(dir_okay=False))
@with_appcontext
def verify_command(paths):
    """Sprawdza spójność łańcucha skrótów podanych artefaktów."""
    issues = verify_artifacts(paths)
    for issue in issues:
        click.echo(f"NARUSZENIE: {issue}", err=True)
    if issues:
        click.get_current_context().exit(EXIT_VALIDATION)
    click.echo(f"Łańcuch artefaktów spójny ({len(paths)} plików).")


COMMANDS = (crawl_command, submodel_command, gen_command, run_command,
            mutate_command, report_command, verify_command)


def register_commands(app):
    for command in COMMANDS:
        app.cli.add_command(command)


def _create_app():
    from app import create_app

    return create_app()


#: Punkt wejścia skryptu ``tvcreeper``.
main = FlaskGroup(
    name="tvcreeper",
    create_app=_create_app,
    add_default_commands=False,
    help="Testowanie oparte na modelach dla aplikacji Smart TV.",
)


if __name__ == "__main__":
    main()
