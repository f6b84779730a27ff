"""Command-line surface: assemble, lint, export, score, alt-test, serve.

The CLI stays a thin client over the core package; ``serve`` speaks
JSON-lines over stdio by default (trainers spawn the scorer as a
subprocess) or runs the HTTP service with --http.

Exit codes: 0 success (lint: nothing at warning level; alt-test: passed),
1 lint warnings / alt-test failed, 2 schema or config problems, 3
unreadable or malformed input files.
"""
from __future__ import annotations

import json
import random
import sys
from pathlib import Path
from typing import IO

import click

from . import linter
from .alttest import AnnotationTable, alt_test
from .assemble import graph_from_json, graph_to_json, merge_minigraphs
from .errors import ConfigError, ContractGraphError, SchemaError
from .export import EXPORT_FORMATS, export_graph
from .guards import json_stop_index, token_allowed
from .ingest import minigraph_from_json, parse_contract_file
from .reward import (
    GateState,
    RewardConfig,
    evaluate_dataset,
    gated_reward_step,
    group_advantages,
    score_prediction,
)


def _echo(ctx: click.Context, message: str) -> None:
    if not ctx.obj.get("quiet"):
        click.echo(message, err=True)


def _fail(message: str, code: int) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _load_reward_config(path: str | None) -> RewardConfig:
    if path is None:
        return RewardConfig()
    try:
        text = Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        _fail(f"cannot read reward config {path}: {exc}", 3)
    try:
        return RewardConfig.from_json(text)
    except ConfigError as exc:
        _fail(str(exc), 2)
    raise AssertionError("unreachable")


@click.group()
@click.option("--config", "config_path", default=None, help="Reward config JSON file.")
@click.option("--quiet", is_flag=True, help="Suppress progress messages.")
@click.option("--seed", type=int, default=None, help="Seed for randomized utilities.")
@click.pass_context
def main(ctx: click.Context, config_path: str | None, quiet: bool, seed: int | None) -> None:
    """Contract graph assembly, linting, scoring, and annotation statistics."""
    ctx.ensure_object(dict)
    ctx.obj["config_path"] = config_path
    ctx.obj["quiet"] = quiet
    if seed is not None:
        random.seed(seed)


@main.command()
@click.argument("contract_file")
@click.argument("minigraph_dir")
@click.option("--output", "-o", default=None, help="Graph JSON path (default <contract_id>.graph.json).")
@click.option("--report", default=None, help="Merge report path (default <contract_id>.merge_report.json).")
@click.pass_context
def assemble(
    ctx: click.Context,
    contract_file: str,
    minigraph_dir: str,
    output: str | None,
    report: str | None,
) -> None:
    """Merge per-clause minigraphs (<clause_id>.json files) into a contract graph."""
    try:
        contract_bytes = Path(contract_file).read_bytes()
    except OSError as exc:
        _fail(f"cannot read {contract_file}: {exc}", 3)
    try:
        doc = parse_contract_file(contract_bytes)
    except SchemaError as exc:
        _fail(f"{contract_file}: {exc}", 2)

    directory = Path(minigraph_dir)
    if not directory.is_dir():
        _fail(f"cannot read {minigraph_dir}: not a directory", 3)
    minigraphs = {}
    schema_failures = []
    for path in sorted(directory.glob("*.json")):
        clause_id = path.stem.strip()
        try:
            text = path.read_text(encoding="utf-8")
        except (OSError, UnicodeDecodeError) as exc:
            _fail(f"cannot read {path}: {exc}", 3)
        if clause_id in minigraphs:
            _fail(f"duplicate minigraph for clause {clause_id}", 2)
        try:
            minigraphs[clause_id] = minigraph_from_json(text, source_clause=clause_id)
        except SchemaError as exc:
            schema_failures.append(f"{path}: {exc}")
    if schema_failures:
        _fail("schema errors in minigraph files:\n" + "\n".join(schema_failures), 2)

    try:
        graph, merge_report = merge_minigraphs(doc.contract_id, list(minigraphs.values()))
    except ContractGraphError as exc:
        _fail(str(exc), 2)
    known_clauses = {clause.clause_id for clause in doc.clauses}
    for clause_id in sorted(minigraphs):
        if clause_id not in known_clauses:
            merge_report.notes.append(f"minigraph for unknown clause: {clause_id}")
    for clause in doc.clauses:
        if clause.clause_id not in minigraphs:
            merge_report.notes.append(f"no minigraph for clause: {clause.clause_id}")
    if not minigraphs:
        merge_report.notes.append("warning: empty minigraph directory")

    output_path = Path(output or f"{doc.contract_id}.graph.json")
    report_path = Path(report or f"{doc.contract_id}.merge_report.json")
    output_path.write_text(graph_to_json(graph), encoding="utf-8")
    report_path.write_text(
        json.dumps(merge_report.to_obj(), sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )
    _echo(ctx, f"wrote {output_path} ({graph.node_count} nodes, {graph.edge_count} edges)")
    _echo(ctx, f"wrote {report_path}")


def _load_graph(path: str):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        _fail(f"cannot read {path}: {exc}", 3)
    try:
        return graph_from_json(text)
    except SchemaError as exc:
        _fail(f"{path}: {exc}", 3)
    raise AssertionError("unreachable")


@main.command()
@click.argument("graph_file")
@click.option("--thresholds", "thresholds_file", default=None, help="Thresholds JSON file.")
@click.option("--path-from", "path_from", default=None, help="Also list paths from this node key.")
@click.option("--path-to", "path_to", default=None, help="Path query destination node key.")
@click.option("--max-paths", type=int, default=10, show_default=True, help="Path query cap.")
@click.option("--max-len", type=int, default=12, show_default=True, help="Path length cap (edges).")
@click.pass_context
def lint(
    ctx: click.Context,
    graph_file: str,
    thresholds_file: str | None,
    path_from: str | None,
    path_to: str | None,
    max_paths: int,
    max_len: int,
) -> None:
    """Compute the metric suite over a graph and exit 0/1/2 by finding severity."""
    graph = _load_graph(graph_file)
    thresholds = None
    if thresholds_file is not None:
        try:
            obj = json.loads(Path(thresholds_file).read_text(encoding="utf-8"))
        except (OSError, UnicodeDecodeError) as exc:
            _fail(f"cannot read {thresholds_file}: {exc}", 3)
        except json.JSONDecodeError as exc:
            _fail(f"{thresholds_file}: malformed JSON: {exc.msg}", 2)
        try:
            thresholds = linter.LintThresholds.from_obj(obj)
        except ConfigError as exc:
            _fail(f"{thresholds_file}: {exc}", 2)
    report = linter.lint_report(graph, thresholds)
    payload = report.to_obj()
    if (path_from is None) != (path_to is None):
        raise click.UsageError("--path-from and --path-to must be given together")
    if path_from is not None and path_to is not None:
        try:
            payload["paths"] = linter.find_paths(graph, path_from, path_to, max_paths, max_len)
        except SchemaError as exc:
            _fail(str(exc), 2)
    click.echo(json.dumps(payload, sort_keys=True, indent=2))
    sys.exit(linter.exit_code(report))


@main.command()
@click.argument("graph_file")
@click.option("--format", "fmt", type=click.Choice(EXPORT_FORMATS), required=True)
@click.option("--output", "-o", default=None, help="Output path (default stdout).")
@click.pass_context
def export(ctx: click.Context, graph_file: str, fmt: str, output: str | None) -> None:
    """Export a graph as graph-json, DOT, or GraphML."""
    graph = _load_graph(graph_file)
    content = export_graph(graph, fmt)
    if output is None:
        click.echo(content, nl=False)
    else:
        Path(output).write_text(content, encoding="utf-8")
        _echo(ctx, f"wrote {output}")


@main.command()
@click.option("--gold", "gold_file", default=None, help="Gold minigraph JSON file.")
@click.option("--prediction", "prediction_file", default=None, help="Raw prediction text file.")
@click.option("--pairs", "pairs_file", default=None, help="JSONL of {prediction, gold} pairs.")
@click.pass_context
def score(
    ctx: click.Context,
    gold_file: str | None,
    prediction_file: str | None,
    pairs_file: str | None,
) -> None:
    """Score one prediction against its gold graph, or a JSONL dataset."""
    config = _load_reward_config(ctx.obj.get("config_path"))
    if pairs_file is not None:
        if gold_file or prediction_file:
            raise click.UsageError("--pairs excludes --gold/--prediction")
        try:
            lines = Path(pairs_file).read_text(encoding="utf-8").splitlines()
        except (OSError, UnicodeDecodeError) as exc:
            _fail(f"cannot read {pairs_file}: {exc}", 3)
        pairs = []
        for lineno, line in enumerate(lines, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                gold = minigraph_from_json(obj["gold"], source_clause=obj.get("source_clause", ""))
                pairs.append((obj["prediction"], gold))
            except (json.JSONDecodeError, KeyError, SchemaError) as exc:
                _fail(f"{pairs_file}:{lineno}: {exc}", 2)
        report = evaluate_dataset(pairs, config)
        click.echo(json.dumps(report.to_obj(), sort_keys=True, indent=2))
        return
    if gold_file is None or prediction_file is None:
        raise click.UsageError("either --pairs or both --gold and --prediction are required")
    try:
        gold_text = Path(gold_file).read_text(encoding="utf-8")
        prediction = Path(prediction_file).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        _fail(f"cannot read input: {exc}", 3)
    try:
        gold = minigraph_from_json(gold_text)
    except SchemaError as exc:
        _fail(f"{gold_file}: {exc}", 2)
    scores, outcome = score_prediction(gold, prediction, config)
    # One-shot inspection scores against every component, gates wide open.
    state = GateState(config=config, stage=len(config.stages) - 1)
    breakdown, _ = gated_reward_step(scores, state)
    payload = breakdown.to_obj()
    payload["classification"] = outcome.classification.value
    click.echo(json.dumps(payload, sort_keys=True, indent=2))


@main.command("alt-test")
@click.argument("table_file")
@click.option("--epsilon", type=float, default=0.1, show_default=True, help="LLM handicap.")
@click.option("--q", type=float, default=0.05, show_default=True, help="FDR level.")
@click.pass_context
def alt_test_command(ctx: click.Context, table_file: str, epsilon: float, q: float) -> None:
    """Decide whether LLM labels may replace human annotators."""
    try:
        text = Path(table_file).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        _fail(f"cannot read {table_file}: {exc}", 3)
    try:
        table = AnnotationTable.from_json(text)
        report = alt_test(table, epsilon=epsilon, q=q)
    except (SchemaError, ConfigError) as exc:
        _fail(str(exc), 2)
    click.echo(report.to_json(), nl=False)
    sys.exit(0 if report.passed else 1)


def run_scoring_loop(stdin: IO[str], stdout: IO[str], config: RewardConfig) -> None:
    """JSON-lines request/response loop; one gate state per session.

    Malformed lines get an error response and the loop continues; only a
    shutdown request or closed stdin ends it. Responses preserve request
    order.
    """
    state = GateState(config=config)

    def respond(payload: dict) -> None:
        stdout.write(json.dumps(payload, sort_keys=True) + "\n")
        stdout.flush()

    for line in stdin:
        if not line.strip():
            continue
        try:
            request = json.loads(line)
        except json.JSONDecodeError as exc:
            respond({"id": None, "error": f"malformed JSON line: {exc.msg}"})
            continue
        if not isinstance(request, dict):
            respond({"id": None, "error": "request must be a JSON object"})
            continue
        request_id = request.get("id")
        op = request.get("op")
        try:
            if op == "shutdown":
                respond({"id": request_id, "ok": True})
                break
            if op == "score":
                gold = minigraph_from_json(
                    request["gold"], source_clause=str(request.get("source_clause", ""))
                )
                scores, outcome = score_prediction(gold, str(request["prediction"]), config)
                breakdown, state = gated_reward_step(scores, state)
                respond(
                    {
                        "id": request_id,
                        "step": request.get("step"),
                        "classification": outcome.classification.value,
                        "breakdown": breakdown.to_obj(),
                        "gates": state.summary(),
                    }
                )
            elif op == "group":
                respond({"id": request_id, "advantages": group_advantages(request["rewards"])})
            elif op == "stop_index":
                respond(
                    {
                        "id": request_id,
                        "stop_index": json_stop_index(
                            str(request["text"]), int(request.get("prompt_length", 0))
                        ),
                    }
                )
            elif op == "token_allowed":
                respond({"id": request_id, "allowed": token_allowed(str(request["token"]))})
            else:
                respond({"id": request_id, "error": f"unknown op: {op!r}"})
        except KeyError as exc:
            respond({"id": request_id, "error": f"missing field: {exc.args[0]!r}"})
        except (ContractGraphError, ValueError, TypeError) as exc:
            respond({"id": request_id, "error": str(exc)})


@main.command()
@click.option("--http", "use_http", is_flag=True, help="Run the HTTP service instead of stdio.")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
@click.pass_context
def serve(ctx: click.Context, use_http: bool, host: str, port: int) -> None:
    """Run the scoring service: JSON-lines over stdio, or HTTP with --http."""
    config = _load_reward_config(ctx.obj.get("config_path"))
    if use_http:
        import uvicorn

        from .service import create_app

        uvicorn.run(create_app(config), host=host, port=port, log_level="warning")
        return
    run_scoring_loop(sys.stdin, sys.stdout, config)


if __name__ == "__main__":
    main()
