"""Command line entry points: mine, rules extract, serve, replay, bench, synth."""
from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import bench as bench_mod
from .errors import HomeseqError
from .events import (
    SymbolPolicy,
    SymbolTable,
    group_exclusion_filter,
    parse_log,
    serialize_log,
    symbolize,
    user_event_filter,
)
from .rules import ActionCatalog, extract_rules, write_rules_jsonl, read_rules_jsonl
from .service import compute_metrics, create_app, replay_log
from .store import JournalStore
from .wsdd import MiningParams, mine as wsdd_mine, write_patterns_jsonl


@click.group()
def main():
    """Smart-home sequence mining and energy-saving recommendations."""


def _load_log(path: str, fmt: str):
    with open(path, "rb") as fh:
        result = parse_log(fh, fmt)
    if result.skipped:
        click.echo(f"skipped {result.skipped}/{result.total_lines} malformed lines", err=True)
    return result.log


@main.command("mine")
@click.argument("log_path", type=click.Path(exists=True))
@click.option("--min-support", default=0.01, show_default=True)
@click.option("--max-window", default=5, show_default=True)
@click.option("--wildcards", default=0, show_default=True)
@click.option("--format", "fmt", default="jsonl", type=click.Choice(["jsonl", "csv"]))
@click.option("--policy", default="device", type=click.Choice(["device", "group"]))
@click.option("--actions", "actions_path", type=click.Path(exists=True), default=None,
              help="Catalog config; enables user-source filtering when it lists user_sources.")
@click.option("--all-sources", is_flag=True, help="Mine every source, not just user events.")
@click.option("--exclude-groups", default="", show_default=True,
              help="Comma-separated device groups to drop (e.g. broadcast,unknown).")
@click.option("--out", "out_path", default="patterns.jsonl", show_default=True)
@click.option("--symbols", "symbols_path", default="symbols.jsonl", show_default=True)
def mine_cmd(log_path, min_support, max_window, wildcards, fmt, policy,
             actions_path, all_sources, exclude_groups, out_path, symbols_path):
    """Mine frequent/periodic patterns from an event log."""
    log = _load_log(log_path, fmt)
    if actions_path and not all_sources:
        catalog = ActionCatalog.from_file(actions_path)
        if catalog.user_sources:
            log = log.filter(user_event_filter(catalog.user_sources))
    if exclude_groups:
        banned = [g.strip() for g in exclude_groups.split(",") if g.strip()]
        log = log.filter(group_exclusion_filter(banned))
    seq, table = symbolize(log, SymbolPolicy(policy))
    params = MiningParams(max_window=max_window, min_support=min_support,
                          max_wildcards=wildcards)
    patterns = wsdd_mine(seq, log.timestamps(), params)
    Path(out_path).write_bytes(write_patterns_jsonl(patterns, event_count=len(seq)))
    Path(symbols_path).write_bytes(table.to_jsonl())
    click.echo(f"{len(patterns)} patterns -> {out_path}; symbol table -> {symbols_path}")


@main.group("rules")
def rules_group():
    """Association-rule commands."""


@rules_group.command("extract")
@click.argument("patterns_path", type=click.Path(exists=True))
@click.option("--actions", "actions_path", type=click.Path(exists=True), required=True)
@click.option("--log", "log_path", type=click.Path(exists=True), required=True,
              help="Source log; antecedent/consequent counts are taken from it.")
@click.option("--format", "fmt", default="jsonl", type=click.Choice(["jsonl", "csv"]))
@click.option("--policy", default="device", type=click.Choice(["device", "group"]))
@click.option("--symbols", "symbols_path", type=click.Path(exists=True), default=None)
@click.option("--action-last-only", is_flag=True)
@click.option("--out", "out_path", default="rules.jsonl", show_default=True)
def rules_extract(patterns_path, actions_path, log_path, fmt, policy, symbols_path,
                  action_last_only, out_path):
    """Turn mined patterns into X -> Y rules with support and confidence."""
    from .wsdd import Pattern, PeriodicityInfo

    catalog = ActionCatalog.from_file(actions_path)
    log = _load_log(log_path, fmt)
    if symbols_path:
        table = SymbolTable.from_jsonl(Path(symbols_path).read_bytes(), SymbolPolicy(policy))
        seq = [table.assign(ev) for ev in log]
    else:
        seq, table = symbolize(log, SymbolPolicy(policy))

    patterns = []
    for line in Path(patterns_path).read_text().splitlines():
        if not line.strip():
            continue
        rec = json.loads(line)
        patterns.append(Pattern(
            symbols=tuple(rec["pattern"]),
            support_count=int(rec["count"]),
            relative_support=float(rec["rel_support"]),
            occurrence_starts=(),
            periodicity=PeriodicityInfo(bool(rec.get("periodic")), rec.get("mean_interval_s"), None),
        ))
    extracted = extract_rules(patterns, catalog.bind(table), seq,
                              home_id=log.home_id, action_last_only=action_last_only)
    Path(out_path).write_bytes(write_rules_jsonl(extracted))
    click.echo(f"{len(extracted)} rules -> {out_path}")


@main.command("serve")
@click.option("--port", default=8080, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--data-dir", default="./homeseq-data", show_default=True)
@click.option("--rules", "rules_path", type=click.Path(exists=True), default=None)
@click.option("--symbols", "symbols_path", type=click.Path(exists=True), default=None)
@click.option("--token", default=None, help="Static API token; unset disables auth.")
@click.option("--ui-dir", default=None, type=click.Path(exists=True))
def serve_cmd(port, host, data_dir, rules_path, symbols_path, token, ui_dir):
    """Run the HTTP API (and optionally the browser UI)."""
    import uvicorn

    store = JournalStore(data_dir)
    if symbols_path:
        store.register_symbol_table(SymbolTable.from_jsonl(Path(symbols_path).read_bytes()))
    if rules_path:
        store.register_rules(read_rules_jsonl(Path(rules_path).read_bytes()))
    app = create_app(store, api_token=token, ui_dir=ui_dir)
    uvicorn.run(app, host=host, port=port)


@main.command("replay")
@click.argument("log_path", type=click.Path(exists=True))
@click.option("--speed", default=1000.0, show_default=True,
              help="Real-time multiplier; 0 replays as fast as possible.")
@click.option("--data-dir", default="./homeseq-data", show_default=True)
@click.option("--rules", "rules_path", type=click.Path(exists=True), default=None)
@click.option("--symbols", "symbols_path", type=click.Path(exists=True), default=None)
@click.option("--format", "fmt", default="jsonl", type=click.Choice(["jsonl", "csv"]))
def replay_cmd(log_path, speed, data_dir, rules_path, symbols_path, fmt):
    """Replay a log through the recommender and print emissions."""
    store = JournalStore(data_dir)
    if symbols_path:
        store.register_symbol_table(SymbolTable.from_jsonl(Path(symbols_path).read_bytes()))
    if rules_path:
        store.register_rules(read_rules_jsonl(Path(rules_path).read_bytes()))
    log = _load_log(log_path, fmt)
    emitted = replay_log(store, log, speed=speed)
    for rec in emitted:
        click.echo(f"{rec.created_at:%Y-%m-%d %H:%M:%S} {rec.home_id} {rec.id}: {rec.text}")
    click.echo(f"{len(emitted)} recommendations")
    snap = compute_metrics(store)
    click.echo(json.dumps(snap.to_record(), indent=2))


@main.command("bench")
@click.argument("source")
@click.option("--miners", default="wsdd,prefix_growth,brute_force", show_default=True)
@click.option("--min-support", default=0.01, show_default=True)
@click.option("--max-window", default=5, show_default=True)
@click.option("--repeats", default=5, show_default=True)
@click.option("--timeout", default=600.0, show_default=True)
@click.option("--format", "fmt", default="jsonl", type=click.Choice(["jsonl", "csv"]))
@click.option("--out", "out_path", default="bench.csv", show_default=True)
def bench_cmd(source, miners, min_support, max_window, repeats, timeout, fmt, out_path):
    """Benchmark miners on a log file or a synthetic spec (json/toml)."""
    if source.endswith((".json", ".toml")):
        spec = bench_mod.spec_from_file(source)
        seq, timestamps, _ = bench_mod.symbol_sequence(spec)
        name = f"synthetic-{spec.event_count}"
    else:
        log = _load_log(source, fmt)
        seq, _ = symbolize(log)
        timestamps = list(log.timestamps())
        name = Path(source).name
    rows = bench_mod.run_benchmark(
        [(name, seq, timestamps)],
        [MiningParams(max_window=max_window, min_support=min_support)],
        miners=[m.strip() for m in miners.split(",") if m.strip()],
        repeats=repeats,
        timeout_s=timeout,
    )
    Path(out_path).write_text(bench_mod.write_report_csv(rows))
    click.echo(bench_mod.write_report_csv(rows))


@main.command("synth")
@click.argument("spec_path", type=click.Path(exists=True))
@click.option("--out", "out_path", default="synthetic.jsonl", show_default=True)
@click.option("--manifest", "manifest_path", default="manifest.json", show_default=True)
def synth_cmd(spec_path, out_path, manifest_path):
    """Generate a synthetic event log with planted ground truth."""
    spec = bench_mod.spec_from_file(spec_path)
    log, manifest = bench_mod.generate(spec)
    Path(out_path).write_bytes(serialize_log(log))
    Path(manifest_path).write_text(manifest.to_json())
    click.echo(f"{len(log)} events -> {out_path}; manifest -> {manifest_path}")


def entry() -> None:  # pragma: no cover
    try:
        main()
    except HomeseqError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)


if __name__ == "__main__":  # pragma: no cover
    entry()
