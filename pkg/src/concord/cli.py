"""Offline command-line front end.

Validates profile files, runs the analyses with deterministic table output,
replays session logs, and serves the HTTP API.  Exit codes: 0 ok,
2 validation failure, 3 search-limit exceeded, 4 corrupt log, 1 other.
"""

from __future__ import annotations

import sys
from decimal import ROUND_HALF_EVEN, Decimal
from pathlib import Path

import click

from . import cce, events, pma
from .cce import SearchLimitError
from .model import ProfileError, ValidatedProfile, Weights, load_profile
from .process import PhaseKind

EXIT_VALIDATION = 2
EXIT_LIMIT = 3
EXIT_CORRUPT_LOG = 4

FORMATS = ("csv", "tsv", "markdown")


def fmt3(value: float) -> str:
    """Locale-independent display rounding: 3 decimals, half-even."""
    return str(
        Decimal(repr(float(value))).quantize(Decimal("0.001"), rounding=ROUND_HALF_EVEN)
    )


def render_table(columns: list[str], rows: list[list[str]], fmt: str) -> str:
    if fmt == "csv":
        sep = ","
    elif fmt == "tsv":
        sep = "\t"
    else:
        header = "| " + " | ".join(columns) + " |"
        rule = "| " + " | ".join("---" for _ in columns) + " |"
        body = ["| " + " | ".join(row) + " |" for row in rows]
        return "\n".join([header, rule, *body])
    return "\n".join([sep.join(columns), *[sep.join(row) for row in rows]])


def _load(profile_path: str) -> ValidatedProfile:
    try:
        return load_profile(profile_path)
    except OSError as exc:
        click.echo(f"error: cannot read {profile_path}: {exc}", err=True)
        sys.exit(EXIT_VALIDATION)
    except ProfileError as exc:
        for violation in exc.violations:
            click.echo(f"error: {violation}", err=True)
        sys.exit(EXIT_VALIDATION)


@click.group()
def main() -> None:
    """Group-decision analysis: permissible ranges, compromise orders, sessions."""


@main.command()
@click.argument("profile_path", type=click.Path())
def validate(profile_path: str) -> None:
    """Validate a profile file."""
    vp = _load(profile_path)
    click.echo(f"ok: {vp.n} choices, {vp.m} participants")


@main.command(name="pma")
@click.argument("profile_path", type=click.Path())
@click.option("--table", "max_total", type=int, default=None, help="Also print every widening vector with total <= N.")
@click.option("--format", "fmt", type=click.Choice(FORMATS), default="tsv", show_default=True)
def cmd_pma(profile_path: str, max_total: int | None, fmt: str) -> None:
    """Find consensusable choices with minimal permissible-range widening."""
    vp = _load(profile_path)
    result = pma.analyze(vp)
    click.echo(
        f"consensus: {', '.join(result.consensus_choices)}, "
        f"total: {result.total_expansion}"
    )
    if result.immediate:
        click.echo("immediate: the base permissible ranges already intersect")
    for cid in result.consensus_choices:
        vec = ",".join(str(l) for l in result.witnesses[cid])
        click.echo(f"witness {cid}: ({vec})")
    if max_total is not None:
        pids = [p.id for p in vp.participants]
        columns = [f"l_{pid}" for pid in pids] + ["total", "intersection"]
        rows = []
        try:
            table = pma.expansion_table(vp, max_total)
        except pma.TableTooLargeError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(EXIT_LIMIT)
        for row in table:
            rows.append(
                [str(l) for l in row.expansion]
                + [str(row.total), " ".join(sorted(row.intersection)) or "-"]
            )
        click.echo(render_table(columns, rows, fmt))


@main.command(name="cce")
@click.argument("profile_path", type=click.Path())
@click.option("--w-mu", type=float, default=1.0, show_default=True)
@click.option("--w-sigma", type=float, default=1.0, show_default=True)
@click.option("--limit", type=int, default=10, show_default=True, help="Number of table rows.")
@click.option("--cce-limit", type=int, default=None, help="Override the full-search choice-count limit.")
@click.option("--format", "fmt", type=click.Choice(FORMATS), default="tsv", show_default=True)
def cmd_cce(
    profile_path: str,
    w_mu: float,
    w_sigma: float,
    limit: int,
    cce_limit: int | None,
    fmt: str,
) -> None:
    """Search all common orders for the minimal compromise score."""
    vp = _load(profile_path)
    weights = Weights(w_mu=w_mu, w_sigma=w_sigma)
    try:
        result = cce.search_full(vp, weights, max_choices=cce_limit)
        table = cce.score_table(vp, weights, limit=limit, max_choices=cce_limit)
    except SearchLimitError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_LIMIT)
    head = result.best[0]
    click.echo(
        f"consensus order: {', '.join(head.order)} "
        f"(score {fmt3(head.score)}), first: {', '.join(result.consensus_choices)}"
    )
    pids = [p.id for p in vp.participants]
    columns = ["order"] + [f"r_{pid}" for pid in pids] + ["mu", "sigma", "score"]
    rows = [
        [" ".join(entry.order)]
        + [str(r) for r in entry.r]
        + [fmt3(entry.mu), fmt3(entry.sigma), fmt3(entry.score)]
        for entry in table
    ]
    click.echo(render_table(columns, rows, fmt))


@main.command()
@click.argument("log_path", type=click.Path())
def replay(log_path: str) -> None:
    """Replay a session event log and summarize the resulting state."""
    try:
        text = Path(log_path).read_text(encoding="utf-8")
    except OSError as exc:
        click.echo(f"error: cannot read {log_path}: {exc}", err=True)
        sys.exit(EXIT_CORRUPT_LOG)
    try:
        log = events.parse_log(text)
        fold = events.replay(Path(log_path).stem, log)
    except Exception as exc:  # any invalid log is a corrupt-log failure
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_CORRUPT_LOG)
    click.echo(f"events: {len(log)}")
    phase = fold.phase()
    click.echo(f"final phase: {phase}")
    if fold.state is not None:
        state = fold.state
        click.echo(f"generation: {state.generation}")
        click.echo(f"discussion rounds: {len(state.outcomes)}")
        for ph, outcome in state.outcomes:
            verdict = (
                f"consensus on {outcome.choice}" if outcome.consensus else "no consensus"
            )
            click.echo(f"  {ph}: {verdict}")
        if state.sublated:
            for choice in state.sublated:
                click.echo(
                    f"sublated {choice.id}: {choice.label!r} "
                    f"from {', '.join(choice.sources)}"
                )
        if phase.kind is PhaseKind.CONCLUDED:
            click.echo(f"concluded: {phase.choice}")


@main.command()
@click.option("--data-dir", type=click.Path(), default="./sessions", show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
@click.option("--cce-limit", type=int, default=None, help="Override the full-search choice-count limit.")
def serve(data_dir: str, host: str, port: int, cce_limit: int | None) -> None:
    """Run the HTTP session service."""
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(data_dir, cce_limit=cce_limit), host=host, port=port)


if __name__ == "__main__":
    main()
