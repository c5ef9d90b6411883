"""Console rendering of configurations, run summaries and sweep results."""

from typing import Dict, Sequence

from rich import box
from rich.table import Table
from rich.text import Text

from .clocks import Status
from .trace import Trace, unison_part


def _status_badge(report_ok: bool) -> Text:
    if report_ok:
        return Text(" PASS ", style="white on green")
    return Text(" FAIL ", style="white on red")


def configuration_table(cfg, system, title: str = "Configuration") -> Table:
    """One row per node: state, root flag and the rule it could fire."""
    roots = system.roots(cfg)
    rules = system.enabled_rules(cfg)
    table = Table(title=title, box=box.SIMPLE_HEAVY)
    table.add_column("Node", justify="right", style="bold")
    table.add_column("Status", justify="center")
    table.add_column("Clock", justify="right")
    if cfg and hasattr(cfg[0], "curr"):
        table.add_column("Old", justify="right", style="dim")
        table.add_column("Curr", justify="right")
    table.add_column("Root", justify="center")
    table.add_column("Enabled", justify="center")

    for p, state in enumerate(cfg):
        plain = unison_part(state)
        status = Text(plain.status.value, style="red" if plain.status is Status.E else "green")
        row = [str(p), status, str(plain.clock)]
        if hasattr(state, "curr"):
            row += [str(state.old), str(state.curr)]
        row.append("●" if p in roots else "")
        row.append(str(rules[p]) if p in rules else "-")
        table.add_row(*row)
    return table


def summary_table(trace: Trace, metrics: Dict, title: str = "Run summary") -> Table:
    table = Table(title=title, show_header=False, box=box.ROUNDED)
    table.add_column("Field", style="cyan")
    table.add_column("Value")
    header = trace.header
    table.add_row("Nodes / diameter", f"{header.topology.n} / {metrics.get('D')}")
    table.add_row("Period B", str(header.B))
    table.add_row("Daemon", header.daemon)
    table.add_row("P_aux", header.paux)
    if header.algorithm:
        table.add_row("Algorithm", header.algorithm)
    table.add_row("Steps", str(len(trace.steps)))
    moves = metrics.get("moves", {})
    table.add_row("Moves", "  ".join(f"{k}={v}" for k, v in moves.items()))
    rounds = metrics.get("rounds_to_clean")
    table.add_row("Rounds to clean", "not reached" if rounds is None else str(rounds))
    table.add_row("Termination", trace.termination.value)
    return table


def reports_table(reports: Sequence) -> Table:
    table = Table(title="Checks", box=box.SIMPLE)
    table.add_column("Family", style="bold")
    table.add_column("Result", justify="center")
    table.add_column("Checks", justify="right")
    table.add_column("First violation", overflow="fold")
    for report in reports:
        first = report.violations[0] if report.violations else None
        table.add_row(
            report.name,
            _status_badge(report.ok),
            str(len(report.checks)),
            "" if first is None else f"{first.check} (step {first.step}): {first.message}",
        )
    return table


def campaign_table(results: Sequence) -> Table:
    table = Table(title="Sweep", box=box.SIMPLE_HEAVY)
    for name, justify in (("Cell", "left"), ("n", "right"), ("B", "right"), ("D", "right"),
                          ("Traces", "right"), ("Max moves", "right"), ("Max rounds", "right"), ("Result", "center")):
        table.add_column(name, justify=justify)
    for r in results:
        table.add_row(
            r.label, str(r.n), str(r.B), str(r.D), str(r.traces), str(r.total_moves),
            "-" if r.rounds_to_clean is None else str(r.rounds_to_clean),
            _status_badge(r.status == "pass"),
        )
    return table

