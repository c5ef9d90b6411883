import json as _json
import logging
import random
import sys

import click
from rich.console import Console
from rich.logging import RichHandler

from unison_sim.cli.run_spec import RunSpec
from unison_sim.core.algorithms import MinIdBfs, MinPropagation
from unison_sim.core.campaign import Campaign, run_campaign, write_observations
from unison_sim.core.errors import InputError, InternalInvariantBroken, NotClean, UnisonError
from unison_sim.core.scheduler import run_execution
from unison_sim.core.synchronizer import (
    SynchronizerSystem,
    attach_algorithm,
    check_lazy_bounds,
    check_simulation_equivalence,
    check_time_invariants,
    reconstruct_eta,
    stop_at_time,
    system_for_header,
)
from unison_sim.core.trace_io import read_trace, write_trace
from unison_sim.core.unison import PAUX_REGISTRY, UnisonSystem, paux_from_name
from unison_sim.core.verifier import check_bounds, check_invariants
from unison_sim.core.visualiser import (
    campaign_table,
    configuration_table,
    reports_table,
    summary_table,
)

console = Console()

EXIT_OK = 0
EXIT_INVARIANT = 1
EXIT_BOUND = 2
EXIT_INPUT = 3

INVARIANT_FAMILIES = ("invariants", "simulation", "times")


class UnisonGroup(click.Group):
    """Click group that maps every usage or input error to exit code 3."""

    def main(self, *args, **kwargs):
        kwargs["standalone_mode"] = False
        try:
            return super().main(*args, **kwargs)
        except click.exceptions.Exit as e:
            sys.exit(e.exit_code)
        except click.ClickException as e:
            e.show()
            sys.exit(EXIT_INPUT)
        except click.Abort:
            click.echo("Aborted!", err=True)
            sys.exit(EXIT_INPUT)
        except UnisonError as e:
            click.echo(f"Error: {e}", err=True)
            sys.exit(EXIT_INPUT)


@click.group(cls=UnisonGroup)
@click.option("--verbose", "-v", is_flag=True, help="Log simulator progress to stderr.")
def cli(verbose):
    """Self-stabilizing asynchronous unison: simulate, verify and sweep."""
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.WARNING,
        format="%(message)s",
        handlers=[RichHandler(console=Console(stderr=True), show_path=False)],
        force=True,
    )


def _execution_options(stop_on_default):
    def decorate(f):
        options = [
            click.option("--graph", required=True, help="file:PATH or gen:KIND:PARAMS (path, ring, star, grid, random, complete)."),
            click.option("--B", "period", default="auto", show_default=True, help="Clock period, or 'auto' for max(4, 2D+2)."),
            click.option("--init", default="random", show_default=True, help="random, clean-uniform:c, all-error-floor or file:PATH."),
            click.option("--daemon", default="dist-random:0.5", show_default=True, help="sync, central-random, dist-random:P or scripted:0|0,1|2."),
            click.option("--seed", default=0, show_default=True, type=int),
            click.option("--max-steps", default=10_000, show_default=True, type=click.IntRange(min=0)),
            click.option("--stop-on", default=stop_on_default, show_default=True, type=click.Choice(["terminal", "clean", "never"])),
            click.option("--out", default="trace.jsonl", show_default=True, type=click.Path(dir_okay=False), help="Where to write the JSONL trace."),
            click.option("--json", "as_json", is_flag=True, help="Print the summary as JSON."),
        ]
        for option in reversed(options):
            f = option(f)
        return f

    return decorate


def _exit_code(reports) -> int:
    if any(not r.ok for r in reports if r.name in INVARIANT_FAMILIES):
        return EXIT_INVARIANT
    if any(not r.ok for r in reports):
        return EXIT_BOUND
    return EXIT_OK


def _status(code: int) -> str:
    return {EXIT_OK: "pass", EXIT_INVARIANT: "invariant-violation", EXIT_BOUND: "bound-violation"}[code]


def _summary(trace, metrics) -> dict:
    return {
        "n": trace.header.topology.n,
        "B": trace.header.B,
        "D": metrics.get("D"),
        "daemon": trace.header.daemon,
        "paux": trace.header.paux,
        "steps": len(trace.steps),
        "moves": metrics.get("moves", {}),
        "total_moves": metrics.get("total_moves", 0),
        "rounds_to_clean": metrics.get("rounds_to_clean"),
        "termination": trace.termination.value,
    }


def _verify_all(trace, system):
    reports = [check_invariants(trace, system), check_bounds(trace, system), check_time_invariants(trace, system)]
    if trace.header.algorithm is not None:
        reports.append(check_simulation_equivalence(trace, system.alg))
        if system.mode == "lazy":
            reports.append(check_lazy_bounds(trace, system))
    return reports


@cli.command()
@_execution_options("clean")
@click.option("--paux", default="greedy", show_default=True, type=click.Choice(sorted(PAUX_REGISTRY)))
@click.option("--show", is_flag=True, help="Render the final configuration.")
def run(graph, period, init, daemon, seed, max_steps, stop_on, out, as_json, paux, show):
    """Run one execution and write its trace."""
    spec = RunSpec(graph, period, init, daemon, paux, seed, max_steps, stop_on, out)
    resolved = spec.resolve()
    system = UnisonSystem(resolved.topology, resolved.B, paux_from_name(paux))
    trace = run_execution(system, resolved.initial, resolved.daemon, resolved.limits, seed=seed)
    write_trace(trace, out)
    metrics = check_bounds(trace, system).metrics

    if as_json:
        click.echo(_json.dumps(_summary(trace, metrics), indent=2))
    else:
        console.print(summary_table(trace, metrics))
        if show:
            console.print(configuration_table(trace.configurations()[-1], system, title="Final configuration"))
        click.echo(f"Trace written to {out}")
    sys.exit(EXIT_OK)


@cli.command()
@click.argument("trace_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--table", is_flag=True, help="Show a table instead of the JSON report.")
@click.option("--report", "report_path", type=click.Path(dir_okay=False), help="Also write the JSON report to a file.")
def verify(trace_path, table, report_path):
    """Replay a trace and check every invariant and bound on it."""
    trace = read_trace(trace_path)
    system = system_for_header(trace.header)
    reports = _verify_all(trace, system)
    code = _exit_code(reports)

    result = {
        "invariants": [v.to_dict() for r in reports if r.name in INVARIANT_FAMILIES for v in r.violations],
        "bounds": [v.to_dict() for r in reports if r.name not in INVARIANT_FAMILIES for v in r.violations],
        "status": _status(code),
        "reports": [r.to_dict() for r in reports],
    }
    if report_path:
        with open(report_path, "w", encoding="utf-8") as f:
            _json.dump(result, f, indent=2)
    if table:
        console.print(reports_table(reports))
        click.echo(f"Status: {result['status']}")
    else:
        click.echo(_json.dumps(result, indent=2))
    sys.exit(code)


def _int_list(text, option):
    try:
        return [int(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise InputError(f"{option} expects comma-separated integers, got '{text}'") from None


@cli.command()
@_execution_options("terminal")
@click.option("--alg", "alg_name", default="min-prop", show_default=True, type=click.Choice(["min-prop", "min-id-bfs"]))
@click.option("--mode", default="lazy", show_default=True, type=click.Choice(["greedy", "lazy"]))
@click.option("--values", default=None, help="min-prop inputs, e.g. 5,2,9 (default: random).")
@click.option("--ids", default=None, help="min-id-bfs identifiers (default: a shuffle of 1..n).")
@click.option("--max-dist", default=None, type=click.IntRange(min=0), help="min-id-bfs distance cap (default: n).")
@click.option("--until-time", default=None, type=click.IntRange(min=0), help="Stop once every logical time reaches this value.")
def simulate(graph, period, init, daemon, seed, max_steps, stop_on, out, as_json, alg_name, mode, values, ids, max_dist, until_time):
    """Run a synchronous algorithm through the synchronizer and check it."""
    spec = RunSpec(graph, period, init, daemon, mode, seed, max_steps, stop_on, out)
    resolved = spec.resolve()
    n = resolved.topology.n
    rng = random.Random(seed)

    if alg_name == "min-prop":
        inputs = _int_list(values, "--values") if values else [rng.randint(0, 99) for _ in range(n)]
        alg = MinPropagation(inputs)
    else:
        if ids:
            identifiers = _int_list(ids, "--ids")
        else:
            identifiers = list(range(1, n + 1))
            rng.shuffle(identifiers)
        alg = MinIdBfs(identifiers, max_dist)
    if alg.n != n:
        raise InputError(f"{alg_name} got {alg.n} inputs for {n} nodes")

    system = SynchronizerSystem(resolved.topology, resolved.B, alg, mode)
    initial = attach_algorithm(resolved.initial, alg, rng if init == "random" else None)
    stop_when = stop_at_time(system, until_time) if until_time is not None else None
    trace = run_execution(system, initial, resolved.daemon, resolved.limits, seed=seed, stop_when=stop_when)
    write_trace(trace, out)

    reports = _verify_all(trace, system)
    code = _exit_code(reports)
    bounds = next(r for r in reports if r.name == "bounds")
    try:
        etas = reconstruct_eta(trace)
        defined = len(etas.configurations)
    except (NotClean, InternalInvariantBroken):
        defined = 0

    if as_json:
        summary = _summary(trace, bounds.metrics)
        summary.update(
            {
                "algorithm": alg_name,
                "mode": mode,
                "defined_times": defined,
                "status": _status(code),
                "reports": [r.to_dict() for r in reports],
            }
        )
        click.echo(_json.dumps(summary, indent=2))
    else:
        console.print(summary_table(trace, bounds.metrics, title="Simulation summary"))
        console.print(reports_table(reports))
        click.echo(f"Logical times reconstructed: {defined}")
        click.echo(f"Trace written to {out}")
    sys.exit(code)


@cli.command()
@click.option("--kinds", default="path,ring,star,random", show_default=True, help="Comma-separated topology kinds.")
@click.option("--n-min", default=4, show_default=True, type=click.IntRange(min=1))
@click.option("--n-max", default=8, show_default=True, type=click.IntRange(min=1))
@click.option("--daemons", default="sync,central-random,dist-random:0.5", show_default=True, help="Comma-separated daemon descriptors.")
@click.option("--seeds", default=10, show_default=True, type=click.IntRange(min=0), help="Sampled executions per (kind, n, daemon).")
@click.option("--B", "period", default="auto", show_default=True, help="Period for every cell, or 'auto'.")
@click.option("--paux", default="greedy", show_default=True, type=click.Choice(sorted(PAUX_REGISTRY)))
@click.option("--max-steps", default=10_000, show_default=True, type=click.IntRange(min=1))
@click.option("--exhaustive-max-n", default=0, show_default=True, type=click.IntRange(0, 3), help="Also walk every schedule on all graphs up to this size.")
@click.option("--exhaustive-depth", default=20, show_default=True, type=click.IntRange(min=1))
@click.option("--max-visited", default=200_000, show_default=True, type=click.IntRange(min=1))
@click.option("--csv", "csv_path", type=click.Path(dir_okay=False), help="Write (n, B, D, moves, rounds) observations here.")
@click.option("--threads", default=1, show_default=True, envvar="UNISON_THREADS", type=click.IntRange(min=1))
@click.option("--json", "as_json", is_flag=True)
@click.option("--inject-fault", is_flag=True, hidden=True)
def sweep(kinds, n_min, n_max, daemons, seeds, period, paux, max_steps, exhaustive_max_n,
          exhaustive_depth, max_visited, csv_path, threads, as_json, inject_fault):
    """Verify many executions and report aggregate pass/fail."""
    if period != "auto" and not period.isdigit():
        raise InputError(f"--B must be an integer or 'auto', got '{period}'")
    campaign = Campaign(
        kinds=tuple(k.strip() for k in kinds.split(",") if k.strip()),
        n_min=n_min,
        n_max=n_max,
        daemons=tuple(d.strip() for d in daemons.split(",") if d.strip()),
        seeds=seeds,
        B=None if period == "auto" else int(period),
        paux=paux,
        max_steps=max_steps,
        exhaustive_max_n=exhaustive_max_n,
        exhaustive_depth=exhaustive_depth,
        max_visited=max_visited,
        inject_fault=inject_fault,
    )
    result = run_campaign(campaign, threads=threads)
    if csv_path:
        write_observations([r for r in result.results if r.kind != "exhaustive"], csv_path)

    if as_json:
        click.echo(
            _json.dumps(
                {
                    "cells": len(result.results),
                    "invariant_failures": result.invariant_failures,
                    "bound_failures": result.bound_failures,
                    "results": [
                        {
                            "cell": r.label,
                            "n": r.n,
                            "B": r.B,
                            "D": r.D,
                            "traces": r.traces,
                            "total_moves": r.total_moves,
                            "rounds_to_clean": r.rounds_to_clean,
                            "status": r.status,
                            "first_violation": r.first_violation,
                            "bounds_exceeded": r.bounds_exceeded,
                        }
                        for r in result.results
                    ],
                },
                indent=2,
            )
        )
    else:
        console.print(campaign_table(result.results))
        click.secho(
            f"{len(result.results)} cells: {result.invariant_failures} invariant failures, "
            f"{result.bound_failures} bound failures",
            fg="green" if result.exit_code == EXIT_OK else "red",
        )
    sys.exit(result.exit_code)


if __name__ == "__main__":
    cli()
