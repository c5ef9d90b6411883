"""Sweeps: many executions, each verified as soon as it is produced.

A campaign is a list of independent cells. Sampled cells run one seeded
execution on a generated graph; exhaustive cells walk every schedule from
every initial configuration of one small graph. Cells can run in worker
processes; results always come back in cell order.
"""

import concurrent.futures
import csv
import itertools
import logging
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

from .clocks import all_domain_states, erroneous
from .configurations import random_configuration
from .daemons import parse_daemon
from .report import Report
from .rules import RR, is_root
from .scheduler import (
    EnumerationBounds,
    ExecutionLimits,
    enumerate_executions,
    run_execution,
    stop_after_clean,
)
from .topology import build_topology, connected_graphs, generate_topology
from .trace import StepRecord, Trace, unison_configuration
from .unison import RuleSystem, UnisonSystem, auto_period, paux_from_name
from .verifier import check_bounds, check_invariants

logger = logging.getLogger(__name__)

SAMPLED_KINDS = ("path", "ring", "star", "random")
MIN_NODES = {"path": 1, "ring": 3, "star": 2, "random": 1, "complete": 1, "grid": 1}


@dataclass(frozen=True)
class SampledCell:
    kind: str
    n: int
    daemon: str
    seed: int
    B: Optional[int] = None
    paux: str = "greedy"
    max_steps: int = 10_000
    inject_fault: bool = False

    @property
    def label(self) -> str:
        return f"{self.kind}:{self.n} {self.daemon} seed={self.seed}"


@dataclass(frozen=True)
class ExhaustiveCell:
    n: int
    edges: Tuple[Tuple[int, int], ...]
    B: Optional[int] = None
    paux: str = "greedy"
    max_depth: int = 20
    max_visited: int = 200_000
    inject_fault: bool = False

    @property
    def label(self) -> str:
        return f"exhaustive n={self.n} edges={list(self.edges)}"


Cell = Union[SampledCell, ExhaustiveCell]


@dataclass
class CellResult:
    label: str
    kind: str
    daemon: str
    seed: Optional[int]
    n: int
    B: int
    D: int
    traces: int = 0
    total_moves: int = 0
    rounds_to_clean: Optional[int] = None
    invariant_violations: int = 0
    bound_violations: int = 0
    first_violation: Optional[str] = None
    bounds_exceeded: bool = False

    @property
    def status(self) -> str:
        if self.invariant_violations:
            return "invariant-violation"
        if self.bound_violations:
            return "bound-violation"
        return "pass"

    def record(self, invariants: Report, bounds: Report) -> None:
        self.traces += 1
        self.invariant_violations += len(invariants.violations)
        self.bound_violations += len(bounds.violations)
        if self.first_violation is None:
            for violation in invariants.violations + bounds.violations:
                self.first_violation = f"{violation.check}: {violation.message}"
                break
        rounds = bounds.metrics.get("rounds_to_clean")
        if rounds is not None:
            self.rounds_to_clean = max(rounds, self.rounds_to_clean or 0)
        self.total_moves = max(self.total_moves, bounds.metrics.get("total_moves", 0))


@dataclass(frozen=True)
class Campaign:
    kinds: Sequence[str] = SAMPLED_KINDS
    n_min: int = 4
    n_max: int = 8
    daemons: Sequence[str] = ("sync", "central-random", "dist-random:0.5")
    seeds: int = 10
    B: Optional[int] = None
    paux: str = "greedy"
    max_steps: int = 10_000
    exhaustive_max_n: int = 0
    exhaustive_depth: int = 20
    max_visited: int = 200_000
    inject_fault: bool = False

    def cells(self) -> List[Cell]:
        cells: List[Cell] = []
        for n in range(1, self.exhaustive_max_n + 1):
            for topology in connected_graphs(n):
                cells.append(
                    ExhaustiveCell(
                        n, tuple(topology.edges), self.B, self.paux,
                        self.exhaustive_depth, self.max_visited, self.inject_fault,
                    )
                )
        for kind, n, daemon, seed in itertools.product(
            self.kinds, range(self.n_min, self.n_max + 1), self.daemons, range(self.seeds)
        ):
            if n >= MIN_NODES.get(kind, 1):
                cells.append(
                    SampledCell(kind, n, daemon, seed, self.B, self.paux, self.max_steps, self.inject_fault)
                )
        return cells


@dataclass
class CampaignResult:
    results: List[CellResult] = field(default_factory=list)

    @property
    def invariant_failures(self) -> int:
        return sum(1 for r in self.results if r.invariant_violations)

    @property
    def bound_failures(self) -> int:
        return sum(1 for r in self.results if r.bound_violations)

    @property
    def exit_code(self) -> int:
        if self.invariant_failures:
            return 1
        if self.bound_failures:
            return 2
        return 0


def forge_root_creation(trace: Trace) -> Trace:
    """Append a bogus step that the checkers must reject.

    A non-root node jumps to ``(E, -B)``, which is always a root. If every
    node is already a root, node 0 fires two resets instead.
    """
    topology, B = trace.header.topology, trace.header.B
    last = trace.configurations()[-1]
    plain = unison_configuration(last)
    victims = [
        p for p in range(topology.n)
        if not is_root(plain[p], [plain[q] for q in topology.adjacency[p]], B)
    ]
    steps = list(trace.steps)
    if victims:
        p = victims[0]
        post = list(last)
        post[p] = _with_clock_state(last[p], erroneous(-B))
        steps.append(StepRecord(len(steps) + 1, frozenset({p}), {p: RR}, tuple(post)))
    else:
        for _ in range(2):
            steps.append(StepRecord(len(steps) + 1, frozenset({0}), {0: RR}, last))
    return Trace(trace.header, steps, trace.termination)


def _with_clock_state(state, clock_state):
    if hasattr(state, "unison"):
        return state._replace(unison=clock_state)
    return clock_state


def _verify(result: CellResult, trace: Trace, system: RuleSystem, inject_fault: bool) -> None:
    if inject_fault:
        trace = forge_root_creation(trace)
    result.record(check_invariants(trace, system), check_bounds(trace, system))


def run_sampled_cell(cell: SampledCell) -> CellResult:
    if cell.kind == "random":
        params = {"n": cell.n, "m": min(cell.n * (cell.n - 1) // 2, cell.n + cell.n // 2)}
    else:
        params = {"n": cell.n}
    topology = generate_topology(cell.kind, params, seed=cell.seed)
    B = cell.B or auto_period(topology)
    system = UnisonSystem(topology, B, paux_from_name(cell.paux))
    rng = random.Random(cell.seed)
    cfg0 = random_configuration(topology.n, B, rng)
    trace = run_execution(
        system,
        cfg0,
        parse_daemon(cell.daemon),
        ExecutionLimits(max_steps=cell.max_steps, stop_on="terminal"),
        seed=cell.seed,
        stop_when=stop_after_clean(system, 2 * topology.n),
    )
    result = CellResult(cell.label, cell.kind, cell.daemon, cell.seed, topology.n, B, topology.diameter)
    _verify(result, trace, system, cell.inject_fault)
    return result


def run_exhaustive_cell(cell: ExhaustiveCell) -> CellResult:
    topology = build_topology(cell.n, cell.edges)
    B = cell.B or auto_period(topology)
    system = UnisonSystem(topology, B, paux_from_name(cell.paux))
    bounds = EnumerationBounds(max_depth=cell.max_depth, max_visited=cell.max_visited, stop_on="clean")
    result = CellResult(cell.label, "exhaustive", "exhaustive", None, topology.n, B, topology.diameter)
    for cfg0 in itertools.product(all_domain_states(B), repeat=topology.n):
        enumeration = enumerate_executions(system, cfg0, bounds)
        for trace in enumeration:
            _verify(result, trace, system, cell.inject_fault)
        result.bounds_exceeded = result.bounds_exceeded or enumeration.bounds_exceeded
    return result


def run_cell(cell: Cell) -> CellResult:
    if isinstance(cell, ExhaustiveCell):
        result = run_exhaustive_cell(cell)
    else:
        result = run_sampled_cell(cell)
    logger.info("%s: %s (%d traces)", cell.label, result.status, result.traces)
    return result


def run_campaign(campaign: Campaign, threads: int = 1) -> CampaignResult:
    """Run every cell, in worker processes when ``threads`` > 1."""
    cells = campaign.cells()
    logger.info("campaign: %d cells on %d workers", len(cells), threads)
    if threads <= 1:
        results = [run_cell(cell) for cell in cells]
    else:
        with concurrent.futures.ProcessPoolExecutor(max_workers=threads) as executor:
            results = list(executor.map(run_cell, cells))
    return CampaignResult(results)


OBSERVATION_FIELDS = ("kind", "daemon", "seed", "n", "B", "D", "total_moves", "rounds_to_clean")


def write_observations(results: Sequence[CellResult], path) -> Path:
    """CSV of size parameters against total moves and rounds to clean."""
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(OBSERVATION_FIELDS)
        for r in results:
            writer.writerow([getattr(r, name) for name in OBSERVATION_FIELDS])
    return path
