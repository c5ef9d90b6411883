"""Running a synchronous algorithm on top of the unison protocol.

Each node keeps the algorithm state of its current logical time (``curr``)
and of the previous one (``old``). When it makes a unison move it computes
its next state from a snapshot: neighbors on the same clock are still at
the node's time, so their ``curr`` is read; neighbors one step ahead have
already moved, so their ``old`` is read.
"""

import logging
import random
from dataclasses import dataclass, field
from typing import Any, Dict, List, NamedTuple, Optional, Sequence, Tuple

from .algorithms import SyncAlgorithm, build_algorithm
from .clocks import NodeState
from .errors import InternalInvariantBroken, NotClean, UnisonError
from .report import Report
from .rules import Rule, apply_rule, enabled_rule, unison_move
from .scheduler import round_boundaries, round_boundaries_of, rounds_to_index
from .topology import Topology
from .trace import Trace, unison_configuration
from .unison import RuleSystem, UnisonSystem, paux_from_name
from .verifier import clock_offsets, roots_of

logger = logging.getLogger(__name__)

MODES = ("greedy", "lazy")
DEFAULT_FIXPOINT_CAP = 10_000


class SimNodeState(NamedTuple):
    unison: NodeState
    old: Any
    curr: Any

    def __str__(self) -> str:
        return f"{self.unison} old={self.old} curr={self.curr}"


def snapshot(own: SimNodeState, nbrs: Sequence[SimNodeState]) -> List[Any]:
    """What ``own`` reads from each neighbor for its next transition."""
    return [q.curr if q.unison.clock == own.unison.clock else q.old for q in nbrs]


def next_algorithm_state(own: SimNodeState, nbrs: Sequence[SimNodeState], alg: SyncAlgorithm) -> Any:
    return alg.transition(own.curr, snapshot(own, nbrs))


def sim_rule(own: SimNodeState, nbrs: Sequence[SimNodeState], B: int, mode: str, alg: SyncAlgorithm) -> Optional[Rule]:
    if mode == "greedy":
        paux = True
    else:
        paux = next_algorithm_state(own, nbrs, alg) != own.curr
    return enabled_rule(own.unison, [q.unison for q in nbrs], B, paux)


def sim_fire(own: SimNodeState, nbrs: Sequence[SimNodeState], rule: Rule, B: int, alg: SyncAlgorithm) -> SimNodeState:
    clock_state = apply_rule(own.unison, rule, B)
    if rule.kind == "RU":
        return SimNodeState(clock_state, own.curr, next_algorithm_state(own, nbrs, alg))
    return SimNodeState(clock_state, own.old, own.curr)


def sim_enabled_and_apply(
    own: SimNodeState, nbrs: Sequence[SimNodeState], B: int, mode: str, alg: SyncAlgorithm
) -> Optional[SimNodeState]:
    """Post-state of a node if it is enabled and activated, else None."""
    rule = sim_rule(own, nbrs, B, mode, alg)
    return None if rule is None else sim_fire(own, nbrs, rule, B, alg)


class SynchronizerSystem(RuleSystem):
    """Unison protocol whose unison moves also advance ``alg`` by one round."""

    def __init__(self, topology: Topology, B: int, alg: SyncAlgorithm, mode: str = "greedy"):
        if mode not in MODES:
            raise UnisonError(f"mode must be one of {MODES}, got '{mode}'")
        if alg.n != topology.n:
            raise UnisonError(f"algorithm is set up for {alg.n} nodes, topology has {topology.n}")
        super().__init__(topology, B)
        self.alg = alg
        self.mode = mode

    @property
    def paux_name(self) -> str:
        return self.mode

    def _nbrs(self, cfg, p) -> List[SimNodeState]:
        return [cfg[q] for q in self.topology.adjacency[p]]

    def rule_for(self, cfg, p):
        return sim_rule(cfg[p], self._nbrs(cfg, p), self.B, self.mode, self.alg)

    def fire(self, cfg, p, rule):
        return sim_fire(cfg[p], self._nbrs(cfg, p), rule, self.B, self.alg)

    def paux_holds(self, cfg, p):
        if self.mode == "greedy":
            return True
        return next_algorithm_state(cfg[p], self._nbrs(cfg, p), self.alg) != cfg[p].curr

    def state_violations(self, cfg):
        problems = super().state_violations(cfg)
        for p, state in enumerate(cfg):
            if not isinstance(state, SimNodeState):
                problems.append(f"node {p}: missing algorithm state")
            elif not (self.alg.is_valid_state(p, state.old) and self.alg.is_valid_state(p, state.curr)):
                problems.append(f"node {p}: invalid algorithm state old={state.old} curr={state.curr}")
        return problems

    def header_fields(self):
        return {
            "paux": self.mode,
            "algorithm": self.alg.name,
            "algorithm_params": self.alg.params(),
            "mode": self.mode,
        }


def attach_algorithm(
    cfg: Sequence[NodeState], alg: SyncAlgorithm, rng: Optional[random.Random] = None
) -> Tuple[SimNodeState, ...]:
    """Pair each clock state with algorithm states.

    Without ``rng`` every node starts from its intended input (``old`` and
    ``curr`` equal); with ``rng`` both are drawn arbitrarily.
    """
    if rng is None:
        inputs = alg.initial_states()
        return tuple(SimNodeState(s, inputs[p], inputs[p]) for p, s in enumerate(cfg))
    return tuple(
        SimNodeState(s, alg.random_state(p, rng), alg.random_state(p, rng)) for p, s in enumerate(cfg)
    )


def birth_times(cfg, topology: Topology, B: int) -> Tuple[int, ...]:
    """Logical time of each node in a clean configuration.

    Neighbor clocks differ by at most one increment, so walking the graph
    gives every node an offset from node 0; the offsets are shifted so the
    most advanced nodes are at 0. A negative clock and ``B-1`` can both sit
    below the same ``0``, so the clock values alone do not order the nodes.

    Raises:
        NotClean: If ``cfg`` has a root.
        InternalInvariantBroken: If the clocks admit no consistent offsets.
    """
    if roots_of(cfg, topology, B):
        raise NotClean("birth times are only defined for clean configurations")
    offsets = clock_offsets(cfg, topology, B)
    if offsets is None:
        clocks = [s.clock for s in unison_configuration(cfg)]
        raise InternalInvariantBroken(f"clean configuration with clocks {clocks} admits no consistent offsets")
    return offsets


def first_clean(trace: Trace) -> Optional[int]:
    topology, B = trace.header.topology, trace.header.B
    for i, cfg in enumerate(trace.configurations()):
        if not roots_of(cfg, topology, B):
            return i
    return None


def track_times(trace: Trace) -> Tuple[int, List[Tuple[int, ...]]]:
    """Times of every node in each configuration from the first clean one.

    Returns:
        tuple: ``(first_clean_index, [times at that index, times after it, ...])``.

    Raises:
        NotClean: If the trace never reaches a clean configuration.
    """
    start = first_clean(trace)
    if start is None:
        raise NotClean("trace never reaches a clean configuration")
    configs = trace.configurations()
    times = list(birth_times(configs[start], trace.header.topology, trace.header.B))
    series = [tuple(times)]
    for step in trace.steps[start:]:
        for p, rule in step.fired.items():
            if rule.kind == "RU":
                times[p] += 1
        series.append(tuple(times))
    return start, series


@dataclass
class EtaSequence:
    """Algorithm configurations indexed by logical time.

    ``configurations[t]`` is η^t: for each node, its ``curr`` at the first
    configuration where its time is ``t``. Only times reached by every node
    are listed; larger times reached by some nodes are in ``incomplete``.
    """

    first_clean: int
    configurations: List[Tuple[Any, ...]] = field(default_factory=list)
    incomplete: List[int] = field(default_factory=list)


def reconstruct_eta(trace: Trace) -> EtaSequence:
    start, series = track_times(trace)
    configs = trace.configurations()
    n = trace.header.topology.n
    seen: List[Dict[int, Any]] = [dict() for _ in range(n)]
    for offset, times in enumerate(series):
        cfg = configs[start + offset]
        for p in range(n):
            if times[p] >= 0 and times[p] not in seen[p]:
                seen[p][times[p]] = cfg[p].curr
    final = series[-1]
    reached = min(final)
    result = EtaSequence(first_clean=start)
    if reached >= 0:
        result.configurations = [tuple(seen[p][t] for p in range(n)) for t in range(reached + 1)]
    result.incomplete = list(range(max(reached + 1, 0), max(final) + 1))
    logger.debug("reconstructed %d logical times from step %d", len(result.configurations), start)
    return result


def synchronous_step(alg: SyncAlgorithm, topology: Topology, config: Sequence[Any]) -> Tuple[Any, ...]:
    return tuple(
        alg.transition(config[p], [config[q] for q in topology.adjacency[p]]) for p in range(topology.n)
    )


def sync_reference_run(alg: SyncAlgorithm, topology: Topology, eta0: Sequence[Any], steps: int) -> List[Tuple[Any, ...]]:
    """η^0 .. η^steps under the synchronous scheduler."""
    run = [tuple(eta0)]
    for _ in range(steps):
        run.append(synchronous_step(alg, topology, run[-1]))
    return run


def stabilization_time(
    alg: SyncAlgorithm, topology: Topology, eta0: Sequence[Any], cap: int = DEFAULT_FIXPOINT_CAP
) -> int:
    """Smallest T with η^T = η^(T+1).

    Raises:
        UnisonError: If no fixpoint is reached within ``cap`` steps.
    """
    current = tuple(eta0)
    for t in range(cap + 1):
        following = synchronous_step(alg, topology, current)
        if following == current:
            return t
        current = following
    raise UnisonError(f"{alg.name} has no fixpoint within {cap} synchronous steps")


def _algorithm_of(trace: Trace) -> SyncAlgorithm:
    if trace.header.algorithm is None:
        raise UnisonError("trace does not carry an algorithm")
    return build_algorithm(trace.header.algorithm, trace.header.algorithm_params)


def check_simulation_equivalence(trace: Trace, alg: Optional[SyncAlgorithm] = None) -> Report:
    """Every reconstructed η^(t+1) must be the synchronous successor of η^t."""
    alg = alg or _algorithm_of(trace)
    report = Report("simulation")
    report.check("eta-equivalence")
    try:
        etas = reconstruct_eta(trace)
    except NotClean:
        report.notes.append("no clean configuration; nothing to compare")
        return report
    except InternalInvariantBroken as e:
        report.fail("eta-equivalence", str(e))
        return report
    topology = trace.header.topology
    for t in range(len(etas.configurations) - 1):
        expected = synchronous_step(alg, topology, etas.configurations[t])
        actual = etas.configurations[t + 1]
        if expected != actual:
            differing = [p for p in range(topology.n) if expected[p] != actual[p]]
            report.fail(
                "eta-equivalence",
                f"time {t + 1} differs from the synchronous run at nodes {differing}",
                step=etas.first_clean,
            )
    report.metrics["defined_times"] = len(etas.configurations)
    report.metrics["incomplete_times"] = len(etas.incomplete)
    return report


def check_time_invariants(trace: Trace, system: RuleSystem) -> Report:
    """Properties of logical times from the first clean configuration on."""
    topology, B = trace.header.topology, trace.header.B
    report = Report("times")
    for name in ("birth-range", "neighbor-times", "equal-times", "local-minimum"):
        report.check(name)
    try:
        start, series = track_times(trace)
    except NotClean as e:
        report.notes.append(str(e))
        return report
    except InternalInvariantBroken as e:
        report.fail("birth-range", str(e))
        return report

    D = topology.diameter
    configs = trace.configurations()
    if any(not -D <= t <= 0 for t in series[0]):
        report.fail("birth-range", f"birth times {list(series[0])} outside [-{D}, 0]", step=start)

    for offset, times in enumerate(series):
        i = start + offset
        plain = unison_configuration(configs[i])
        for u, v in topology.edges:
            if abs(times[u] - times[v]) > 1:
                report.fail("neighbor-times", f"nodes {u},{v} at times {times[u]},{times[v]}", step=i)
            elif times[u] == times[v] and plain[u].clock != plain[v].clock:
                report.fail("equal-times", f"nodes {u},{v} share time {times[u]} but not a clock", step=i)
        for p in range(topology.n):
            local_min = all(times[p] <= times[q] for q in topology.adjacency[p])
            moving = unison_move(plain[p], [plain[q] for q in topology.adjacency[p]], B)
            if moving != local_min:
                report.fail("local-minimum", f"unisonMove={moving} but local minimum={local_min}", step=i, node=p)

    if system.is_greedy:
        report.check("greedy-progress")
        boundaries = round_boundaries_of(
            configs[start:], [s.selected for s in trace.steps[start:]], system
        )
        previous = min(series[0])
        for h in boundaries:
            current = min(series[h])
            if current < previous + 1:
                report.fail("greedy-progress", f"minimum time stayed at {current} over a round", step=start + h)
            previous = current
    report.metrics["first_clean"] = start
    report.metrics["max_time"] = max(series[-1])
    return report


def check_lazy_bounds(trace: Trace, system: SynchronizerSystem) -> Report:
    """Move and round budgets of a lazy run, with T measured from η^0."""
    if getattr(system, "mode", None) != "lazy":
        raise UnisonError("lazy bounds apply to lazy synchronizer runs only")
    topology = trace.header.topology
    n, D = topology.n, topology.diameter
    report = Report("lazy")

    try:
        start, series = track_times(trace)
    except NotClean:
        report.fail("lazy-clean", "run never reached a clean configuration")
        return report
    except InternalInvariantBroken as e:
        report.fail("lazy-clean", str(e))
        return report
    report.check("lazy-termination")
    if trace.termination.value != "Terminal":
        report.fail("lazy-termination", f"run ended with {trace.termination.value} instead of a terminal configuration")

    etas = reconstruct_eta(trace)
    if not etas.configurations:
        report.notes.append("η^0 is not defined in this trace; bounds not evaluated")
        return report
    T = stabilization_time(system.alg, topology, etas.configurations[0])
    report.metrics["T"] = T

    report.check("lazy-moves")
    moves = sum(len(step.fired) for step in trace.steps[start:])
    if moves > n * T + n * D:
        report.fail("lazy-moves", f"{moves} moves after the first clean configuration > nT+nD={n * T + n * D}")
    report.metrics["moves_after_clean"] = moves

    report.check("lazy-max-time")
    for p, t in enumerate(series[-1]):
        if t > T:
            report.fail("lazy-max-time", f"time {t} > T={T}", node=p)

    configs = trace.configurations()
    selections = [s.selected for s in trace.steps]
    suffix_boundaries = round_boundaries_of(configs[start:], selections[start:], system)
    settled = next((k for k, times in enumerate(series) if min(times) >= 0), None)
    report.check("lazy-nonnegative-times")
    if settled is None:
        report.notes.append("some node never reached time 0")
    else:
        rounds = rounds_to_index(suffix_boundaries, settled)
        if rounds > 2 * D:
            report.fail("lazy-nonnegative-times", f"times became non-negative after {rounds} rounds > 2D={2 * D}")

        if trace.termination.value == "Terminal":
            report.check("lazy-rounds-after-settled")
            base = start + settled
            tail = round_boundaries_of(configs[base:], selections[base:], system)
            tail_rounds = rounds_to_index(tail, len(configs) - 1 - base)
            budget = max(0, D + 3 * T - 2)
            if tail_rounds > budget:
                report.fail("lazy-rounds-after-settled", f"{tail_rounds} rounds to terminal > {budget}")
            report.metrics["rounds_after_settled"] = tail_rounds

    if trace.termination.value == "Terminal":
        report.check("lazy-rounds-total")
        total_rounds = rounds_to_index(round_boundaries(trace, system), len(configs) - 1)
        if total_rounds > 5 * D + 3 * T:
            report.fail("lazy-rounds-total", f"{total_rounds} rounds to terminal > 5D+3T={5 * D + 3 * T}")
        report.metrics["rounds_total"] = total_rounds
    return report


def system_for_header(header) -> RuleSystem:
    """Rebuild the rule system a trace was recorded with."""
    if header.algorithm is None:
        return UnisonSystem(header.topology, header.B, paux_from_name(header.paux))
    alg = build_algorithm(header.algorithm, header.algorithm_params)
    return SynchronizerSystem(header.topology, header.B, alg, header.mode or header.paux)


def stop_at_time(system: RuleSystem, target: int):
    """``stop_when`` callback: stop once every node's time is at least ``target``."""
    times: Optional[List[int]] = None

    def stop(cfg, last) -> bool:
        nonlocal times
        if times is None:
            if not system.is_clean(cfg):
                return False
            times = list(birth_times(cfg, system.topology, system.B))
        elif last is not None:
            for p, rule in last.fired.items():
                if rule.kind == "RU":
                    times[p] += 1
        return min(times) >= target

    return stop
