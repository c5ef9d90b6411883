"""Checkers for unison traces.

``classify_configuration`` and the path helpers work on one configuration.
``check_invariants`` and ``check_bounds`` walk a whole trace and return a
:class:`~unison_sim.core.report.Report` instead of raising.
"""

import logging
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

import networkx as nx

from .clocks import NodeState, Status, clock_dist, clock_step
from .errors import (
    CharacterizationMismatch,
    InternalInvariantBroken,
    NotInError,
    RootCreationDetected,
    UnisonError,
)
from .report import Report
from .rules import RULE_KINDS, enabled_rule, is_root
from .scheduler import first_clean_index, round_boundaries, rounds_to_index
from .topology import Topology
from .trace import Trace, unison_configuration
from .unison import RuleSystem, validate_configuration

logger = logging.getLogger(__name__)


class ConfigClass(str, Enum):
    CLEAN = "Clean"
    ALMOST_CLEAN = "AlmostCleanNotClean"
    DIRTY = "Dirty"

    @property
    def is_almost_clean(self) -> bool:
        return self is not ConfigClass.DIRTY


def _neighbor_lists(plain: Sequence[NodeState], topology: Topology) -> List[List[NodeState]]:
    return [[plain[q] for q in topology.adjacency[p]] for p in range(topology.n)]


CACHE_SIZE = 1 << 16


def clear_caches() -> None:
    """Forget memoised per-configuration results."""
    for cached in (_roots, _classify, _configuration_facts):
        cached.cache_clear()


def roots_of(cfg, topology: Topology, B: int) -> FrozenSet[int]:
    return _roots(unison_configuration(cfg), topology, B)


@lru_cache(maxsize=CACHE_SIZE)
def _roots(plain: Tuple[NodeState, ...], topology: Topology, B: int) -> FrozenSet[int]:
    nbrs = _neighbor_lists(plain, topology)
    return frozenset(p for p in range(topology.n) if is_root(plain[p], nbrs[p], B))


def classify_configuration(cfg, topology: Topology, B: int) -> ConfigClass:
    """Clean, almost clean or dirty, cross-checked against the enabled rules.

    Clean means no roots. Almost clean means every root is ``(E, -B)`` and
    neighbor clocks are at distance at most 1. Independently, with the
    auxiliary predicate taken as true, no node may have an error rule
    enabled exactly when the configuration is almost clean, and only unison
    moves may be enabled exactly when it is clean.

    Raises:
        CharacterizationMismatch: If the two computations disagree.
        DomainViolation: If a state is outside the Pairs domain.
    """
    return _classify(unison_configuration(cfg), topology, B)


@lru_cache(maxsize=CACHE_SIZE)
def _classify(plain: Tuple[NodeState, ...], topology: Topology, B: int) -> ConfigClass:
    nbrs = _neighbor_lists(plain, topology)
    roots = _roots(plain, topology, B)

    clean = not roots
    almost_clean = all(plain[r].status is Status.E and plain[r].clock == -B for r in roots) and all(
        clock_dist(plain[u].clock, plain[v].clock, B) <= 1 for u, v in topology.edges
    )

    rules = [enabled_rule(plain[p], nbrs[p], B, True) for p in range(topology.n)]
    no_error_rule = not any(r is not None and r.is_error_rule for r in rules)
    only_unison = all(r is None or r.kind == "RU" for r in rules)

    if almost_clean != no_error_rule or clean != only_unison:
        raise CharacterizationMismatch(
            f"definitions say clean={clean} almost_clean={almost_clean}, "
            f"rules say only_unison={only_unison} no_error_rule={no_error_rule} "
            f"for {[str(s) for s in plain]}"
        )
    if clean:
        return ConfigClass.CLEAN
    return ConfigClass.ALMOST_CLEAN if almost_clean else ConfigClass.DIRTY


def find_e_path(cfg, topology: Topology, B: int, p: int) -> List[int]:
    """Strictly decreasing path of erroneous nodes from ``p`` to a root.

    Each hop goes to the erroneous neighbor with the smallest clock (lowest
    index on ties).

    Raises:
        NotInError: If ``p`` is correct.
    """
    plain = unison_configuration(cfg)
    if plain[p].status is not Status.E:
        raise NotInError(f"node {p} is {plain[p]}, not erroneous")
    path = [p]
    current = p
    while not is_root(plain[current], [plain[q] for q in topology.adjacency[current]], B):
        lower = [
            q
            for q in topology.adjacency[current]
            if plain[q].status is Status.E and plain[q].clock < plain[current].clock
        ]
        if not lower:
            raise InternalInvariantBroken(f"non-root erroneous node {current} has no lower neighbor")
        current = min(lower, key=lambda q: (plain[q].clock, q))
        path.append(current)
    return path


def d_path_membership(cfg, topology: Topology, B: int, p: int) -> bool:
    """Whether ``p`` starts a decreasing path that ends in an E-path.

    The correct prefix must go down by exactly one per hop; the first
    erroneous node only needs a smaller clock than the last correct one.
    """
    plain = unison_configuration(cfg)
    if plain[p].status is Status.E:
        return True
    stack = [p]
    seen = {p}
    while stack:
        u = stack.pop()
        for v in topology.adjacency[u]:
            if plain[v].status is Status.E:
                if plain[v].clock < plain[u].clock:
                    return True
            elif plain[v].clock == plain[u].clock - 1 and v not in seen:
                seen.add(v)
                stack.append(v)
    return False


def clock_offsets(cfg, topology: Topology, B: int) -> Optional[Tuple[int, ...]]:
    """How far each clock is behind the most advanced ones, read edge by edge.

    Neighbors on the same clock share an offset and a neighbor on the
    successor clock is one ahead; the result is shifted so the largest
    offset is 0. A negative tail and ``B-1`` may both lead into the same
    ``0``.

    Returns:
        tuple: one offset per node, or None when some edge spans two or
        more increments or two paths between the same nodes disagree.
    """
    plain = unison_configuration(cfg)
    offsets = {0: 0}
    for u, v in nx.bfs_edges(topology.graph, 0):
        step = clock_step(plain[u].clock, plain[v].clock, B)
        if step is None:
            return None
        offsets[v] = offsets[u] + step
    for u, v in topology.edges:
        if clock_step(plain[u].clock, plain[v].clock, B) != offsets[v] - offsets[u]:
            return None
    top = max(offsets.values())
    return tuple(offsets[p] - top for p in range(topology.n))


@dataclass(frozen=True)
class Segment:
    index: int
    start: int
    end: int
    clean: bool

    def contains_step(self, step: int) -> bool:
        return self.start < step <= self.end


@dataclass
class SegmentDecomposition:
    boundaries: List[int]
    segments: List[Segment]
    root_sets: List[FrozenSet[int]] = field(repr=False, default_factory=list)

    def segment_of_step(self, step: int) -> Segment:
        for segment in self.segments:
            if segment.contains_step(step):
                return segment
        return self.segments[-1]


def segment_decomposition(trace: Trace) -> SegmentDecomposition:
    """Split a trace where its root set strictly shrinks.

    Raises:
        RootCreationDetected: If a step adds a root.
    """
    topology, B = trace.header.topology, trace.header.B
    root_sets = [roots_of(cfg, topology, B) for cfg in trace.configurations()]
    boundaries = []
    for i in range(1, len(root_sets)):
        created = root_sets[i] - root_sets[i - 1]
        if created:
            raise RootCreationDetected(i, created)
        if root_sets[i] != root_sets[i - 1]:
            boundaries.append(i)

    last = len(root_sets) - 1
    starts = [0] + boundaries
    ends = boundaries + [last]
    segments = [
        Segment(k, start, end, not root_sets[start])
        for k, (start, end) in enumerate(zip(starts, ends))
    ]
    return SegmentDecomposition(boundaries, segments, root_sets)


@dataclass
class MoveCensus:
    per_node: List[Counter]
    unclean_u: Dict[Tuple[int, int], int]
    rp_targets: Dict[int, List[int]]

    def count(self, node: int, kind: str) -> int:
        return self.per_node[node][kind]

    def totals(self) -> Dict[str, int]:
        return {kind: sum(c[kind] for c in self.per_node) for kind in RULE_KINDS}

    @property
    def total(self) -> int:
        return sum(self.totals().values())

    def unclean_u_of(self, node: int) -> int:
        return sum(count for (p, _), count in self.unclean_u.items() if p == node)


def move_census(
    trace: Trace, segments: Optional[SegmentDecomposition] = None, by_segment: bool = True
) -> MoveCensus:
    """Count fired rules per node, and unison moves per node and unclean segment."""
    n = trace.header.topology.n
    if by_segment and segments is None:
        segments = segment_decomposition(trace)
    per_node = [Counter() for _ in range(n)]
    unclean_u: Dict[Tuple[int, int], int] = Counter()
    rp_targets: Dict[int, List[int]] = {}
    for step in trace.steps:
        segment = segments.segment_of_step(step.index) if by_segment else None
        for p, rule in step.fired.items():
            per_node[p][rule.kind] += 1
            if rule.kind == "RP":
                rp_targets.setdefault(p, []).append(rule.target)
            if rule.kind == "RU" and segment is not None and not segment.clean:
                unclean_u[(p, segment.index)] += 1
    return MoveCensus(per_node, dict(unclean_u), rp_targets)


def replay_trace(trace: Trace, system: RuleSystem) -> Report:
    """Recompute every step from its predecessor and compare with the record."""
    report = Report("replay")
    report.check("replay")
    configs = trace.configurations()
    for step in trace.steps:
        try:
            post, fired = system.apply_step(configs[step.index - 1], step.selected)
        except (UnisonError, KeyError, IndexError) as e:
            report.fail("replay", f"selection cannot be applied: {e}", step=step.index)
            continue
        if fired != step.fired:
            report.fail(
                "replay",
                f"recorded rules {_rules(step.fired)} but rules give {_rules(fired)}",
                step=step.index,
            )
        elif post != step.post:
            report.fail("replay", "recorded post-configuration differs from the recomputed one", step=step.index)
    return report


def _rules(fired) -> Dict[int, str]:
    return {p: str(r) for p, r in sorted(fired.items())}


def check_invariants(trace: Trace, system: Optional[RuleSystem] = None) -> Report:
    """Per-configuration and per-step safety properties of a trace.

    With ``system`` the trace is also replayed and liveness is checked in
    clean configurations.
    """
    topology, B = trace.header.topology, trace.header.B
    report = Report("invariants")
    for name in ("domain", "root-monotonicity", "almost-clean-closure", "clean-closure",
                 "unison-safety", "hole", "color-value", "e-path", "root-rc", "characterization"):
        report.check(name)

    configs = trace.configurations()
    plains = [unison_configuration(cfg) for cfg in configs]
    roots: List[Optional[FrozenSet[int]]] = []
    classes: List[Optional[ConfigClass]] = []

    for i, plain in enumerate(plains):
        facts = _configuration_facts(plain, topology, B)
        roots.append(facts.roots)
        classes.append(facts.cls)
        for check, message, node in facts.violations:
            report.fail(check, message, step=i, node=node)

    for step in trace.steps:
        i = step.index
        pre_roots, post_roots = roots[i - 1], roots[i]
        if pre_roots is None or post_roots is None:
            continue
        created = post_roots - pre_roots
        if created:
            report.fail("root-monotonicity", f"new roots {sorted(created)}", step=i)
        pre_class, post_class = classes[i - 1], classes[i]
        if pre_class is not None and post_class is not None:
            if pre_class.is_almost_clean and not post_class.is_almost_clean:
                report.fail("almost-clean-closure", "almost clean configuration became dirty", step=i)
            if pre_class is ConfigClass.CLEAN and post_class is not ConfigClass.CLEAN:
                report.fail("clean-closure", f"clean configuration became {post_class.value}", step=i)
        for p, rule in step.fired.items():
            if rule.kind == "RC" and p in pre_roots:
                if plains[i - 1][p].clock != -B:
                    report.fail("root-rc", f"root cleared its error at clock {plains[i - 1][p].clock}", step=i, node=p)
                if p in post_roots:
                    report.fail("root-rc", "root is still a root after clearing its error", step=i, node=p)

    if system is not None:
        report.check("liveness")
        for i, cfg in enumerate(configs):
            if classes[i] is ConfigClass.CLEAN and not system.enabled_set(cfg):
                if any(system.paux_holds(cfg, p) for p in range(topology.n)):
                    report.fail("liveness", "clean configuration with P_aux holding has no enabled node", step=i)
        report.merge(replay_trace(trace, system))

    logger.debug("invariants: %d violations over %d configurations", len(report.violations), len(configs))
    return report


@dataclass(frozen=True)
class _ConfigurationFacts:
    roots: Optional[FrozenSet[int]]
    cls: Optional[ConfigClass]
    violations: Tuple[Tuple[str, str, Optional[int]], ...]


@lru_cache(maxsize=CACHE_SIZE)
def _configuration_facts(plain: Tuple[NodeState, ...], topology: Topology, B: int) -> _ConfigurationFacts:
    """Everything ``check_invariants`` derives from one configuration alone."""
    problems = validate_configuration(plain, B)
    if len(plain) != topology.n:
        problems.append(f"{len(plain)} states for {topology.n} nodes")
    if problems:
        return _ConfigurationFacts(None, None, (("domain", "; ".join(problems), None),))

    violations = []
    try:
        cls = _classify(plain, topology, B)
    except CharacterizationMismatch as e:
        cls = None
        violations.append(("characterization", str(e), None))

    for p, state in enumerate(plain):
        if state.status is not Status.E:
            continue
        try:
            path = find_e_path(plain, topology, B, p)
        except InternalInvariantBroken as e:
            violations.append(("e-path", str(e), p))
            continue
        if not is_root(plain[path[-1]], [plain[q] for q in topology.adjacency[path[-1]]], B):
            violations.append(("e-path", f"E-path {path} does not end at a root", p))

    if cls is not None and cls.is_almost_clean:
        clocks = {s.clock for s in plain}
        if all(c in clocks for c in range(B)):
            violations.append(("hole", "every clock value in [0, B) is in use", None))
        offsets = clock_offsets(plain, topology, B)
        if offsets is None:
            violations.append(("color-value", f"clocks {[s.clock for s in plain]} admit no consistent offsets", None))
        elif -min(offsets) > topology.diameter:
            violations.append(("color-value", f"clock offsets span {-min(offsets)} > D={topology.diameter}", None))
        if cls is ConfigClass.CLEAN:
            for u, v in topology.edges:
                if clock_dist(plain[u].clock, plain[v].clock, B) > 1:
                    violations.append(("unison-safety", f"neighbors {u} and {v} are out of step", None))
    return _ConfigurationFacts(_roots(plain, topology, B), cls, tuple(violations))


def check_bounds(trace: Trace, system: RuleSystem) -> Report:
    """Exact move budgets, the round bound and the clock-growth cap."""
    topology, B = trace.header.topology, trace.header.B
    n, D = topology.n, topology.diameter
    report = Report("bounds")

    try:
        segments = segment_decomposition(trace)
        census = move_census(trace, segments)
    except RootCreationDetected as e:
        report.fail("segments", str(e), step=e.step)
        segments = None
        census = move_census(trace, by_segment=False)

    for name in ("r-moves", "p-moves", "c-moves", "c-moves-per-node"):
        report.check(name)
    for p in range(n):
        if census.count(p, "RR") > 1:
            report.fail("r-moves", f"{census.count(p, 'RR')} reset moves > 1", node=p)
        if census.count(p, "RP") > n * B:
            report.fail("p-moves", f"{census.count(p, 'RP')} propagation moves > nB={n * B}", node=p)
        if census.count(p, "RC") > census.count(p, "RP") + 1:
            report.fail(
                "c-moves-per-node",
                f"{census.count(p, 'RC')} clear moves > {census.count(p, 'RP')} propagation moves + 1",
                node=p,
            )
    totals = census.totals()
    if totals["RC"] > totals["RP"] + n:
        report.fail("c-moves", f"{totals['RC']} clear moves > {totals['RP']} propagation moves + n={n}")

    if segments is not None:
        report.check("u-moves-per-segment")
        report.check("u-moves-unclean")
        for (p, k), count in sorted(census.unclean_u.items()):
            if count > 2 * D:
                report.fail("u-moves-per-segment", f"{count} unison moves in unclean segment {k} > 2D={2 * D}", node=p)
        for p in range(n):
            if census.unclean_u_of(p) > 2 * D * n:
                report.fail("u-moves-unclean", f"{census.unclean_u_of(p)} unison moves while unclean > 2Dn", node=p)

    boundaries = round_boundaries(trace, system)
    first_clean = first_clean_index(trace, system)
    report.check("round-bound")
    needed = 2 * D + 2
    if len(boundaries) >= needed:
        if first_clean is None or first_clean > boundaries[needed - 1]:
            report.fail("round-bound", f"not clean by the end of round {needed}")
    elif first_clean is None:
        report.notes.append(f"trace ends after {len(boundaries)} complete rounds without a clean configuration")

    report.check("clock-growth")
    _check_clock_growth(report, trace, first_clean, D)

    report.metrics.update(
        {
            "n": n,
            "B": B,
            "D": D,
            "total_moves": census.total,
            "moves": totals,
            "rounds": len(boundaries),
            "first_clean": first_clean,
            "rounds_to_clean": None if first_clean is None else rounds_to_index(boundaries, first_clean),
            "segments": None if segments is None else len(segments.segments),
        }
    )
    return report


def _check_clock_growth(report: Report, trace: Trace, first_clean: Optional[int], D: int) -> None:
    configs = trace.configurations()
    last = len(configs) - 1 if first_clean is None else first_clean - 1
    if last < 1:
        return
    lowest = [s.clock for s in unison_configuration(configs[0])]
    flagged = set()
    for j in range(1, last + 1):
        plain = unison_configuration(configs[j])
        for p, state in enumerate(plain):
            if p not in flagged and state.clock - lowest[p] > 2 * D:
                report.fail("clock-growth", f"clock grew by {state.clock - lowest[p]} > 2D={2 * D}", step=j, node=p)
                flagged.add(p)
            lowest[p] = min(lowest[p], state.clock)
