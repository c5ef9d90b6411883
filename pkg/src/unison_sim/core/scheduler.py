"""Executions: running a daemon, counting rounds, enumerating every schedule."""

import itertools
import logging
import random
from dataclasses import dataclass
from typing import Callable, FrozenSet, Iterator, List, Optional, Sequence

from .daemons import Daemon
from .errors import (
    EmptySelection,
    InvalidInitialConfiguration,
    NodeNotEnabled,
    ScriptExhausted,
    UnisonError,
)
from .trace import Configuration, StepRecord, Termination, Trace
from .unison import RuleSystem, check_period

logger = logging.getLogger(__name__)

STOP_ON = ("terminal", "clean", "never")


@dataclass(frozen=True)
class ExecutionLimits:
    max_steps: int = 10_000
    stop_on: str = "terminal"

    def __post_init__(self):
        if self.max_steps < 0:
            raise UnisonError(f"max_steps must be >= 0, got {self.max_steps}")
        if self.stop_on not in STOP_ON:
            raise UnisonError(f"stop_on must be one of {STOP_ON}, got '{self.stop_on}'")


@dataclass(frozen=True)
class EnumerationBounds:
    max_depth: int = 20
    max_visited: int = 100_000
    stop_on: str = "clean"

    def __post_init__(self):
        if self.stop_on not in ("terminal", "clean"):
            raise UnisonError(f"enumeration stop_on must be terminal or clean, got '{self.stop_on}'")


StopWhen = Callable[[Configuration, Optional[StepRecord]], bool]


def _check_start(system: RuleSystem, cfg0: Configuration) -> None:
    check_period(system.B, system.topology)
    problems = system.state_violations(cfg0)
    if problems:
        raise InvalidInitialConfiguration("; ".join(problems))


def run_execution(
    system: RuleSystem,
    cfg0: Configuration,
    daemon: Daemon,
    limits: ExecutionLimits = ExecutionLimits(),
    seed: int = 0,
    stop_when: Optional[StopWhen] = None,
) -> Trace:
    """Run ``daemon`` against ``system`` from ``cfg0`` until a stop condition.

    Checked before every step, in order: no enabled node (Terminal), clean
    configuration with ``stop_on="clean"``, ``stop_when``, step limit.

    Raises:
        InvalidPeriod: If B < max(4, 2D+2).
        InvalidInitialConfiguration: If ``cfg0`` is not domain-valid.
    """
    _check_start(system, cfg0)
    rng = random.Random(seed)
    header = system.make_header(cfg0, daemon.descriptor, seed)
    logger.info(
        "run: n=%d B=%d daemon=%s paux=%s seed=%d",
        system.topology.n, system.B, daemon.descriptor, system.paux_name, seed,
    )

    cfg = tuple(cfg0)
    steps: List[StepRecord] = []
    last: Optional[StepRecord] = None
    while True:
        enabled = system.enabled_set(cfg)
        if not enabled:
            termination = Termination.TERMINAL
            break
        if limits.stop_on == "clean" and system.is_clean(cfg):
            termination = Termination.CLEAN
            break
        if stop_when is not None and stop_when(cfg, last):
            termination = Termination.STOP_CONDITION
            break
        if len(steps) >= limits.max_steps:
            termination = Termination.STEP_LIMIT
            break

        index = len(steps) + 1
        try:
            selected = daemon.select(sorted(enabled), index, rng)
        except ScriptExhausted:
            termination = Termination.SCRIPT_EXHAUSTED
            break
        try:
            cfg, fired = system.apply_step(cfg, selected)
        except (NodeNotEnabled, EmptySelection) as e:
            logger.warning("step %d: selection %s rejected: %s", index, sorted(selected), e)
            termination = Termination.SCRIPT_INVALID
            break
        last = StepRecord(index, frozenset(selected), fired, cfg)
        steps.append(last)
        logger.debug("step %d: %s", index, {p: str(r) for p, r in fired.items()})

    logger.info("run finished after %d steps: %s", len(steps), termination.value)
    return Trace(header, steps, termination)


def round_boundaries_of(
    configs: Sequence[Configuration],
    selections: Sequence[FrozenSet[int]],
    system: RuleSystem,
) -> List[int]:
    """Round ends of an execution given as configurations and selections.

    A round ends at configuration ``h`` once every node enabled at the start
    of the round has moved or been neutralized; the next round starts from
    the nodes enabled at ``h``.
    """
    boundaries: List[int] = []
    pending = set(system.enabled_set(configs[0]))
    if not pending:
        return boundaries
    for i, selected in enumerate(selections, start=1):
        pending -= selected
        enabled_after = system.enabled_set(configs[i])
        pending &= enabled_after
        if not pending:
            boundaries.append(i)
            pending = set(enabled_after)
            if not pending:
                break
    return boundaries


def round_boundaries(trace: Trace, system: RuleSystem) -> List[int]:
    return round_boundaries_of(
        trace.configurations(), [s.selected for s in trace.steps], system
    )


def rounds_to_index(boundaries: Sequence[int], index: int) -> int:
    """Rounds needed to reach configuration ``index``; a partial round counts."""
    if index == 0:
        return 0
    for j, h in enumerate(boundaries):
        if h >= index:
            return j + 1
    return len(boundaries) + 1


def first_clean_index(trace: Trace, system: RuleSystem) -> Optional[int]:
    for i, cfg in enumerate(trace.configurations()):
        if system.is_clean(cfg):
            return i
    return None


def rounds_to_clean(trace: Trace, system: RuleSystem) -> Optional[int]:
    first = first_clean_index(trace, system)
    if first is None:
        return None
    return rounds_to_index(round_boundaries(trace, system), first)


class Enumeration:
    """Every execution from one configuration, depth-first.

    Iterating yields one :class:`Trace` per maximal path: it ends in a
    terminal or (with ``stop_on="clean"``) clean configuration, at
    ``max_depth``, or when a configuration repeats along the path. Once more
    than ``max_visited`` successors were generated the walk stops and
    ``bounds_exceeded`` is set.
    """

    def __init__(self, system: RuleSystem, initial: Configuration, bounds: EnumerationBounds):
        _check_start(system, initial)
        self.system = system
        self.initial = tuple(initial)
        self.bounds = bounds
        self.visited = 0
        self.bounds_exceeded = False

    def _leaf(self, cfg: Configuration, depth: int) -> Optional[Termination]:
        if not self.system.enabled_set(cfg):
            return Termination.TERMINAL
        if self.bounds.stop_on == "clean" and self.system.is_clean(cfg):
            return Termination.CLEAN
        if depth >= self.bounds.max_depth:
            return Termination.STEP_LIMIT
        return None

    def _selections(self, cfg: Configuration) -> Iterator[FrozenSet[int]]:
        enabled = sorted(self.system.enabled_set(cfg))
        for size in range(1, len(enabled) + 1):
            for subset in itertools.combinations(enabled, size):
                yield frozenset(subset)

    def __iter__(self) -> Iterator[Trace]:
        header = self.system.make_header(self.initial, "exhaustive", 0)
        leaf = self._leaf(self.initial, 0)
        if leaf is not None:
            yield Trace(header, [], leaf)
            return

        steps: List[StepRecord] = []
        on_path = {self.initial}
        stack = [self._selections(self.initial)]
        while stack:
            selected = next(stack[-1], None)
            if selected is None:
                stack.pop()
                if steps:
                    on_path.discard(steps.pop().post)
                continue

            cfg = steps[-1].post if steps else self.initial
            post, fired = self.system.apply_step(cfg, selected)
            self.visited += 1
            if self.visited > self.bounds.max_visited:
                self.bounds_exceeded = True
                logger.warning("enumeration stopped after %d successors", self.bounds.max_visited)
                return
            record = StepRecord(len(steps) + 1, selected, fired, post)

            if post in on_path:
                yield Trace(header, steps + [record], Termination.CYCLE)
                continue
            steps.append(record)
            on_path.add(post)
            leaf = self._leaf(post, len(steps))
            if leaf is not None:
                yield Trace(header, list(steps), leaf)
                on_path.discard(steps.pop().post)
                continue
            stack.append(self._selections(post))


def enumerate_executions(
    system: RuleSystem, initial: Configuration, bounds: EnumerationBounds = EnumerationBounds()
) -> Enumeration:
    return Enumeration(system, initial, bounds)


def stop_after_clean(system: RuleSystem, extra_steps: int) -> StopWhen:
    """Stop ``extra_steps`` steps after the first clean configuration."""
    clean_since: Optional[int] = None

    def stop(cfg: Configuration, last: Optional[StepRecord]) -> bool:
        nonlocal clean_since
        index = last.index if last is not None else 0
        if clean_since is None and system.is_clean(cfg):
            clean_since = index
        return clean_since is not None and index - clean_since >= extra_steps

    return stop
