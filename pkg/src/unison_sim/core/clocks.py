# clocks.py
"""Node states of the unison protocol and arithmetic on bounded clocks.

Clock values live in ``[-B, B-1]``. Incrementing is ordinary ``+1`` except
that ``B-1`` wraps to ``0``; negative values never wrap, so the values below
zero form a tail that leads into the cycle ``0..B-1``.
"""

from enum import Enum
from typing import List, NamedTuple, Optional

from .errors import DomainViolation


class Status(str, Enum):
    C = "C"
    E = "E"


class NodeState(NamedTuple):
    status: Status
    clock: int

    def __str__(self) -> str:
        return f"({self.status.value},{self.clock})"


def correct(clock: int) -> NodeState:
    return NodeState(Status.C, clock)


def erroneous(clock: int) -> NodeState:
    return NodeState(Status.E, clock)


def make_state(status: str, clock: int, B: int) -> NodeState:
    """Build a state and reject anything outside the Pairs domain."""
    try:
        state = NodeState(Status(status), int(clock))
    except ValueError as e:
        raise DomainViolation(f"unknown status '{status}'") from e
    check_state(state, B)
    return state


def state_violation(state: NodeState, B: int) -> Optional[str]:
    """Return why ``state`` is outside the Pairs domain, or None."""
    status, clock = state
    if status is Status.C and not -B <= clock <= B - 1:
        return f"correct clock {clock} not in [{-B}, {B - 1}]"
    if status is Status.E and not -B <= clock <= -1:
        return f"erroneous clock {clock} not in [{-B}, -1]"
    if status not in (Status.C, Status.E):
        return f"unknown status {status!r}"
    return None


def check_state(state: NodeState, B: int) -> None:
    problem = state_violation(state, B)
    if problem is not None:
        raise DomainViolation(problem)


def all_domain_states(B: int) -> List[NodeState]:
    """Every valid node state for period ``B`` (3B of them)."""
    return [correct(c) for c in range(-B, B)] + [erroneous(c) for c in range(-B, 0)]


def increment_mod(c: int, B: int) -> int:
    """``c +_B 1``: the successor of a clock value."""
    if not -B <= c <= B - 1:
        raise DomainViolation(f"clock {c} not in [{-B}, {B - 1}]")
    return 0 if c == B - 1 else c + 1


def add_mod(c: int, m: int, B: int) -> int:
    """``c +_B m`` for ``m >= 0``."""
    if m < 0:
        raise ValueError(f"add_mod only moves forward, got m={m}")
    for _ in range(m):
        c = increment_mod(c, B)
    return c


def clock_dist(a: int, b: int, B: int) -> int:
    """0 if equal, 1 if one is the successor of the other, else 2."""
    if a == b:
        return 0
    if increment_mod(a, B) == b or increment_mod(b, B) == a:
        return 1
    return 2


def clock_step(a: int, b: int, B: int) -> Optional[int]:
    """How far ``b`` is ahead of ``a``: 0, 1 or -1, or None when further apart.

    Example:
        >>> clock_step(7, 0, 8), clock_step(0, -1, 8), clock_step(1, 3, 8)
        (1, -1, None)
    """
    if a == b:
        return 0
    if increment_mod(a, B) == b:
        return 1
    if increment_mod(b, B) == a:
        return -1
    return None
