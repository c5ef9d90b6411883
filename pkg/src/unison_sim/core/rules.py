"""Guards and actions of the self-stabilizing unison rules.

Every predicate takes the node's own state and the multiset of its
neighbors' states; only membership matters, so any iterable works.
Priority when several guards hold: RR, then RP, then RC, then RU.
"""

from typing import Collection, NamedTuple, Optional

from .clocks import NodeState, Status, check_state, clock_dist, correct, erroneous, increment_mod

RULE_KINDS = ("RR", "RP", "RC", "RU")


class Rule(NamedTuple):
    kind: str
    target: Optional[int] = None

    @property
    def is_error_rule(self) -> bool:
        return self.kind in ("RR", "RP")

    def __str__(self) -> str:
        return f"RP({self.target})" if self.kind == "RP" else self.kind


RR = Rule("RR")
RC = Rule("RC")
RU = Rule("RU")


def RP(target: int) -> Rule:
    return Rule("RP", target)


def is_root(own: NodeState, nbrs: Collection[NodeState], B: int) -> bool:
    """A node is a root when it is the local origin of an error.

    An erroneous node is a root if no erroneous neighbor has a smaller
    clock. A correct node is a root if some neighbor is ahead of it by more
    than one increment.
    """
    if own.status is Status.E:
        return not any(q.status is Status.E and q.clock < own.clock for q in nbrs)
    return any(own.clock < q.clock and clock_dist(q.clock, own.clock, B) >= 2 for q in nbrs)


def is_active_root(own: NodeState, nbrs: Collection[NodeState], B: int) -> bool:
    """A root that has not already been reset to ``(E, -B)``."""
    return is_root(own, nbrs, B) and (own.clock != -B or own.status is Status.C)


def error_propagation_target(own: NodeState, nbrs: Collection[NodeState]) -> Optional[int]:
    """Smallest erroneous clock ``i`` the node may copy an error to.

    ``i`` must sit strictly between an erroneous neighbor's clock and the
    node's own clock, and must itself be an erroneous clock value (<= -1).
    """
    lows = [
        q.clock
        for q in nbrs
        if q.status is Status.E and q.clock <= own.clock - 2 and q.clock <= -2
    ]
    return min(lows) + 1 if lows else None


def can_clear_error(own: NodeState, nbrs: Collection[NodeState]) -> bool:
    if own.status is not Status.E:
        return False
    for q in nbrs:
        if q.clock not in (own.clock - 1, own.clock, own.clock + 1):
            return False
        if q.clock == own.clock + 1 and q.status is not Status.C:
            return False
    return True


def unison_move(own: NodeState, nbrs: Collection[NodeState], B: int) -> bool:
    """Correct node whose neighbors are all level with it or one step ahead."""
    if own.status is not Status.C:
        return False
    ahead = increment_mod(own.clock, B)
    return all(q.clock in (own.clock, ahead) for q in nbrs)


def has_successor_neighbor(own: NodeState, nbrs: Collection[NodeState], B: int) -> bool:
    ahead = increment_mod(own.clock, B)
    return any(q.clock == ahead for q in nbrs)


def enabled_rule(
    own: NodeState, nbrs: Collection[NodeState], B: int, paux: bool
) -> Optional[Rule]:
    """The highest-priority rule whose guard holds, or None.

    Raises:
        DomainViolation: If ``own`` or a neighbor is outside the Pairs domain.
    """
    check_state(own, B)
    for q in nbrs:
        check_state(q, B)

    if is_active_root(own, nbrs, B):
        return RR
    target = error_propagation_target(own, nbrs)
    if target is not None:
        return RP(target)
    if can_clear_error(own, nbrs):
        return RC
    if unison_move(own, nbrs, B) and (paux or has_successor_neighbor(own, nbrs, B)):
        return RU
    return None


def apply_rule(own: NodeState, rule: Rule, B: int) -> NodeState:
    """Post-state of ``own`` after executing ``rule``."""
    if rule.kind == "RR":
        return erroneous(-B)
    if rule.kind == "RP":
        return erroneous(rule.target)
    if rule.kind == "RC":
        return correct(own.clock)
    if rule.kind == "RU":
        return correct(increment_mod(own.clock, B))
    raise ValueError(f"unknown rule kind '{rule.kind}'")
