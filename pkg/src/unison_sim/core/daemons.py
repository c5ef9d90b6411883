"""Daemons: who gets to move at each step.

A daemon only chooses among enabled nodes; it never looks at the rules.
All randomness comes from the ``random.Random`` the scheduler passes in.
"""

import random
from abc import ABC, abstractmethod
from typing import FrozenSet, List, Sequence

from .errors import InvalidDaemon, ScriptExhausted

MAX_RESAMPLES = 64


class Daemon(ABC):
    descriptor: str = ""

    @abstractmethod
    def select(self, enabled: Sequence[int], step: int, rng: random.Random) -> FrozenSet[int]:
        """Pick the nodes that move at 1-based ``step``; ``enabled`` is sorted."""

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.descriptor!r})"


class SynchronousDaemon(Daemon):
    descriptor = "sync"

    def select(self, enabled, step, rng):
        return frozenset(enabled)


class CentralRandomDaemon(Daemon):
    descriptor = "central-random"

    def select(self, enabled, step, rng):
        return frozenset({rng.choice(list(enabled))})


class DistributedRandomDaemon(Daemon):
    """Each enabled node moves independently with probability ``p``.

    An empty draw is resampled; after ``MAX_RESAMPLES`` empty draws a single
    node is chosen uniformly instead.
    """

    def __init__(self, p: float):
        if not 0.0 < p <= 1.0:
            raise InvalidDaemon(f"selection probability must be in (0, 1], got {p}")
        self.p = p
        self.descriptor = f"dist-random:{p}"

    def select(self, enabled, step, rng):
        for _ in range(MAX_RESAMPLES):
            chosen = frozenset(q for q in enabled if rng.random() < self.p)
            if chosen:
                return chosen
        return frozenset({rng.choice(list(enabled))})


class ScriptedDaemon(Daemon):
    """Replays a fixed list of selections, one per step."""

    def __init__(self, script: Sequence[FrozenSet[int]]):
        self.script: List[FrozenSet[int]] = [frozenset(s) for s in script]
        self.descriptor = "scripted:" + "|".join(
            ",".join(str(q) for q in sorted(s)) for s in self.script
        )

    def select(self, enabled, step, rng):
        if step > len(self.script):
            raise ScriptExhausted(f"script has {len(self.script)} steps, step {step} requested")
        return self.script[step - 1]


def parse_daemon(text: str) -> Daemon:
    """Build a daemon from ``sync``, ``central-random``, ``dist-random:P`` or
    ``scripted:0|0,1|2``."""
    kind, _, arg = text.strip().partition(":")
    if kind in ("sync", "synchronous"):
        return SynchronousDaemon()
    if kind in ("central-random", "central"):
        return CentralRandomDaemon()
    if kind in ("dist-random", "distributed"):
        try:
            return DistributedRandomDaemon(float(arg or "0.5"))
        except ValueError as e:
            raise InvalidDaemon(f"bad probability in '{text}': {e}") from e
    if kind == "scripted":
        try:
            script = [
                frozenset(int(tok) for tok in chunk.split(",") if tok.strip())
                for chunk in arg.split("|")
            ] if arg else []
        except ValueError as e:
            raise InvalidDaemon(f"bad script in '{text}': {e}") from e
        return ScriptedDaemon(script)
    raise InvalidDaemon(
        f"unknown daemon '{text}'; expected sync, central-random, dist-random:P or scripted:..."
    )
