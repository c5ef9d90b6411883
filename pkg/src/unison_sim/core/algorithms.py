"""Synchronous algorithms that the synchronizer can run asynchronously.

An algorithm is a local transition: a node's next state from its own state
and the multiset of its neighbors' states. Both shipped algorithms are
silent under the synchronous scheduler from any start.
"""

import random
from abc import ABC, abstractmethod
from typing import Any, Dict, Iterable, Optional, Sequence, Tuple

from .errors import DuplicateIdentifiers, UnisonError

RANDOM_VALUE_RANGE = (0, 99)


class SyncAlgorithm(ABC):
    name: str = ""

    def __init__(self, n: int):
        self.n = n

    @abstractmethod
    def transition(self, own: Any, nbrs: Iterable[Any]) -> Any:
        """Next state of a node."""

    @abstractmethod
    def initial_states(self) -> Tuple[Any, ...]:
        """The intended input configuration, one state per node."""

    @abstractmethod
    def random_state(self, p: int, rng: random.Random) -> Any:
        """An arbitrary (possibly corrupted) state for node ``p``."""

    @abstractmethod
    def params(self) -> Dict[str, Any]:
        """Constructor arguments, JSON-friendly."""

    def encode(self, state: Any) -> Any:
        return state

    def decode(self, obj: Any) -> Any:
        return obj

    def is_valid_state(self, p: int, state: Any) -> bool:
        return True

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.params()})"


class MinPropagation(SyncAlgorithm):
    """Every node converges to the global minimum value."""

    name = "min-prop"

    def __init__(self, values: Sequence[int]):
        super().__init__(len(values))
        self.values = tuple(int(v) for v in values)

    def transition(self, own, nbrs):
        return min([own, *nbrs])

    def initial_states(self):
        return self.values

    def random_state(self, p, rng):
        return rng.randint(*RANDOM_VALUE_RANGE)

    def params(self):
        return {"values": list(self.values)}

    def decode(self, obj):
        return int(obj)

    def is_valid_state(self, p, state):
        return isinstance(state, int)


class MinIdBfs(SyncAlgorithm):
    """Leader election on the smallest identifier plus a BFS tree towards it.

    State is ``(id, leader, dist)``. A node adopts the lexicographically
    smallest of ``(id, 0)`` and ``(q.leader, q.dist + 1)`` over neighbors
    ``q``, ignoring offers whose distance would exceed ``max_dist``. The cap
    makes leaders that no node owns die out.
    """

    name = "min-id-bfs"

    def __init__(self, ids: Sequence[int], max_dist: Optional[int] = None):
        super().__init__(len(ids))
        self.ids = tuple(int(i) for i in ids)
        if len(set(self.ids)) != len(self.ids):
            raise DuplicateIdentifiers(f"identifiers must be distinct, got {list(self.ids)}")
        self.max_dist = self.n if max_dist is None else int(max_dist)
        if self.max_dist < 0:
            raise UnisonError(f"max_dist must be >= 0, got {self.max_dist}")

    def transition(self, own, nbrs):
        node_id = own[0]
        best = (node_id, 0)
        for _, leader, dist in nbrs:
            if dist + 1 <= self.max_dist:
                best = min(best, (leader, dist + 1))
        return (node_id, best[0], best[1])

    def initial_states(self):
        return tuple((i, i, 0) for i in self.ids)

    def random_state(self, p, rng):
        low = min(self.ids)
        return (self.ids[p], rng.randint(max(0, low - 2), max(self.ids)), rng.randint(0, self.max_dist))

    def params(self):
        return {"ids": list(self.ids), "max_dist": self.max_dist}

    def encode(self, state):
        return list(state)

    def decode(self, obj):
        node_id, leader, dist = obj
        return (int(node_id), int(leader), int(dist))

    def is_valid_state(self, p, state):
        return (
            isinstance(state, tuple)
            and len(state) == 3
            and state[0] == self.ids[p]
            and 0 <= state[2] <= self.max_dist
        )


ALGORITHMS = {MinPropagation.name: MinPropagation, MinIdBfs.name: MinIdBfs}


def alg_min_propagation(values: Sequence[int]) -> MinPropagation:
    return MinPropagation(values)


def alg_min_id_bfs(ids: Sequence[int], max_dist: Optional[int] = None) -> MinIdBfs:
    return MinIdBfs(ids, max_dist)


def build_algorithm(name: str, params: Dict[str, Any]) -> SyncAlgorithm:
    """Rebuild an algorithm from its name and :meth:`SyncAlgorithm.params`."""
    try:
        cls = ALGORITHMS[name]
    except KeyError:
        raise UnisonError(f"unknown algorithm '{name}'; expected one of {sorted(ALGORITHMS)}") from None
    try:
        return cls(**params)
    except TypeError as e:
        raise UnisonError(f"bad parameters for '{name}': {e}") from e
