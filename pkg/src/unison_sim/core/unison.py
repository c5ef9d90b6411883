"""Rule systems: the unison protocol evaluated over a whole configuration."""

from collections import Counter
from typing import Callable, Collection, Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

from .clocks import NodeState, state_violation
from .errors import EmptySelection, InvalidPeriod, NodeNotEnabled, UnisonError
from .rules import Rule, apply_rule, enabled_rule, is_root
from .topology import Topology
from .trace import Configuration, TraceHeader, unison_part


class PAux:
    """Named auxiliary predicate gating unison moves of locally minimal nodes."""

    def __init__(self, name: str, predicate: Callable[[NodeState, Collection[NodeState]], bool]):
        self.name = name
        self._predicate = predicate

    def __call__(self, own: NodeState, nbrs: Collection[NodeState]) -> bool:
        return bool(self._predicate(own, nbrs))

    def __repr__(self) -> str:
        return f"PAux({self.name!r})"


GREEDY = PAux("greedy", lambda own, nbrs: True)
NEVER = PAux("never", lambda own, nbrs: False)

PAUX_REGISTRY: Dict[str, PAux] = {p.name: p for p in (GREEDY, NEVER)}


def paux_from_name(name: str) -> PAux:
    try:
        return PAUX_REGISTRY[name]
    except KeyError:
        raise UnisonError(
            f"unknown P_aux '{name}'; expected one of {sorted(PAUX_REGISTRY)}"
        ) from None


def auto_period(topology: Topology) -> int:
    """Smallest period the protocol accepts: max(4, 2D+2)."""
    return max(4, 2 * topology.diameter + 2)


def check_period(B: int, topology: Topology) -> None:
    required = auto_period(topology)
    if B < required:
        raise InvalidPeriod(
            f"B={B} is too small for diameter {topology.diameter}; need B >= {required}"
        )


def neighbor_view(cfg: Sequence, topology: Topology, p: int) -> Counter:
    """Multiset of the states of ``p``'s neighbors."""
    return Counter(cfg[q] for q in topology.adjacency[p])


def validate_configuration(cfg: Sequence[NodeState], B: int) -> List[str]:
    """Domain violations of ``cfg``, one message per bad node (empty if ok)."""
    problems = []
    for p, state in enumerate(cfg):
        problem = state_violation(state, B)
        if problem is not None:
            problems.append(f"node {p}: {problem}")
    return problems


STEP_CACHE_SIZE = 1 << 16


def _remember(cache: dict, key, value) -> None:
    if len(cache) >= STEP_CACHE_SIZE:
        cache.clear()
    cache[key] = value


class RuleSystem:
    """Guarded rules evaluated node by node over a fixed topology and period.

    Subclasses decide which rule a node may fire and what it becomes; the
    scheduler, round accounting and checkers only talk to this interface.
    """

    def __init__(self, topology: Topology, B: int):
        self.topology = topology
        self.B = B
        self._rules_cache: Dict[Configuration, Dict[int, Rule]] = {}
        self._roots_cache: Dict[Tuple[NodeState, ...], FrozenSet[int]] = {}
        self._step_cache: Dict[Tuple[Configuration, FrozenSet[int]], Tuple[Configuration, Dict[int, Rule]]] = {}

    @property
    def paux_name(self) -> str:
        raise NotImplementedError

    @property
    def is_greedy(self) -> bool:
        return self.paux_name == "greedy"

    def rule_for(self, cfg: Configuration, p: int) -> Optional[Rule]:
        raise NotImplementedError

    def fire(self, cfg: Configuration, p: int, rule: Rule):
        raise NotImplementedError

    def paux_holds(self, cfg: Configuration, p: int) -> bool:
        raise NotImplementedError

    def state_violations(self, cfg: Configuration) -> List[str]:
        problems = []
        if len(cfg) != self.topology.n:
            problems.append(f"configuration has {len(cfg)} nodes, topology has {self.topology.n}")
        return problems + validate_configuration([unison_part(s) for s in cfg], self.B)

    def header_fields(self) -> dict:
        return {"paux": self.paux_name}

    def make_header(self, initial: Configuration, daemon: str, seed: int) -> TraceHeader:
        return TraceHeader(
            topology=self.topology,
            B=self.B,
            initial=tuple(initial),
            daemon=daemon,
            seed=seed,
            **self.header_fields(),
        )

    def neighbors_of(self, cfg: Configuration, p: int) -> Counter:
        return neighbor_view(cfg, self.topology, p)

    def enabled_set(self, cfg: Configuration) -> FrozenSet[int]:
        return frozenset(self._rules(cfg))

    def enabled_rules(self, cfg: Configuration) -> Dict[int, Rule]:
        return dict(self._rules(cfg))

    def _rules(self, cfg: Configuration) -> Dict[int, Rule]:
        try:
            return self._rules_cache[cfg]
        except KeyError:
            pass
        except TypeError:
            return self._compute_rules(cfg)
        rules = self._compute_rules(cfg)
        _remember(self._rules_cache, cfg, rules)
        return rules

    def _compute_rules(self, cfg: Configuration) -> Dict[int, Rule]:
        rules = {}
        for p in range(self.topology.n):
            rule = self.rule_for(cfg, p)
            if rule is not None:
                rules[p] = rule
        return rules

    def apply_step(
        self, cfg: Configuration, selected: Iterable[int]
    ) -> Tuple[Configuration, Dict[int, Rule]]:
        """Fire every selected node against the same pre-step configuration.

        Raises:
            EmptySelection: If nothing is selected.
            NodeNotEnabled: If a selected node has no enabled rule.
        """
        selected = frozenset(selected)
        if not selected:
            raise EmptySelection()
        key = (cfg, selected)
        try:
            post, fired = self._step_cache[key]
            return post, dict(fired)
        except (KeyError, TypeError):
            pass

        rules = self._rules(cfg)
        fired = {}
        for p in sorted(selected):
            if p not in rules:
                raise NodeNotEnabled(p)
            fired[p] = rules[p]
        post = list(cfg)
        for p, rule in fired.items():
            post[p] = self.fire(cfg, p, rule)
        post = tuple(post)
        try:
            _remember(self._step_cache, key, (post, fired))
        except TypeError:
            pass
        return post, dict(fired)

    def roots(self, cfg: Configuration) -> FrozenSet[int]:
        plain = tuple(unison_part(s) for s in cfg)
        try:
            return self._roots_cache[plain]
        except KeyError:
            pass
        except TypeError:
            return self._compute_roots(plain)
        roots = self._compute_roots(plain)
        _remember(self._roots_cache, plain, roots)
        return roots

    def _compute_roots(self, plain: Sequence[NodeState]) -> FrozenSet[int]:
        return frozenset(
            p
            for p in range(self.topology.n)
            if is_root(plain[p], [plain[q] for q in self.topology.adjacency[p]], self.B)
        )

    def is_clean(self, cfg: Configuration) -> bool:
        return not self.roots(cfg)


class UnisonSystem(RuleSystem):
    """The plain unison protocol with a given auxiliary predicate."""

    def __init__(self, topology: Topology, B: int, paux: PAux = GREEDY):
        super().__init__(topology, B)
        self.paux = paux

    @property
    def paux_name(self) -> str:
        return self.paux.name

    def rule_for(self, cfg, p):
        own = cfg[p]
        nbrs = self.neighbors_of(cfg, p)
        return enabled_rule(own, nbrs, self.B, self.paux(own, nbrs))

    def fire(self, cfg, p, rule):
        return apply_rule(cfg[p], rule, self.B)

    def paux_holds(self, cfg, p):
        return self.paux(cfg[p], self.neighbors_of(cfg, p))


def enabled_set(cfg, topology: Topology, B: int, paux: PAux = GREEDY) -> FrozenSet[int]:
    return UnisonSystem(topology, B, paux).enabled_set(cfg)


def apply_step(cfg, topology: Topology, B: int, selected, paux: PAux = GREEDY):
    """Apply one step of the plain protocol; see :meth:`RuleSystem.apply_step`."""
    return UnisonSystem(topology, B, paux).apply_step(cfg, selected)
