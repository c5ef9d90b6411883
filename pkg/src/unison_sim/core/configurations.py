"""Initial configurations: the text format and the built-in generators.

A configuration file has one line per node, ``C <clock>`` or ``E <clock>``,
in node order. Blank lines and ``#`` comments are ignored.
"""

import random
from pathlib import Path
from typing import List, Tuple

from .clocks import NodeState, all_domain_states, erroneous, make_state
from .errors import DomainViolation, InputError, InvalidInitialConfiguration

INIT_KINDS = ("random", "clean-uniform", "all-error-floor", "file")


def parse_configuration_text(text: str, B: int) -> Tuple[NodeState, ...]:
    states: List[NodeState] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise InputError(f"line {lineno}: expected '<C|E> <clock>', got '{line}'")
        status, clock = parts
        try:
            states.append(make_state(status.upper(), int(clock), B))
        except (ValueError, DomainViolation) as e:
            raise InvalidInitialConfiguration(f"line {lineno}: {e}") from e
    return tuple(states)


def read_configuration_file(path, B: int) -> Tuple[NodeState, ...]:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise InputError(f"cannot read configuration file '{path}': {e}") from e
    return parse_configuration_text(text, B)


def random_configuration(n: int, B: int, rng: random.Random) -> Tuple[NodeState, ...]:
    """Each node drawn uniformly from the 3B valid states."""
    domain = all_domain_states(B)
    return tuple(rng.choice(domain) for _ in range(n))


def clean_uniform(n: int, clock: int, B: int) -> Tuple[NodeState, ...]:
    state = make_state("C", clock, B)
    return (state,) * n


def all_error_floor(n: int, B: int) -> Tuple[NodeState, ...]:
    return (erroneous(-B),) * n


def build_initial_configuration(source: str, n: int, B: int, rng: random.Random):
    """Resolve an init source: ``random``, ``clean-uniform:c``,
    ``all-error-floor`` or ``file:PATH``.

    Raises:
        InvalidInitialConfiguration: If the result has the wrong number of
            nodes or a state outside the domain.
    """
    kind, _, arg = source.partition(":")
    if kind == "random":
        cfg = random_configuration(n, B, rng)
    elif kind == "clean-uniform":
        try:
            clock = int(arg or "0")
        except ValueError:
            raise InputError(f"clean-uniform needs an integer clock, got '{arg}'") from None
        try:
            cfg = clean_uniform(n, clock, B)
        except DomainViolation as e:
            raise InvalidInitialConfiguration(str(e)) from e
    elif kind == "all-error-floor":
        cfg = all_error_floor(n, B)
    elif kind == "file" and arg:
        cfg = read_configuration_file(arg, B)
    else:
        raise InputError(
            f"init must be one of random, clean-uniform:c, all-error-floor, file:PATH; got '{source}'"
        )
    if len(cfg) != n:
        raise InvalidInitialConfiguration(f"configuration has {len(cfg)} nodes, topology has {n}")
    return cfg

