"""Communication graphs: validation, metrics, generators and graph files."""

import itertools
import logging
import random
from pathlib import Path
from typing import Dict, FrozenSet, Iterable, Iterator, List, Optional, Tuple

import networkx as nx

from .errors import (
    Disconnected,
    DuplicateEdge,
    GenerationFailed,
    InputError,
    InvalidParams,
    OutOfRange,
    SelfLoop,
)

logger = logging.getLogger(__name__)

Edge = Tuple[int, int]

GENERATOR_KINDS = ("path", "ring", "star", "grid", "random_connected", "complete")
_KIND_ALIASES = {"random": "random_connected", "cycle": "ring"}
_MAX_GENERATION_ATTEMPTS = 100


class Topology:
    """An undirected, connected, simple graph over nodes ``0..n-1``.

    Build it with :func:`build_topology` or :func:`generate_topology`; the
    constructor trusts its arguments.
    """

    def __init__(self, graph: nx.Graph):
        self._graph = graph
        self.n = graph.number_of_nodes()
        self.adjacency: Tuple[FrozenSet[int], ...] = tuple(
            frozenset(graph.neighbors(p)) for p in range(self.n)
        )
        self._distances: Optional[Dict[int, Dict[int, int]]] = None
        self._edges: Tuple[Edge, ...] = tuple(sorted((min(u, v), max(u, v)) for u, v in graph.edges()))

    @property
    def edges(self) -> List[Edge]:
        return list(self._edges)

    @property
    def graph(self) -> nx.Graph:
        return self._graph

    def neighbors(self, p: int) -> FrozenSet[int]:
        return self.adjacency[p]

    def _all_distances(self) -> Dict[int, Dict[int, int]]:
        if self._distances is None:
            self._distances = dict(nx.all_pairs_shortest_path_length(self._graph))
        return self._distances

    def distance(self, u: int, v: int) -> int:
        """Hop count of a shortest path between ``u`` and ``v``."""
        for p in (u, v):
            if not 0 <= p < self.n:
                raise OutOfRange(f"node {p} is not in 0..{self.n - 1}")
        return self._all_distances()[u][v]

    def eccentricity(self, p: int) -> int:
        return max(self._all_distances()[p].values())

    @property
    def diameter(self) -> int:
        return max(self.eccentricity(p) for p in range(self.n))

    def __eq__(self, other) -> bool:
        return isinstance(other, Topology) and self.n == other.n and self._edges == other._edges

    def __hash__(self) -> int:
        return hash((self.n, self._edges))

    def __repr__(self) -> str:
        return f"Topology(n={self.n}, edges={self.edges})"


def build_topology(n: int, edges: Iterable[Edge]) -> Topology:
    """Validate an edge list and build a :class:`Topology`.

    Raises:
        InvalidParams: If ``n`` is smaller than 1.
        OutOfRange: If an endpoint is not in ``0..n-1``.
        SelfLoop: If an edge joins a node to itself.
        DuplicateEdge: If the same unordered pair is listed twice.
        Disconnected: If the graph is not connected.
    """
    if n < 1:
        raise InvalidParams(f"a topology needs at least one node, got n={n}")
    graph = nx.Graph()
    graph.add_nodes_from(range(n))
    for u, v in edges:
        if not (0 <= u < n and 0 <= v < n):
            raise OutOfRange(f"edge ({u}, {v}) has an endpoint outside 0..{n - 1}")
        if u == v:
            raise SelfLoop(f"self-loop on node {u}")
        if graph.has_edge(u, v):
            raise DuplicateEdge(f"edge ({u}, {v}) is listed twice")
        graph.add_edge(u, v)
    if not nx.is_connected(graph):
        raise Disconnected(
            f"graph has {nx.number_connected_components(graph)} connected components"
        )
    return Topology(graph)


def distance(topology: Topology, u: int, v: int) -> int:
    return topology.distance(u, v)


def diameter(topology: Topology) -> int:
    return topology.diameter


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise InvalidParams(message)


def generate_topology(kind: str, params: Dict[str, int], seed: int = 0) -> Topology:
    """Generate a standard topology.

    Args:
        kind: One of ``path``, ``ring``, ``star``, ``grid``,
            ``random_connected`` (alias ``random``) or ``complete``.
        params: ``{"n": N}`` for most kinds, ``{"rows": R, "cols": C}`` for
            grids and ``{"n": N, "m": M}`` for random connected graphs.
        seed: Seed for the random kind; other kinds ignore it.

    Returns:
        Topology: The generated graph with nodes relabelled ``0..n-1``.

    Example:
        >>> generate_topology("ring", {"n": 4}).edges
        [(0, 1), (0, 3), (1, 2), (2, 3)]
    """
    kind = _KIND_ALIASES.get(kind, kind)
    if kind not in GENERATOR_KINDS:
        raise InvalidParams(f"unknown topology kind '{kind}'")

    if kind == "grid":
        rows, cols = params.get("rows", 0), params.get("cols", 0)
        _require(rows >= 1 and cols >= 1, f"grid needs rows, cols >= 1, got {rows}x{cols}")
        graph = nx.convert_node_labels_to_integers(
            nx.grid_2d_graph(rows, cols), ordering="sorted"
        )
        return Topology(graph)

    n = params.get("n", 0)
    _require(n >= 1, f"{kind} needs n >= 1, got n={n}")

    if kind == "path":
        graph = nx.path_graph(n)
    elif kind == "ring":
        _require(n >= 3, f"ring needs n >= 3, got n={n}")
        graph = nx.cycle_graph(n)
    elif kind == "star":
        _require(n >= 2, f"star needs n >= 2, got n={n}")
        graph = nx.star_graph(n - 1)
    elif kind == "complete":
        graph = nx.complete_graph(n)
    else:
        graph = _random_connected(n, params.get("m", n - 1), seed)
    return Topology(graph)


def _random_connected(n: int, m: int, seed: int) -> nx.Graph:
    _require(
        n - 1 <= m <= n * (n - 1) // 2,
        f"random connected graph on {n} nodes needs {n - 1} <= m <= {n * (n - 1) // 2}, got m={m}",
    )
    rng = random.Random(seed)
    for attempt in range(_MAX_GENERATION_ATTEMPTS):
        graph = nx.gnm_random_graph(n, m, seed=rng.randrange(2**32))
        if nx.is_connected(graph):
            logger.debug("random graph n=%d m=%d connected after %d attempts", n, m, attempt + 1)
            return graph
    raise GenerationFailed(
        f"no connected graph with n={n}, m={m} after {_MAX_GENERATION_ATTEMPTS} attempts"
    )


def connected_graphs(n: int) -> Iterator[Topology]:
    """Yield every labelled connected simple graph on ``n`` nodes."""
    pairs = list(itertools.combinations(range(n), 2))
    for size in range(n - 1, len(pairs) + 1):
        for edges in itertools.combinations(pairs, size):
            graph = nx.Graph()
            graph.add_nodes_from(range(n))
            graph.add_edges_from(edges)
            if nx.is_connected(graph):
                yield Topology(graph)


def parse_graph_file(path) -> Topology:
    """Read a graph file: ``n m`` on the first line, then ``m`` lines ``u v``.

    Blank lines and ``#`` comments are skipped.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise InputError(f"cannot read graph file '{path}': {e}") from e

    rows = []
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            rows.append(line.split())
    if not rows:
        raise InputError(f"graph file '{path}' is empty")
    try:
        n, m = (int(tok) for tok in rows[0])
        edges = [(int(u), int(v)) for u, v in rows[1:]]
    except ValueError as e:
        raise InputError(f"malformed graph file '{path}': {e}") from e
    if len(edges) != m:
        raise InputError(f"graph file '{path}' declares {m} edges but lists {len(edges)}")
    return build_topology(n, edges)


def _parse_generator_params(kind: str, text: str) -> Dict[str, int]:
    kind = _KIND_ALIASES.get(kind, kind)
    try:
        if kind == "grid":
            rows, cols = text.lower().split("x")
            return {"rows": int(rows), "cols": int(cols)}
        if kind == "random_connected":
            n, m = text.split(",")
            return {"n": int(n), "m": int(m)}
        return {"n": int(text)}
    except ValueError as e:
        raise InputError(f"bad parameters '{text}' for topology kind '{kind}'") from e


def parse_graph_source(source: str, seed: int = 0) -> Topology:
    """Resolve a ``file:PATH`` or ``gen:KIND:PARAMS`` graph source."""
    scheme, _, rest = source.partition(":")
    if scheme == "file" and rest:
        return parse_graph_file(rest)
    if scheme == "gen":
        kind, _, params = rest.partition(":")
        if not params:
            raise InputError(f"graph source '{source}' is missing parameters")
        return generate_topology(kind, _parse_generator_params(kind, params), seed)
    raise InputError(f"graph source must be 'file:PATH' or 'gen:KIND:PARAMS', got '{source}'")
