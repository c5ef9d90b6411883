"""Command-line run parameters resolved into simulator inputs."""

import random
from dataclasses import dataclass
from typing import Optional, Tuple

from unison_sim.core.configurations import build_initial_configuration
from unison_sim.core.daemons import Daemon, parse_daemon
from unison_sim.core.errors import InputError
from unison_sim.core.scheduler import ExecutionLimits
from unison_sim.core.topology import Topology, parse_graph_source
from unison_sim.core.unison import auto_period, check_period


@dataclass(frozen=True)
class ResolvedRun:
    topology: Topology
    B: int
    initial: Tuple
    daemon: Daemon
    limits: ExecutionLimits


@dataclass(frozen=True)
class RunSpec:
    graph: str
    B: str = "auto"
    init: str = "random"
    daemon: str = "dist-random:0.5"
    paux: str = "greedy"
    seed: int = 0
    max_steps: int = 10_000
    stop_on: str = "clean"
    out: Optional[str] = None

    def period_for(self, topology: Topology) -> int:
        if self.B == "auto":
            return auto_period(topology)
        try:
            B = int(self.B)
        except ValueError:
            raise InputError(f"--B must be an integer or 'auto', got '{self.B}'") from None
        check_period(B, topology)
        return B

    def resolve(self) -> ResolvedRun:
        """Build every input before any step runs; raises on the first bad one."""
        topology = parse_graph_source(self.graph, self.seed)
        B = self.period_for(topology)
        daemon = parse_daemon(self.daemon)
        limits = ExecutionLimits(max_steps=self.max_steps, stop_on=self.stop_on)
        initial = build_initial_configuration(self.init, topology.n, B, random.Random(self.seed))
        return ResolvedRun(topology, B, initial, daemon, limits)
