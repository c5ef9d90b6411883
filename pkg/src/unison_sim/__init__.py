"""unison-sim - self-stabilizing asynchronous unison.

Simulates the unison protocol on a connected graph under chosen daemons,
records executions as replayable traces, checks them against the
protocol's invariants and move/round budgets, and runs synchronous
algorithms on top of the unison as a synchronizer.
"""

from unison_sim.core.algorithms import MinIdBfs, MinPropagation, alg_min_id_bfs, alg_min_propagation
from unison_sim.core.clocks import NodeState, Status, add_mod, clock_dist, increment_mod
from unison_sim.core.daemons import parse_daemon
from unison_sim.core.rules import Rule, apply_rule, enabled_rule
from unison_sim.core.scheduler import (
    EnumerationBounds,
    ExecutionLimits,
    enumerate_executions,
    round_boundaries,
    run_execution,
)
from unison_sim.core.synchronizer import SimNodeState, SynchronizerSystem, reconstruct_eta
from unison_sim.core.topology import Topology, build_topology, generate_topology
from unison_sim.core.trace import Trace
from unison_sim.core.trace_io import read_trace, write_trace
from unison_sim.core.unison import GREEDY, NEVER, PAux, UnisonSystem, apply_step, enabled_set
from unison_sim.core.verifier import check_bounds, check_invariants, classify_configuration

__version__ = "0.1.0"

__all__ = [
    "EnumerationBounds",
    "ExecutionLimits",
    "GREEDY",
    "MinIdBfs",
    "MinPropagation",
    "NEVER",
    "NodeState",
    "PAux",
    "Rule",
    "SimNodeState",
    "Status",
    "SynchronizerSystem",
    "Topology",
    "Trace",
    "UnisonSystem",
    "add_mod",
    "alg_min_id_bfs",
    "alg_min_propagation",
    "apply_rule",
    "apply_step",
    "build_topology",
    "check_bounds",
    "check_invariants",
    "classify_configuration",
    "clock_dist",
    "enabled_rule",
    "enabled_set",
    "enumerate_executions",
    "generate_topology",
    "increment_mod",
    "parse_daemon",
    "read_trace",
    "reconstruct_eta",
    "round_boundaries",
    "run_execution",
    "write_trace",
]
