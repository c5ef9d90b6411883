"""Records produced by an execution: header, steps and termination."""

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, FrozenSet, List, Optional, Sequence, Tuple

from .clocks import NodeState
from .rules import Rule
from .topology import Topology

Configuration = Tuple[Any, ...]


class Termination(str, Enum):
    TERMINAL = "Terminal"
    STEP_LIMIT = "StepLimit"
    CLEAN = "CleanReachedAndStopped"
    SCRIPT_INVALID = "ScriptInvalid"
    SCRIPT_EXHAUSTED = "ScriptExhausted"
    CYCLE = "Cycle"
    STOP_CONDITION = "StopConditionMet"


@dataclass(frozen=True)
class StepRecord:
    """Step ``index`` turns configuration ``index-1`` into ``post``."""

    index: int
    selected: FrozenSet[int]
    fired: Dict[int, Rule]
    post: Configuration


@dataclass(frozen=True)
class TraceHeader:
    topology: Topology
    B: int
    initial: Configuration
    daemon: str
    paux: str
    seed: int
    algorithm: Optional[str] = None
    algorithm_params: Dict[str, Any] = field(default_factory=dict)
    mode: Optional[str] = None


@dataclass
class Trace:
    header: TraceHeader
    steps: List[StepRecord]
    termination: Termination

    def __len__(self) -> int:
        return len(self.steps)

    def configurations(self) -> List[Configuration]:
        """γ^0 .. γ^k, where k is the number of steps."""
        return [self.header.initial] + [step.post for step in self.steps]

    def total_moves(self) -> int:
        return sum(len(step.fired) for step in self.steps)


def unison_part(state) -> NodeState:
    """The (status, clock) pair of a node, whatever else it carries."""
    return getattr(state, "unison", state)


def unison_configuration(cfg: Sequence) -> Tuple[NodeState, ...]:
    return tuple(unison_part(s) for s in cfg)
