"""Exceptions raised by the simulator.

Input problems derive from ``UnisonError`` (itself a ``ValueError``) so a
caller can treat them like any other bad value. A broken proof obligation
found while checking a trace is an ``InternalInvariantBroken`` instead: it
means the checker or the rules are wrong, not the input.
"""


class UnisonError(ValueError):
    """Base class for every input or usage error."""


class InputError(UnisonError):
    """A file, descriptor or command-line source string could not be used."""


class TopologyError(UnisonError):
    """The communication graph is not a connected simple graph."""


class Disconnected(TopologyError):
    pass


class SelfLoop(TopologyError):
    pass


class DuplicateEdge(TopologyError):
    pass


class OutOfRange(TopologyError):
    pass


class InvalidParams(TopologyError):
    pass


class GenerationFailed(TopologyError):
    pass


class DomainViolation(UnisonError):
    """A node state lies outside the Pairs domain for the period in use."""


class InvalidPeriod(UnisonError):
    """The period B is smaller than max(4, 2D+2)."""


class InvalidInitialConfiguration(UnisonError):
    pass


class InvalidDaemon(UnisonError):
    pass


class NodeNotEnabled(UnisonError):
    def __init__(self, node: int):
        self.node = node
        super().__init__(f"node {node} is not enabled")


class EmptySelection(UnisonError):
    def __init__(self):
        super().__init__("a step must select at least one node")


class ScriptExhausted(UnisonError):
    pass


class NotInError(UnisonError):
    pass


class NotClean(UnisonError):
    pass


class DuplicateIdentifiers(UnisonError):
    pass


class TraceFormatError(UnisonError):
    pass


class InternalInvariantBroken(RuntimeError):
    """A property the rules guarantee did not hold."""


class CharacterizationMismatch(InternalInvariantBroken):
    pass


class RootCreationDetected(InternalInvariantBroken):
    def __init__(self, step: int, nodes):
        self.step = step
        self.nodes = sorted(nodes)
        super().__init__(f"step {step} created roots {self.nodes}")
