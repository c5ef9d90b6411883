"""JSON Lines trace files.

Line 1 is the header, then one object per step, then ``{"termination": ...}``.
Replaying a written trace must reproduce every step exactly.
"""

import json
import logging
from pathlib import Path
from typing import Any, Dict, Iterable, Iterator, List, Optional

from .algorithms import SyncAlgorithm, build_algorithm
from .clocks import make_state
from .errors import TraceFormatError
from .rules import RP, Rule
from .synchronizer import SimNodeState
from .topology import build_topology
from .trace import StepRecord, Termination, Trace, TraceHeader

logger = logging.getLogger(__name__)

TRACE_VERSION = 1


def _encode_state(state, alg: Optional[SyncAlgorithm]) -> List[Any]:
    if isinstance(state, SimNodeState):
        return [state.unison.status.value, state.unison.clock, alg.encode(state.old), alg.encode(state.curr)]
    return [state.status.value, state.clock]


def _decode_state(obj, B: int, alg: Optional[SyncAlgorithm]):
    if alg is None:
        status, clock = obj
        return make_state(status, clock, B)
    status, clock, old, curr = obj
    return SimNodeState(make_state(status, clock, B), alg.decode(old), alg.decode(curr))


def _encode_rule(p: int, rule: Rule) -> List[Any]:
    return [p, rule.kind, rule.target] if rule.kind == "RP" else [p, rule.kind]


def _decode_rule(obj) -> Rule:
    kind = obj[1]
    if kind == "RP":
        return RP(int(obj[2]))
    if kind not in ("RR", "RC", "RU"):
        raise TraceFormatError(f"unknown rule '{kind}'")
    return Rule(kind)


def header_to_dict(header: TraceHeader, alg: Optional[SyncAlgorithm] = None) -> Dict[str, Any]:
    data = {
        "version": TRACE_VERSION,
        "n": header.topology.n,
        "edges": [list(e) for e in header.topology.edges],
        "B": header.B,
        "init": [_encode_state(s, alg) for s in header.initial],
        "daemon": header.daemon,
        "paux": header.paux,
        "seed": header.seed,
    }
    if header.algorithm is not None:
        data["alg"] = {"name": header.algorithm, "params": header.algorithm_params}
        data["mode"] = header.mode
    return data


def trace_lines(trace: Trace) -> Iterator[Dict[str, Any]]:
    """The JSON objects of a trace file, in order."""
    header = trace.header
    alg = build_algorithm(header.algorithm, header.algorithm_params) if header.algorithm else None
    yield header_to_dict(header, alg)
    for step in trace.steps:
        yield {
            "i": step.index,
            "sel": sorted(step.selected),
            "fired": [_encode_rule(p, r) for p, r in sorted(step.fired.items())],
            "post": [_encode_state(s, alg) for s in step.post],
        }
    yield {"termination": trace.termination.value}


def write_trace(trace: Trace, path) -> Path:
    path = Path(path)
    if path.parent and not path.parent.exists():
        path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        for obj in trace_lines(trace):
            fh.write(json.dumps(obj, ensure_ascii=True) + "\n")
    logger.info("wrote %d steps to %s", len(trace.steps), path)
    return path


def parse_trace_lines(lines: Iterable[str]) -> Trace:
    """Build a :class:`Trace` from the lines of a trace file.

    Raises:
        TraceFormatError: On malformed JSON, missing fields, states outside
            the domain, or a missing termination line.
    """
    objects = []
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            objects.append(json.loads(line))
        except json.JSONDecodeError as e:
            raise TraceFormatError(f"line {lineno}: invalid JSON ({e.msg})") from e
    if len(objects) < 2:
        raise TraceFormatError("trace needs a header and a termination line")
    if "termination" not in objects[-1]:
        raise TraceFormatError("trace is truncated: no termination line")

    try:
        head = objects[0]
        if head.get("version") != TRACE_VERSION:
            raise TraceFormatError(f"unsupported trace version {head.get('version')!r}")
        topology = build_topology(head["n"], [tuple(e) for e in head["edges"]])
        B = int(head["B"])
        alg_info = head.get("alg")
        alg = build_algorithm(alg_info["name"], alg_info["params"]) if alg_info else None
        header = TraceHeader(
            topology=topology,
            B=B,
            initial=tuple(_decode_state(s, B, alg) for s in head["init"]),
            daemon=head["daemon"],
            paux=head["paux"],
            seed=int(head["seed"]),
            algorithm=alg_info["name"] if alg_info else None,
            algorithm_params=alg_info["params"] if alg_info else {},
            mode=head.get("mode"),
        )
        steps = []
        for expected, obj in enumerate(objects[1:-1], start=1):
            if obj["i"] != expected:
                raise TraceFormatError(f"step {obj['i']} found where step {expected} was expected")
            fired = {int(f[0]): _decode_rule(f) for f in obj["fired"]}
            post = tuple(_decode_state(s, B, alg) for s in obj["post"])
            steps.append(StepRecord(expected, frozenset(obj["sel"]), fired, post))
        termination = Termination(objects[-1]["termination"])
    except TraceFormatError:
        raise
    except (KeyError, TypeError, IndexError, ValueError) as e:
        raise TraceFormatError(f"malformed trace: {e}") from e
    return Trace(header, steps, termination)


def read_trace(path) -> Trace:
    path = Path(path)
    try:
        with path.open("r", encoding="utf-8") as fh:
            return parse_trace_lines(fh)
    except OSError as e:
        raise TraceFormatError(f"cannot read trace '{path}': {e}") from e
