import itertools
import random

import pytest

from unison_sim.core import verifier
from unison_sim.core.campaign import forge_root_creation
from unison_sim.core.clocks import all_domain_states, correct, erroneous
from unison_sim.core.configurations import random_configuration
from unison_sim.core.daemons import SynchronousDaemon, parse_daemon
from unison_sim.core.errors import DomainViolation, InternalInvariantBroken, NotInError, RootCreationDetected
from unison_sim.core.rules import RC, RP, RR, RU
from unison_sim.core.scheduler import ExecutionLimits, run_execution, stop_after_clean
from unison_sim.core.topology import build_topology, connected_graphs, generate_topology
from unison_sim.core.trace import StepRecord, Termination, Trace, TraceHeader
from unison_sim.core.unison import NEVER, UnisonSystem, auto_period
from unison_sim.core.verifier import (
    ConfigClass,
    check_bounds,
    check_invariants,
    classify_configuration,
    clear_caches,
    clock_offsets,
    d_path_membership,
    find_e_path,
    move_census,
    roots_of,
    segment_decomposition,
)

PAIR = build_topology(2, [(0, 1)])
TRIPLE = build_topology(3, [(0, 1), (1, 2)])
SINGLE = build_topology(1, [])
SQUARE = build_topology(4, [(0, 1), (1, 2), (2, 3), (3, 0)])

# -1 and 5 both sit right below the 0 in the middle
TAIL_MERGE = (correct(-1), correct(0), correct(5))


def single_error_trace(max_steps=10_000, stop_on="clean"):
    system = UnisonSystem(SINGLE, 4)
    trace = run_execution(system, (erroneous(-4),), SynchronousDaemon(), ExecutionLimits(max_steps, stop_on))
    return system, trace


def sampled_trace(kind, n, daemon, seed):
    params = {"n": n, "m": n + n // 2} if kind == "random" else {"n": n}
    topology = generate_topology(kind, params, seed=seed)
    B = auto_period(topology)
    system = UnisonSystem(topology, B)
    cfg0 = random_configuration(n, B, random.Random(seed))
    trace = run_execution(
        system, cfg0, parse_daemon(daemon), ExecutionLimits(max_steps=2000),
        seed=seed, stop_when=stop_after_clean(system, 2 * n),
    )
    return system, trace


class TestClassify:
    def test_uniform_start_is_clean(self):
        ring = generate_topology("ring", {"n": 3})
        assert classify_configuration((correct(-8),) * 3, ring, 8) is ConfigClass.CLEAN

    def test_reset_root_next_to_successor(self):
        cls = classify_configuration((erroneous(-6), correct(-5)), PAIR, 6)
        assert cls is ConfigClass.ALMOST_CLEAN
        assert cls.is_almost_clean

    def test_error_can_still_spread(self):
        assert classify_configuration((erroneous(-6), correct(3)), PAIR, 6) is ConfigClass.DIRTY

    def test_state_outside_domain(self):
        with pytest.raises(DomainViolation):
            classify_configuration((erroneous(0), correct(0)), PAIR, 6)

    def test_tail_and_wrap_meet_at_zero(self):
        assert classify_configuration(TAIL_MERGE, TRIPLE, 6) is ConfigClass.CLEAN

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_every_small_configuration(self, n):
        for topology in connected_graphs(n):
            B = auto_period(topology)
            seen = set()
            for cfg in itertools.product(all_domain_states(B), repeat=n):
                cls = classify_configuration(cfg, topology, B)
                seen.add(cls)
                if cls.is_almost_clean:
                    offsets = clock_offsets(cfg, topology, B)
                    assert offsets is not None, cfg
                    assert -min(offsets) <= topology.diameter, cfg
                    assert any(all(s.clock != c for s in cfg) for c in range(B)), cfg
            assert seen == set(ConfigClass)


class TestOffsets:
    def test_level_clocks(self):
        assert clock_offsets((correct(3),) * 3, TRIPLE, 8) == (0, 0, 0)

    def test_wrap_to_zero(self):
        assert clock_offsets((correct(7), correct(0)), PAIR, 8) == (-1, 0)

    def test_tail_and_wrap_meet_at_zero(self):
        assert clock_offsets(TAIL_MERGE, TRIPLE, 6) == (-1, 0, -1)

    def test_staircase(self):
        path = generate_topology("path", {"n": 4})
        assert clock_offsets((correct(0), correct(1), correct(2), correct(3)), path, 8) == (-3, -2, -1, 0)

    def test_neighbors_too_far_apart(self):
        assert clock_offsets((correct(0), correct(2)), PAIR, 8) is None

    def test_clocks_winding_around_a_cycle(self):
        cfg = (correct(0), correct(1), correct(2), correct(3))
        assert clock_offsets(cfg, SQUARE, 4) is None


class TestRoots:
    def test_no_roots_when_level(self):
        assert roots_of((correct(5),) * 3, TRIPLE, 8) == frozenset()

    def test_isolated_error(self):
        assert roots_of((erroneous(-3),), SINGLE, 8) == {0}

    def test_correct_node_left_behind(self):
        assert roots_of((correct(0), correct(2)), PAIR, 8) == {0}


class TestPaths:
    def test_root_is_its_own_path(self):
        assert find_e_path((erroneous(-6), correct(-5)), PAIR, 6, 0) == [0]

    def test_descends_to_the_root(self):
        cfg = (erroneous(-4), erroneous(-5), erroneous(-6))
        assert find_e_path(cfg, TRIPLE, 6, 0) == [0, 1, 2]

    def test_correct_node_has_no_e_path(self):
        with pytest.raises(NotInError):
            find_e_path((erroneous(-6), correct(-5)), PAIR, 6, 1)

    def test_d_path(self):
        assert d_path_membership((correct(-5), erroneous(-6)), PAIR, 6, 0)
        assert d_path_membership((correct(-5), erroneous(-6)), PAIR, 6, 1)
        assert not d_path_membership((correct(5),) * 3, TRIPLE, 8, 1)

    def test_d_path_needs_unit_descent(self):
        cfg = (correct(0), correct(-2), erroneous(-6))
        assert not d_path_membership(cfg, TRIPLE, 8, 0)
        assert d_path_membership(cfg, TRIPLE, 8, 1)


class TestSegments:
    def test_clean_start_is_one_segment(self):
        ring = generate_topology("ring", {"n": 3})
        system = UnisonSystem(ring, 4)
        trace = run_execution(system, (correct(0),) * 3, SynchronousDaemon(), ExecutionLimits(3))
        decomposition = segment_decomposition(trace)
        assert decomposition.boundaries == []
        assert len(decomposition.segments) == 1
        assert decomposition.segments[0].clean

    def test_clearing_the_root_closes_a_segment(self):
        _, trace = single_error_trace(max_steps=3, stop_on="terminal")
        decomposition = segment_decomposition(trace)
        assert decomposition.boundaries == [1]
        assert [(s.start, s.end, s.clean) for s in decomposition.segments] == [(0, 1, False), (1, 3, True)]

    def test_root_creation_is_rejected(self):
        _, trace = single_error_trace(max_steps=3, stop_on="terminal")
        with pytest.raises(RootCreationDetected):
            segment_decomposition(forge_root_creation(trace))

    @pytest.mark.parametrize("seed", range(5))
    def test_at_most_n_boundaries(self, seed):
        _, trace = sampled_trace("ring", 6, "central-random", seed)
        assert len(segment_decomposition(trace).boundaries) <= 6


class TestCensus:
    def test_empty_trace(self):
        system = UnisonSystem(generate_topology("ring", {"n": 3}), 4, NEVER)
        trace = run_execution(system, (correct(1),) * 3, SynchronousDaemon())
        census = move_census(trace)
        assert census.total == 0
        assert census.totals() == {"RR": 0, "RP": 0, "RC": 0, "RU": 0}

    def test_single_clear(self):
        _, trace = single_error_trace()
        assert move_census(trace).totals() == {"RR": 0, "RP": 0, "RC": 1, "RU": 0}

    def test_lockstep_ring(self):
        system = UnisonSystem(generate_topology("ring", {"n": 3}), 8)
        trace = run_execution(system, (correct(-8),) * 3, SynchronousDaemon(), ExecutionLimits(4, "never"))
        census = move_census(trace)
        assert census.totals()["RU"] == 12
        assert census.unclean_u == {}

    def test_propagation_targets(self):
        system = UnisonSystem(PAIR, 6)
        trace = run_execution(system, (erroneous(-6), correct(3)), parse_daemon("scripted:1"))
        assert move_census(trace).rp_targets == {1: [-5]}


class TestInvariants:
    @pytest.mark.parametrize("kind", ["path", "ring", "star", "random"])
    @pytest.mark.parametrize("daemon", ["sync", "central-random", "dist-random:0.5"])
    def test_legal_runs(self, kind, daemon):
        for seed in range(3):
            system, trace = sampled_trace(kind, 6, daemon, seed)
            invariants = check_invariants(trace, system)
            assert invariants.ok, invariants.violations
            assert "liveness" in invariants.checks
            assert "replay" in invariants.checks

    def test_tail_and_wrap_start(self):
        system = UnisonSystem(TRIPLE, 6)
        trace = run_execution(system, TAIL_MERGE, SynchronousDaemon(), ExecutionLimits(12, "never"))
        report = check_invariants(trace, system)
        assert report.ok, report.violations
        assert check_bounds(trace, system).ok

    def test_clean_start_keeps_clocks_tight(self):
        topology = generate_topology("path", {"n": 4})
        system = UnisonSystem(topology, 8)
        cfg0 = (correct(0), correct(1), correct(2), correct(3))
        trace = run_execution(system, cfg0, parse_daemon("central-random"), ExecutionLimits(60), seed=1)
        report = check_invariants(trace, system)
        assert report.ok
        assert "color-value" in report.checks

    def test_forged_root_creation(self):
        system, trace = sampled_trace("ring", 5, "sync", 1)
        report = check_invariants(forge_root_creation(trace))
        assert not report.ok
        assert "root-monotonicity" in {v.check for v in report.violations}

    def test_tampered_step_fails_replay(self):
        system = UnisonSystem(generate_topology("ring", {"n": 3}), 4)
        trace = run_execution(system, (correct(0),) * 3, SynchronousDaemon(), ExecutionLimits(2))
        first = trace.steps[0]
        tampered = StepRecord(1, first.selected, first.fired, (correct(1), correct(1), correct(0)))
        forged = Trace(trace.header, [tampered] + trace.steps[1:], trace.termination)
        assert {v.check for v in check_invariants(forged, system).violations} >= {"replay"}


class TestBounds:
    def test_single_node(self):
        system, trace = single_error_trace()
        report = check_bounds(trace, system)
        assert report.ok
        assert report.metrics["moves"]["RR"] == 0
        assert report.metrics["rounds_to_clean"] == 1
        assert report.metrics["segments"] == 2

    @pytest.mark.parametrize("kind", ["path", "ring", "star"])
    def test_sampled_runs_meet_every_bound(self, kind):
        for seed in range(5):
            system, trace = sampled_trace(kind, 7, "dist-random:0.5", seed)
            report = check_bounds(trace, system)
            assert report.ok, report.violations
            assert report.metrics["first_clean"] is not None

    def test_rounds_to_clean_within_budget(self):
        for seed in range(10):
            system, trace = sampled_trace("ring", 6, "sync", seed)
            report = check_bounds(trace, system)
            assert report.metrics["rounds_to_clean"] <= 2 * report.metrics["D"] + 2

    def test_two_resets_on_one_node(self):
        system = UnisonSystem(PAIR, 4)
        trace = run_execution(system, (correct(0), correct(2)), parse_daemon("scripted:0"))
        assert trace.steps[0].fired == {0: RR}
        again = StepRecord(2, frozenset({0}), {0: RR}, trace.steps[0].post)
        forged = Trace(trace.header, trace.steps[:1] + [again], trace.termination)
        report = check_bounds(forged, system)
        assert "r-moves" in {v.check for v in report.violations}


def scripted_trace(topology, B, initial, steps):
    """A hand-written trace: ``steps`` is a list of ``(fired, post)`` pairs."""
    header = TraceHeader(topology, B, tuple(initial), "scripted", "greedy", 0)
    records = [
        StepRecord(i, frozenset(fired), dict(fired), tuple(post)) for i, (fired, post) in enumerate(steps, start=1)
    ]
    return Trace(header, records, Termination.STEP_LIMIT)


def failed_checks(report):
    return {v.check for v in report.violations}


@pytest.fixture
def fresh_caches():
    clear_caches()
    yield
    clear_caches()


class TestForgedTraces:
    """Each checker must flag a trace that breaks exactly what it guards."""

    def test_root_clears_before_reset(self):
        trace = scripted_trace(SINGLE, 4, (erroneous(-2),), [({0: RC}, (correct(-2),))])
        assert "root-rc" in failed_checks(check_invariants(trace))

    def test_clocks_cover_the_whole_cycle(self):
        cfg = (correct(0), correct(1), correct(2), correct(3))
        assert classify_configuration(cfg, SQUARE, 4) is ConfigClass.CLEAN
        trace = scripted_trace(SQUARE, 4, cfg, [])
        assert failed_checks(check_invariants(trace)) >= {"hole", "color-value"}

    def test_missing_lower_neighbor(self, monkeypatch, fresh_caches):
        def no_lower_neighbor(cfg, topology, B, p):
            raise InternalInvariantBroken(f"non-root erroneous node {p} has no lower neighbor")

        monkeypatch.setattr(verifier, "find_e_path", no_lower_neighbor)
        trace = scripted_trace(PAIR, 4, (erroneous(-4), correct(-3)), [])
        assert failed_checks(check_invariants(trace)) == {"e-path"}

    def test_e_path_stops_short_of_the_root(self, monkeypatch, fresh_caches):
        monkeypatch.setattr(verifier, "find_e_path", lambda cfg, topology, B, p: [p])
        trace = scripted_trace(PAIR, 4, (erroneous(-3), erroneous(-4)), [])
        assert failed_checks(check_invariants(trace)) == {"e-path"}

    def test_almost_clean_turns_dirty(self):
        trace = scripted_trace(
            PAIR, 4, (erroneous(-4), correct(-3)), [({1: RU}, (erroneous(-4), correct(-1)))]
        )
        failed = failed_checks(check_invariants(trace))
        assert "almost-clean-closure" in failed
        assert "root-monotonicity" not in failed

    def test_clean_turns_almost_clean(self):
        trace = scripted_trace(
            PAIR, 4, (correct(-3), correct(-3)), [({0: RR}, (erroneous(-4), correct(-3)))]
        )
        assert failed_checks(check_invariants(trace)) >= {"clean-closure", "root-monotonicity"}

    def test_too_many_propagations(self):
        cfg = (erroneous(-4), erroneous(-3))
        trace = scripted_trace(PAIR, 4, cfg, [({1: RP(-3)}, cfg)] * 9)
        assert "p-moves" in failed_checks(check_bounds(trace, UnisonSystem(PAIR, 4)))

    def test_too_many_clears(self):
        cfg = (erroneous(-4), correct(-3))
        trace = scripted_trace(PAIR, 4, cfg, [({0: RC}, cfg)] * 3)
        assert failed_checks(check_bounds(trace, UnisonSystem(PAIR, 4))) >= {"c-moves", "c-moves-per-node"}

    def test_clock_runs_ahead_of_a_stuck_root(self):
        steps = [({1: RU}, (erroneous(-8), correct(k))) for k in range(1, 5)]
        trace = scripted_trace(PAIR, 8, (erroneous(-8), correct(0)), steps)
        report = check_bounds(trace, UnisonSystem(PAIR, 8))
        assert failed_checks(report) >= {"u-moves-per-segment", "clock-growth", "round-bound"}
        assert report.metrics["first_clean"] is None
