import pytest
from hypothesis import given, settings, strategies as st

from unison_sim.core.clocks import all_domain_states, correct, erroneous, state_violation
from unison_sim.core.errors import DomainViolation
from unison_sim.core.rules import (
    RC,
    RP,
    RR,
    RU,
    apply_rule,
    can_clear_error,
    enabled_rule,
    error_propagation_target,
    is_active_root,
    is_root,
)


class TestEnabledRule:
    def test_legitimate_floor_configuration_moves(self):
        assert enabled_rule(correct(-8), [correct(-8), correct(-8)], 8, True) == RU

    def test_isolated_reset_node_clears(self):
        assert enabled_rule(erroneous(-6), [], 6, True) == RC

    def test_error_propagates_to_smallest_target(self):
        assert enabled_rule(correct(3), [erroneous(-6)], 6, True) == RP(-5)

    def test_correct_root_resets(self):
        assert enabled_rule(correct(0), [correct(2)], 8, True) == RR

    def test_without_paux_a_successor_neighbor_is_needed(self):
        assert enabled_rule(correct(5), [correct(5)], 8, False) is None
        assert enabled_rule(correct(5), [correct(6)], 8, False) == RU

    def test_neighbor_behind_blocks_unison_move(self):
        assert enabled_rule(correct(5), [correct(4)], 8, True) is None

    def test_reset_has_priority_over_propagation(self):
        # (E,-3) with no smaller erroneous neighbor is an active root.
        assert enabled_rule(erroneous(-3), [correct(5)], 8, True) == RR

    def test_out_of_domain_neighbor_is_rejected(self):
        with pytest.raises(DomainViolation):
            enabled_rule(correct(0), [erroneous(0)], 8, True)

    def test_propagation_never_targets_a_non_negative_clock(self):
        # The only erroneous neighbor is at -1, so there is no erroneous value to copy.
        assert error_propagation_target(correct(3), [erroneous(-1)]) is None


class TestPredicates:
    def test_reset_root_is_not_active(self):
        assert is_root(erroneous(-8), [correct(-7)], 8)
        assert not is_active_root(erroneous(-8), [correct(-7)], 8)

    def test_correct_root_with_floor_clock_is_active(self):
        assert is_active_root(correct(-8), [correct(0)], 8)

    def test_clear_needs_correct_successors(self):
        assert can_clear_error(erroneous(-5), [correct(-4), erroneous(-6)])
        assert not can_clear_error(erroneous(-5), [erroneous(-4)])
        assert not can_clear_error(erroneous(-5), [correct(-3)])


class TestApplyRule:
    def test_reset(self):
        assert apply_rule(correct(0), RR, 8) == erroneous(-8)

    def test_clear(self):
        assert apply_rule(erroneous(-6), RC, 6) == correct(-6)

    def test_unison_wraps(self):
        assert apply_rule(correct(7), RU, 8) == correct(0)

    def test_propagate(self):
        assert apply_rule(correct(3), RP(-5), 6) == erroneous(-5)


B = 5
DOMAIN = all_domain_states(B)


@settings(max_examples=300)
@given(st.sampled_from(DOMAIN), st.lists(st.sampled_from(DOMAIN), max_size=4), st.booleans())
def test_rule_actions_preserve_the_domain(own, nbrs, paux):
    rule = enabled_rule(own, nbrs, B, paux)
    if rule is not None:
        assert state_violation(apply_rule(own, rule, B), B) is None


@settings(max_examples=300)
@given(st.sampled_from(DOMAIN), st.lists(st.sampled_from(DOMAIN), min_size=1, max_size=4))
def test_propagation_target_is_erroneous_and_below_own_clock(own, nbrs):
    rule = enabled_rule(own, nbrs, B, True)
    if rule is not None and rule.kind == "RP":
        assert -B + 1 <= rule.target <= -1
        assert rule.target < own.clock
