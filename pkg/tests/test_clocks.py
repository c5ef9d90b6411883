import pytest
from hypothesis import given, strategies as st

from unison_sim.core.clocks import (
    NodeState,
    Status,
    add_mod,
    all_domain_states,
    clock_dist,
    clock_step,
    correct,
    erroneous,
    increment_mod,
    make_state,
    state_violation,
)
from unison_sim.core.errors import DomainViolation


@st.composite
def period_and_clock(draw):
    B = draw(st.integers(min_value=4, max_value=24))
    return B, draw(st.integers(min_value=-B, max_value=B - 1))


class TestIncrement:
    def test_wraps_at_top(self):
        assert increment_mod(7, 8) == 0

    def test_plain_increment(self):
        assert increment_mod(3, 8) == 4

    def test_negative_values_never_wrap(self):
        assert increment_mod(-8, 8) == -7
        assert increment_mod(-1, 8) == 0

    def test_out_of_domain_is_rejected(self):
        with pytest.raises(DomainViolation):
            increment_mod(8, 8)
        with pytest.raises(DomainViolation):
            increment_mod(-9, 8)

    def test_add_mod_walks_through_zero_and_wraps(self):
        assert add_mod(-2, 3, 4) == 1
        assert add_mod(2, 3, 4) == 1
        assert add_mod(5, 0, 8) == 5

    @given(period_and_clock())
    def test_increment_stays_in_domain(self, pair):
        B, c = pair
        assert -B <= increment_mod(c, B) <= B - 1

    @given(period_and_clock())
    def test_cycle_has_length_b(self, pair):
        B, c = pair
        start = add_mod(c, B, B)  # any value lands on the cycle after at most B steps
        assert 0 <= start < B
        assert add_mod(start, B, B) == start


class TestDistance:
    def test_equal(self):
        assert clock_dist(5, 5, 8) == 0

    def test_wrap_adjacent(self):
        assert clock_dist(7, 0, 8) == 1
        assert clock_dist(0, 7, 8) == 1

    def test_far(self):
        assert clock_dist(2, 5, 8) == 2

    def test_zero_has_two_predecessors(self):
        assert clock_dist(-1, 0, 8) == 1
        assert clock_dist(-1, 7, 8) == 2

    @given(period_and_clock(), st.integers(min_value=-24, max_value=23))
    def test_symmetric(self, pair, other):
        B, c = pair
        other = max(-B, min(B - 1, other))
        assert clock_dist(c, other, B) == clock_dist(other, c, B)


class TestDomain:
    def test_domain_has_3b_states(self):
        states = all_domain_states(6)
        assert len(states) == 18
        assert len(set(states)) == 18

    def test_erroneous_clock_must_be_negative(self):
        assert state_violation(erroneous(0), 8) is not None
        assert state_violation(erroneous(-1), 8) is None

    def test_correct_clock_upper_bound(self):
        assert state_violation(correct(8), 8) is not None
        assert state_violation(correct(7), 8) is None

    def test_make_state_rejects_unknown_status(self):
        with pytest.raises(DomainViolation):
            make_state("X", 0, 8)

    def test_status_compares_with_text(self):
        assert make_state("E", -3, 8) == NodeState(Status.E, -3)
        assert str(make_state("C", 2, 8)) == "(C,2)"


class TestClockStep:
    def test_same_clock(self):
        assert clock_step(3, 3, 8) == 0

    def test_successor_through_the_wrap(self):
        assert clock_step(7, 0, 8) == 1
        assert clock_step(0, 7, 8) == -1

    def test_tail_joins_the_cycle_at_zero(self):
        assert clock_step(-1, 0, 8) == 1
        assert clock_step(7, 0, 8) == 1
        assert clock_step(-1, 7, 8) is None

    def test_two_increments_apart(self):
        assert clock_step(1, 3, 8) is None
        assert clock_step(-8, -6, 8) is None

    @given(st.integers(-8, 7), st.integers(-8, 7))
    def test_antisymmetric(self, a, b):
        forward = clock_step(a, b, 8)
        backward = clock_step(b, a, 8)
        assert (forward is None) == (backward is None)
        if forward is not None:
            assert backward == -forward
            assert clock_dist(a, b, 8) == abs(forward)
