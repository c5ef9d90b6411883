from collections import Counter

import pytest

from unison_sim.core.clocks import correct, erroneous
from unison_sim.core.errors import EmptySelection, InvalidPeriod, NodeNotEnabled, UnisonError
from unison_sim.core.rules import RU
from unison_sim.core.topology import build_topology
from unison_sim.core.unison import (
    GREEDY,
    NEVER,
    UnisonSystem,
    apply_step,
    auto_period,
    check_period,
    enabled_set,
    neighbor_view,
    paux_from_name,
    validate_configuration,
)


@pytest.fixture
def path3():
    return build_topology(3, [(0, 1), (1, 2)])


class TestPeriod:
    def test_auto_period_follows_the_diameter(self, path3):
        assert auto_period(path3) == 6

    def test_auto_period_floor_is_four(self):
        assert auto_period(build_topology(1, [])) == 4

    def test_small_period_rejected(self, path3):
        with pytest.raises(InvalidPeriod):
            check_period(5, path3)
        check_period(6, path3)


class TestEnabledSet:
    def test_uniform_clocks_all_enabled_when_greedy(self, path3):
        cfg = (correct(0), correct(0), correct(0))
        assert enabled_set(cfg, path3, 6) == frozenset({0, 1, 2})

    def test_uniform_clocks_none_enabled_without_paux(self, path3):
        cfg = (correct(0), correct(0), correct(0))
        assert enabled_set(cfg, path3, 6, NEVER) == frozenset()

    def test_node_ahead_waits(self, path3):
        cfg = (correct(0), correct(1), correct(0))
        assert enabled_set(cfg, path3, 6) == frozenset({0, 2})


class TestApplyStep:
    def test_single_move(self, path3):
        post, fired = apply_step((correct(0), correct(0), correct(0)), path3, 6, {1})
        assert post == (correct(0), correct(1), correct(0))
        assert fired == {1: RU}

    def test_selected_nodes_read_the_pre_step_configuration(self, path3):
        post, fired = apply_step((correct(0), correct(0), correct(0)), path3, 6, [0, 1, 2])
        assert post == (correct(1), correct(1), correct(1))
        assert set(fired) == {0, 1, 2}

    def test_empty_selection_rejected(self, path3):
        with pytest.raises(EmptySelection):
            apply_step((correct(0), correct(0), correct(0)), path3, 6, [])

    def test_disabled_node_rejected(self, path3):
        with pytest.raises(NodeNotEnabled):
            apply_step((correct(0), correct(1), correct(0)), path3, 6, [1])

    def test_unknown_node_rejected(self, path3):
        with pytest.raises(NodeNotEnabled):
            apply_step((correct(0), correct(0), correct(0)), path3, 6, [3])


class TestConfigurationHelpers:
    def test_neighbor_view_is_a_multiset(self, path3):
        cfg = (correct(0), correct(1), correct(0))
        assert neighbor_view(cfg, path3, 1) == Counter({correct(0): 2})
        assert neighbor_view(cfg, path3, 0) == Counter({correct(1): 1})

    def test_valid_configuration_has_no_problems(self):
        assert validate_configuration([correct(-6), erroneous(-1), correct(5)], 6) == []

    def test_each_bad_node_is_reported(self):
        problems = validate_configuration([correct(0), erroneous(0), correct(6)], 6)
        assert problems == [
            "node 1: erroneous clock 0 not in [-6, -1]",
            "node 2: correct clock 6 not in [-6, 5]",
        ]


class TestUnisonSystem:
    def test_clean_configuration_has_no_roots(self, path3):
        system = UnisonSystem(path3, 6)
        assert system.is_clean((correct(0), correct(1), correct(2)))

    def test_paux_names(self, path3):
        assert UnisonSystem(path3, 6).paux_name == "greedy"
        assert UnisonSystem(path3, 6, NEVER).is_greedy is False
        assert paux_from_name("greedy") is GREEDY

    def test_unknown_paux_rejected(self):
        with pytest.raises(UnisonError):
            paux_from_name("sometimes")

    def test_repeated_step_gives_a_fresh_rule_map(self, path3):
        system = UnisonSystem(path3, 6)
        cfg = (correct(0),) * 3
        post, fired = system.apply_step(cfg, [0, 1, 2])
        fired.clear()
        again, fired_again = system.apply_step(cfg, {2, 1, 0})
        assert again == post
        assert fired_again == {0: RU, 1: RU, 2: RU}

    def test_list_configuration(self, path3):
        system = UnisonSystem(path3, 6)
        cfg = [correct(0), correct(0), correct(0)]
        assert system.enabled_set(cfg) == {0, 1, 2}
        post, _ = system.apply_step(cfg, [1])
        assert post == (correct(0), correct(1), correct(0))
        assert system.is_clean(cfg)
