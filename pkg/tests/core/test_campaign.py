import csv

from unison_sim.core.campaign import (
    Campaign,
    ExhaustiveCell,
    SampledCell,
    run_campaign,
    run_cell,
    write_observations,
)


def small_campaign(**overrides):
    settings = dict(kinds=("path", "ring"), n_min=3, n_max=4, daemons=("sync", "central-random"), seeds=2)
    settings.update(overrides)
    return Campaign(**settings)


def test_cells_cover_the_grid():
    cells = small_campaign().cells()
    # ring needs three nodes, so both kinds contribute n=3 and n=4
    assert len(cells) == 2 * 2 * 2 * 2
    assert all(isinstance(c, SampledCell) for c in cells)


def test_exhaustive_cells_come_first():
    cells = small_campaign(exhaustive_max_n=2).cells()
    exhaustive = [c for c in cells if isinstance(c, ExhaustiveCell)]
    assert [(c.n, c.edges) for c in exhaustive] == [(1, ()), (2, ((0, 1),))]
    assert cells[:2] == exhaustive


def test_sampled_campaign_passes():
    result = run_campaign(small_campaign())
    assert result.exit_code == 0
    assert all(r.status == "pass" for r in result.results)
    assert all(r.rounds_to_clean is not None and r.rounds_to_clean <= 2 * r.D + 2 for r in result.results)


def test_sampled_rings():
    result = run_campaign(Campaign(kinds=("ring",), n_min=6, n_max=6, daemons=("dist-random:0.5",), seeds=20))
    assert result.exit_code == 0
    assert len(result.results) == 20


def test_exhaustive_small_graphs_pass():
    result = run_campaign(Campaign(kinds=(), exhaustive_max_n=2, B=4, exhaustive_depth=20))
    assert result.exit_code == 0
    assert [r.kind for r in result.results] == ["exhaustive", "exhaustive"]
    assert all(r.traces > 0 for r in result.results)
    assert not any(r.bounds_exceeded for r in result.results)


def test_exhaustive_path_of_three():
    result = run_cell(ExhaustiveCell(3, ((0, 1), (1, 2))))
    assert result.status == "pass", result.first_violation
    assert result.B == 6
    assert result.traces > 0


def test_injected_fault_is_reported():
    result = run_campaign(small_campaign(inject_fault=True))
    assert result.exit_code == 1
    assert result.invariant_failures == len(result.results)
    assert all(r.first_violation for r in result.results)


def test_injected_fault_in_exhaustive_cells():
    cell = ExhaustiveCell(1, (), B=4, inject_fault=True)
    assert run_cell(cell).status == "invariant-violation"


def test_worker_pool_keeps_cell_order():
    campaign = small_campaign()
    serial = run_campaign(campaign)
    parallel = run_campaign(campaign, threads=2)
    assert [r.label for r in parallel.results] == [r.label for r in serial.results]
    assert [r.total_moves for r in parallel.results] == [r.total_moves for r in serial.results]


def test_observations_csv(tmp_path):
    result = run_campaign(small_campaign(seeds=1))
    path = write_observations(result.results, tmp_path / "obs.csv")
    with path.open() as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == len(result.results)
    assert set(rows[0]) == {"kind", "daemon", "seed", "n", "B", "D", "total_moves", "rounds_to_clean"}
    assert rows[0]["kind"] == "path"
