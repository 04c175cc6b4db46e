"""Leafwise random walk: step bookkeeping, mode equivalence, truncation,
height law, occupancy comparisons."""

import math

import pytest

from hyptiling import (
    CapError,
    DiffusionConfig,
    DomainError,
    LeafState,
    SizeError,
    SubstitutionModel,
    ToeplitzModel,
    default_start,
    garnett_compare,
    height_law_test,
    log_height_samples,
    log_height_stats,
    run_paths,
    simulate_path,
    tile_containing_point,
)
from hyptiling.diffusion import expected_block_fractions

SUB = SubstitutionModel.standard()


class TestConfig:
    def test_step_counts(self):
        assert DiffusionConfig(SUB, dt=0.1, horizon=1.0).n_steps == 10
        assert DiffusionConfig(SUB, dt=1e-3, horizon=2000.0).n_steps == 2_000_000
        assert DiffusionConfig(SUB, dt=0.1, horizon=0.0).n_steps == 0

    def test_rounding_is_stable(self):
        # 0.3 / 0.1 is 2.9999... in floats; the count must still be 3
        assert DiffusionConfig(SUB, dt=0.1, horizon=0.3).n_steps == 3

    def test_validation(self):
        with pytest.raises(DomainError):
            DiffusionConfig(SUB, dt=0.0)
        with pytest.raises(DomainError):
            DiffusionConfig(SUB, horizon=-1.0)
        with pytest.raises(DomainError):
            DiffusionConfig(SUB, paths=0)
        with pytest.raises(SizeError):
            DiffusionConfig(SUB, dt=1e-9, horizon=1000.0)

    def test_model_coercion(self):
        cfg = DiffusionConfig(ToeplitzModel.of_rank(2).spec)
        assert cfg.model.name == "toeplitz"


class TestLeafState:
    def test_default_start(self):
        s = default_start()
        assert (s.row, s.col, s.x_frac) == (0, 0, 0.5)
        assert s.u == math.log(1.5)

    def test_from_point_roundtrip(self):
        s = LeafState.from_point(3.2, 5.0)
        assert (s.row, s.col) == (2, 0)
        x, y = s.point()
        assert x == pytest.approx(3.2) and y == pytest.approx(5.0)

    def test_row_consistency_enforced(self):
        with pytest.raises(DomainError):
            LeafState(u=0.0, row=1, col=0, x_frac=0.0)
        with pytest.raises(DomainError):
            LeafState(u=0.5, row=0, col=0, x_frac=1.5)


class TestReproducibility:
    def test_same_seed_same_path(self):
        cfg = DiffusionConfig(SUB, dt=1e-2, horizon=1.0, seed=42)
        a = simulate_path(cfg, path_index=0)
        b = simulate_path(cfg, path_index=0)
        assert a.u_final == b.u_final
        assert a.row_steps == b.row_steps

    def test_paths_diverge_by_index(self):
        cfg = DiffusionConfig(SUB, dt=1e-2, horizon=1.0, seed=42)
        a = simulate_path(cfg, path_index=0)
        b = simulate_path(cfg, path_index=1)
        assert a.u_final != b.u_final

    def test_seed_changes_noise(self):
        u0 = simulate_path(DiffusionConfig(SUB, dt=1e-2, horizon=1.0, seed=1)).u_final
        u1 = simulate_path(DiffusionConfig(SUB, dt=1e-2, horizon=1.0, seed=2)).u_final
        assert u0 != u1


class TestModeEquivalence:
    @pytest.mark.parametrize("seed", [0, 7, 19])
    def test_fast_and_full_agree_bitwise(self, seed):
        cfg = DiffusionConfig(SUB, dt=1e-3, horizon=2.0, seed=seed,
                              trace_stride=500)
        fast = simulate_path(cfg, mode="fast")
        full = simulate_path(cfg, mode="full")
        assert fast.u_final == full.u_final  # no tolerance: same arithmetic
        assert fast.steps_used == full.steps_used
        assert fast.partial == full.partial
        assert fast.row_steps == full.row_steps
        assert (fast.min_row, fast.max_row) == (full.min_row, full.max_row)
        assert fast.row_crossings == full.row_crossings
        assert fast.trace == full.trace

    def test_modes_agree_on_truncated_paths(self):
        shallow = ToeplitzModel.of_rank(2, max_depth=1)
        cfg = DiffusionConfig(shallow, dt=1e-2, horizon=5.0, seed=3)
        fast = simulate_path(cfg, mode="fast")
        full = simulate_path(cfg, mode="full")
        assert fast.partial and full.partial
        assert fast.steps_used == full.steps_used
        assert fast.stop_row == full.stop_row
        assert fast.u_final == full.u_final

    def test_unknown_mode_rejected(self):
        cfg = DiffusionConfig(SUB, dt=0.1, horizon=0.5)
        with pytest.raises(DomainError):
            simulate_path(cfg, mode="banana")

    def test_full_mode_tracks_position(self):
        cfg = DiffusionConfig(SUB, dt=1e-3, horizon=2.0, seed=5,
                              track_position=True)
        res = simulate_path(cfg)
        assert res.mode == "full"
        assert res.col_final is not None
        final = LeafState(u=res.u_final, row=res.row_final,
                          col=res.col_final, x_frac=res.x_frac_final)
        x, y = final.point()
        tile = tile_containing_point(x, y)
        assert (tile.row, tile.col) == (res.row_final, res.col_final)


class TestOccupancy:
    def test_row_steps_sum_to_steps_used(self):
        cfg = DiffusionConfig(SUB, dt=1e-3, horizon=3.0, seed=9)
        res = simulate_path(cfg)
        assert sum(res.row_steps.values()) == res.steps_used == cfg.n_steps
        assert res.time_elapsed == pytest.approx(3.0)

    def test_letter_steps_regroup_rows(self):
        cfg = DiffusionConfig(SUB, dt=1e-3, horizon=3.0, seed=9)
        res = simulate_path(cfg)
        by_letter = res.letter_steps(SUB)
        assert sum(by_letter.values()) == res.steps_used
        manual = {}
        for row, steps in res.row_steps.items():
            manual[SUB.letter(row)] = manual.get(SUB.letter(row), 0) + steps
        assert by_letter == manual

    def test_level_zero_blocks_are_letters(self):
        cfg = DiffusionConfig(SUB, dt=1e-3, horizon=2.0, seed=4)
        res = simulate_path(cfg)
        assert res.block_steps(SUB, 0) == res.letter_steps(SUB)

    def test_rank_one_spends_everything_on_one_color(self):
        cfg = DiffusionConfig(ToeplitzModel.of_rank(1), dt=1e-2, horizon=3.0,
                              seed=1)
        res = simulate_path(cfg)
        assert res.letter_steps(cfg.model) == {1: res.steps_used}

    def test_zero_horizon_path(self):
        cfg = DiffusionConfig(SUB, dt=0.1, horizon=0.0, paths=30)
        res = run_paths(cfg)
        assert all(r.steps_used == 0 and not r.partial for r in res)
        stats = log_height_stats(res)
        assert stats["mean"] == 0.0 and stats["variance"] == 0.0


class TestTruncation:
    def test_partial_flag_and_stop_row(self):
        shallow = ToeplitzModel.of_rank(2, max_depth=1)
        cfg = DiffusionConfig(shallow, dt=1e-2, horizon=5.0, paths=5, seed=0)
        results = run_paths(cfg)
        assert all(r.partial for r in results)
        for r in results:
            # depth-1 filling leaves exactly the rows = 1 mod 3 uncolored
            assert r.stop_row % 3 == 1
            assert r.steps_used < cfg.n_steps
            # every *visited* row was colorable
            assert all(row % 3 != 1 for row in r.row_steps)

    def test_deep_cap_never_triggers_here(self):
        cfg = DiffusionConfig(ToeplitzModel.of_rank(2), dt=1e-2, horizon=5.0,
                              paths=5, seed=0)
        assert not any(r.partial for r in run_paths(cfg))


class TestHeightLaw:
    def test_drift_compensation_centers_samples(self):
        cfg = DiffusionConfig(SUB, dt=1e-2, horizon=4.0, paths=200, seed=3)
        res = run_paths(cfg)
        stats = log_height_stats(res)
        # N(0, 4) with 200 paths: the seed-3 draw sits well inside 4 sigma
        assert abs(stats["mean"]) < 0.57
        assert 2.5 < stats["variance"] < 5.7
        assert stats["expected_mean"] == 0.0
        assert stats["expected_variance"] == pytest.approx(4.0)

    def test_raw_displacement_shows_the_drift(self):
        cfg = DiffusionConfig(SUB, dt=1e-2, horizon=4.0, paths=200, seed=3)
        res = run_paths(cfg)
        mean_disp = sum(r.displacement for r in res) / len(res)
        assert mean_disp == pytest.approx(-2.0, abs=0.6)  # -T/2

    def test_distribution_passes_ks(self):
        cfg = DiffusionConfig(SUB, dt=1e-2, horizon=5.0, paths=60, seed=11)
        res = run_paths(cfg)
        stat, pvalue = height_law_test(res)
        assert 0.0 < stat < 1.0
        assert pvalue > 0.05

    def test_small_samples_rejected(self):
        cfg = DiffusionConfig(SUB, dt=0.1, horizon=0.5, paths=5)
        res = run_paths(cfg)
        with pytest.raises(DomainError):
            log_height_stats(res)
        with pytest.raises(DomainError):
            height_law_test(res)

    def test_partial_paths_are_excluded(self):
        shallow = ToeplitzModel.of_rank(2, max_depth=1)
        cfg = DiffusionConfig(shallow, dt=1e-2, horizon=5.0, paths=4, seed=0)
        assert len(log_height_samples(run_paths(cfg))) == 0

    def test_zero_horizon_has_no_law(self):
        cfg = DiffusionConfig(SUB, dt=0.1, horizon=0.0, paths=30)
        with pytest.raises(DomainError):
            height_law_test(run_paths(cfg))


class TestExpectedFractions:
    def test_substitution_letters_split_evenly(self):
        for q in (0, 1):
            fracs = expected_block_fractions(SUB, q)
            assert fracs[0] == pytest.approx(0.5, abs=1e-6)
            assert fracs[1] == pytest.approx(0.5, abs=1e-6)
            assert sum(fracs) == pytest.approx(1.0, abs=1e-12)


class TestGarnettCompare:
    def test_unique_measure_comparison(self):
        cfg = DiffusionConfig(SUB, dt=1e-2, horizon=50.0, paths=10, seed=1)
        table = garnett_compare(cfg, q=0)
        assert table["unique_measure"] is True
        assert table["complete_paths"] == 10
        assert table["note"] == ""
        for row in table["labels"]:
            assert row["expected"] == pytest.approx(0.5, abs=1e-6)
            assert 0.0 <= row["empirical"] <= 1.0
            assert row["band"] > 0.0
        total = sum(row["empirical"] for row in table["labels"])
        assert total == pytest.approx(1.0, abs=1e-12)

    def test_level_one_blocks(self):
        cfg = DiffusionConfig(SUB, dt=1e-2, horizon=50.0, paths=10, seed=1)
        table = garnett_compare(cfg, q=1)
        assert table["level"] == 1
        assert len(table["labels"]) == 2

    def test_non_unique_measures_get_no_expectation(self):
        cfg = DiffusionConfig(ToeplitzModel.of_rank(2), dt=1e-2, horizon=5.0,
                              paths=5, seed=2)
        table = garnett_compare(cfg, q=0)
        assert table["unique_measure"] is False
        assert "non-uniquely-ergodic" in table["note"]
        assert all(row["expected"] is None for row in table["labels"])

    def test_all_partial_paths_is_a_cap(self):
        shallow = ToeplitzModel.of_rank(2, max_depth=1)
        cfg = DiffusionConfig(shallow, dt=1e-2, horizon=5.0, paths=5, seed=0)
        with pytest.raises(CapError):
            garnett_compare(cfg, q=0)

    def test_precomputed_results_accepted(self):
        cfg = DiffusionConfig(SUB, dt=1e-2, horizon=20.0, paths=8, seed=6)
        res = run_paths(cfg)
        table = garnett_compare(cfg, q=0, results=res)
        assert table["paths"] == 8
        assert table["total_steps"] == sum(r.steps_used for r in res)
