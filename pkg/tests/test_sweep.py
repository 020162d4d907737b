"""Sweep orchestration: record counts, determinism, failure isolation."""

import numpy as np
import pytest

from qsfolio.backtest import BacktestConfig
from qsfolio.data import compute_returns
from qsfolio.errors import DataError
from qsfolio.graph import QswParams
from qsfolio.metrics import summarize
from qsfolio.sweep import (SCENARIO_PRESETS, GridSpec, RobustnessSpec,
                           run_grid, run_robustness, run_scenarios,
                           summarize_robustness)
from qsfolio.synth import SynthSpec, synthesize_universe

FAST = QswParams(alpha=1, beta=1, lambda_hold=1, omega=0.2,
                 tol=1e-6, max_iters=400)


@pytest.fixture(scope="module")
def panel():
    prices = synthesize_universe(
        SynthSpec(n_assets=8, n_sectors=2, days=600, seed=23))
    return compute_returns(prices)


@pytest.fixture(scope="module")
def config():
    return BacktestConfig(train_days=120)


def test_preset_table_is_exact():
    table = [(p.name, p.alpha, p.beta, p.lambda_hold)
             for p in SCENARIO_PRESETS]
    assert table == [
        ("Ultra-Diversified", 1.0, 100.0, 10.0),
        ("Moderate-Balanced", 10.0, 10.0, 10.0),
        ("Stability-Focused", 1.0, 10.0, 100.0),
        ("Balanced-Active", 10.0, 1.0, 100.0),
        ("Sharpe-Maximizer", 100.0, 1.0, 10.0),
        ("High-Activity", 100.0, 10.0, 1.0),
    ]


def test_default_grid_is_625():
    assert len(GridSpec()) == 625


class TestScenarioCounts:
    def test_default_produces_thirty_qsw_plus_benchmarks(self, panel,
                                                         config):
        records = run_scenarios(panel, config, base_params=FAST)
        qsw = [r for r in records if r.strategy == "qsw"]
        assert len(qsw) == 30
        assert len(records) == 32
        assert [r.strategy for r in records[-2:]] == ["mpt_max_sharpe",
                                                      "index_proxy"]
        assert [r.run_id for r in records] == list(range(32))

    def test_single_omega(self, panel, config):
        records = run_scenarios(panel, config, omega_values=(0.4,),
                                base_params=FAST)
        assert sum(r.strategy == "qsw" for r in records) == 6

    def test_weights_pass_invariants(self, panel, config):
        records = run_scenarios(panel, config, omega_values=(0.4,),
                                base_params=FAST)
        for r in records:
            assert r.error is None
            assert r.hhi >= 1.0 / panel.n_assets - 1e-12
            assert r.c5 <= 1.0 + 1e-12
            assert r.n_eff * r.hhi == pytest.approx(1.0, abs=1e-9)


class TestGrid:
    def test_point_grid_matches_direct_call(self, panel, config):
        from qsfolio.backtest import QswStrategy, run_backtest

        grid = GridSpec(alpha_values=(5.0,), beta_values=(10.0,),
                        lambda_values=(2.0,), omega_values=(0.6,))
        [record] = run_grid(panel, config, grid, base_params=FAST)
        params = QswParams(alpha=5.0, beta=10.0, lambda_hold=2.0, omega=0.6,
                           tol=FAST.tol, max_iters=FAST.max_iters)
        direct = summarize(run_backtest(panel, QswStrategy(params), config))
        assert record.sharpe == pytest.approx(direct.sharpe_ann, abs=1e-12)
        assert record.turnover_ann == pytest.approx(direct.turnover_ann,
                                                    abs=1e-12)

    def test_count_law(self, panel, config):
        grid = GridSpec(alpha_values=(0.1, 5.0), beta_values=(1.0,),
                        lambda_values=(1.0, 10.0), omega_values=(0.4, 1.0))
        records = run_grid(panel, config, grid, base_params=FAST)
        assert len(records) == 8
        combos = [(r.alpha, r.beta, r.lambda_hold, r.omega) for r in records]
        assert combos == list(grid.combos())

    def test_worker_counts_agree(self, panel, config):
        grid = GridSpec(alpha_values=(0.1, 5.0), beta_values=(1.0,),
                        lambda_values=(1.0,), omega_values=(0.4, 1.0))
        serial = run_grid(panel, config, grid, base_params=FAST, workers=1)
        parallel = run_grid(panel, config, grid, base_params=FAST, workers=2)
        assert [(r.run_id, r.sharpe, r.turnover_ann, r.iterations)
                for r in serial] == \
            [(r.run_id, r.sharpe, r.turnover_ann, r.iterations)
             for r in parallel]

    def test_poisoned_config_isolated(self, panel, config):
        grid = GridSpec(alpha_values=(1.0, 1e9), beta_values=(1.0,),
                        lambda_values=(1.0,), omega_values=(0.4,))
        records = run_grid(panel, config, grid, base_params=FAST)
        assert len(records) == 2
        errors = [r for r in records if r.error]
        assert len(errors) == 1
        assert errors[0].alpha == 1e9
        assert "rescale parameters" in errors[0].error
        assert errors[0].sharpe is None
        ok = [r for r in records if not r.error][0]
        assert ok.sharpe is not None


class TestRobustness:
    def test_minimal_counts(self, panel, config):
        grid = GridSpec(alpha_values=(1.0,), beta_values=(1.0,),
                        lambda_values=(1.0,), omega_values=(0.4,))
        records, summary = run_robustness(
            panel, config, grid, RobustnessSpec(n_draws=1, subset_size=4,
                                                seed=3),
            base_params=FAST)
        assert len(records) == 3
        assert {r.strategy for r in records} == {"qsw", "mpt_max_sharpe",
                                                 "index_proxy"}
        assert all(r.draw_id == 0 for r in records)
        assert len(summary.per_draw) == 1

    def test_count_law_and_reproducibility(self, panel, config):
        grid = GridSpec(alpha_values=(1.0, 5.0), beta_values=(1.0,),
                        lambda_values=(1.0,), omega_values=(0.4,))
        spec = RobustnessSpec(n_draws=3, subset_size=5, seed=9)
        a, _ = run_robustness(panel, config, grid, spec, base_params=FAST)
        b, _ = run_robustness(panel, config, grid, spec, base_params=FAST)
        assert len(a) == 3 * (len(grid) + 2)
        assert [(r.run_id, r.draw_id, r.strategy, r.sharpe) for r in a] == \
            [(r.run_id, r.draw_id, r.strategy, r.sharpe) for r in b]

    def test_subset_too_large(self, panel, config):
        with pytest.raises(DataError):
            run_robustness(panel, config, GridSpec(),
                           RobustnessSpec(n_draws=1, subset_size=999),
                           base_params=FAST)

    def test_summary_win_rates(self):
        from qsfolio.sweep import SweepRecord

        def rec(run_id, draw, strat, sharpe, eff, error=None):
            r = SweepRecord(run_id, draw, strat, None, None, None, None)
            r.sharpe, r.efficiency, r.error = sharpe, eff, error
            return r

        records = [
            rec(0, 0, "qsw", 0.5, 10.0), rec(1, 0, "qsw", 0.9, 5.0),
            rec(2, 0, "mpt_max_sharpe", 0.7, 0.2),
            rec(3, 1, "qsw", 0.4, 8.0),
            rec(4, 1, "mpt_max_sharpe", 0.6, 0.3),
        ]
        summary = summarize_robustness(records)
        assert summary.win_rate_sharpe == 0.5   # draw 0 wins, draw 1 loses
        assert summary.win_rate_efficiency == 1.0
        assert summary.per_draw[0]["best_run_id"] == 1
