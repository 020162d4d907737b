"""Experiment orchestration: scenario presets, the hyper-parameter grid,
and the random-subset robustness study.

Every (configuration, draw) pair becomes exactly one record. Work is
distributed over processes with no shared mutable state and records are
sorted by run id before use, so output is identical for any worker count.
A failing configuration produces one error-tagged record and never aborts
the sweep.
"""

from __future__ import annotations

import itertools
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from concurrent.futures.process import BrokenProcessPool
from dataclasses import dataclass, field, replace
from multiprocessing import get_context

import numpy as np

from .backtest import (BacktestConfig, MptStrategy, QswStrategy,
                       rebalance_indices, run_backtest)
from .classical import INDEX_TURNOVER, index_proxy
from .data import ReturnsPanel
from .errors import DataError
from .graph import QswParams
from .metrics import (MetricsReport, annualized_sharpe, annualized_vol,
                      concentration, cost_drag, efficiency, max_drawdown,
                      summarize)

__all__ = [
    "ScenarioPreset",
    "SCENARIO_PRESETS",
    "GridSpec",
    "RobustnessSpec",
    "SweepRecord",
    "RobustnessSummary",
    "run_scenarios",
    "run_grid",
    "run_robustness",
]

logger = logging.getLogger(__name__)

DEFAULT_OMEGAS = (0.2, 0.4, 0.6, 0.8, 1.0)


@dataclass(frozen=True)
class ScenarioPreset:
    """Named (alpha, beta, lambda) triple."""

    name: str
    alpha: float
    beta: float
    lambda_hold: float


SCENARIO_PRESETS: tuple[ScenarioPreset, ...] = (
    ScenarioPreset("Ultra-Diversified", 1.0, 100.0, 10.0),
    ScenarioPreset("Moderate-Balanced", 10.0, 10.0, 10.0),
    ScenarioPreset("Stability-Focused", 1.0, 10.0, 100.0),
    ScenarioPreset("Balanced-Active", 10.0, 1.0, 100.0),
    ScenarioPreset("Sharpe-Maximizer", 100.0, 1.0, 10.0),
    ScenarioPreset("High-Activity", 100.0, 10.0, 1.0),
)


@dataclass(frozen=True)
class GridSpec:
    """Cartesian hyper-parameter grid (defaults give 5^4 = 625 points)."""

    alpha_values: tuple = (0.1, 5.0, 50.0, 100.0, 500.0)
    beta_values: tuple = (0.1, 5.0, 50.0, 100.0, 500.0)
    lambda_values: tuple = (0.1, 5.0, 50.0, 100.0, 500.0)
    omega_values: tuple = DEFAULT_OMEGAS

    def __len__(self) -> int:
        return (len(self.alpha_values) * len(self.beta_values)
                * len(self.lambda_values) * len(self.omega_values))

    def combos(self):
        return itertools.product(self.alpha_values, self.beta_values,
                                 self.lambda_values, self.omega_values)


@dataclass(frozen=True)
class RobustnessSpec:
    """Repeated random sub-universe draws (without replacement per draw)."""

    n_draws: int = 50
    subset_size: int = 100
    seed: int = 0

    def __post_init__(self):
        if self.n_draws < 1 or self.subset_size < 1:
            raise DataError("n_draws and subset_size must be >= 1")


@dataclass
class SweepRecord:
    """One row of the sweep output (field order == CSV schema)."""

    run_id: int
    draw_id: int | None
    strategy: str
    alpha: float | None
    beta: float | None
    lambda_hold: float | None
    omega: float | None
    sharpe: float | None = None
    cagr: float | None = None
    vol: float | None = None
    mdd: float | None = None
    turnover_ann: float | None = None
    efficiency: float | None = None
    hhi: float | None = None
    n_eff: float | None = None
    c5: float | None = None
    cost_drag_bp: float | None = None
    final_value: float | None = None
    converged: bool | None = None
    iterations: int | None = None
    # fixed at 0 so sweep outputs stay a pure function of inputs and seed
    wall_ms: float = 0.0
    error: str | None = None


@dataclass(frozen=True)
class RobustnessSummary:
    """Best QSW configuration per draw and win rates against the
    re-optimized mean-variance benchmark."""

    per_draw: list
    win_rate_sharpe: float
    win_rate_efficiency: float


def _fill_metrics(record: SweepRecord, report: MetricsReport) -> None:
    record.sharpe = report.sharpe_ann
    record.cagr = report.cagr
    record.vol = report.vol_ann
    record.mdd = report.mdd
    record.turnover_ann = report.turnover_ann
    record.efficiency = report.efficiency
    record.hhi = report.hhi_mean
    record.n_eff = report.n_eff_mean
    record.c5 = report.c5_mean
    record.cost_drag_bp = report.cost_drag_bp
    record.final_value = report.final_value


# Worker-side context, installed once per process.
_CTX: dict = {}


def _init_worker(panel: ReturnsPanel, config: BacktestConfig,
                 base_params: QswParams) -> None:
    _CTX["panel"] = panel
    _CTX["config"] = config
    _CTX["base_params"] = base_params
    _CTX["subpanels"] = {}


def _task_panel(draw_id, subset) -> ReturnsPanel:
    panel: ReturnsPanel = _CTX["panel"]
    if subset is None:
        return panel
    cache = _CTX["subpanels"]
    if draw_id not in cache:
        tickers = tuple(panel.tickers[i] for i in subset)
        cache[draw_id] = ReturnsPanel(panel.dates, tickers,
                                      panel.returns[:, subset], panel.mode)
    return cache[draw_id]


def _index_record(record: SweepRecord, panel: ReturnsPanel,
                  config: BacktestConfig) -> None:
    """Metrics of the equal-weight proxy over the same backtest dates."""
    rebalances = rebalance_indices(panel, config)
    if not rebalances:
        raise DataError("insufficient history for the index proxy")
    t0 = rebalances[0]
    t_end = panel.n_days - 1
    if config.end is not None:
        inside = np.nonzero(panel.dates <= np.datetime64(config.end))[0]
        t_end = int(inside[-1])
    proxy = index_proxy(panel.window(t0, t_end + 1))
    equity = np.concatenate(([1.0], proxy.equity))
    daily = equity[1:] / equity[:-1] - 1.0

    n = panel.n_assets
    sharpe = annualized_sharpe(daily) if len(daily) >= 2 and \
        daily.std(ddof=1) > 0 else 0.0
    years = len(daily) / 252.0
    hhi, n_eff, c5 = concentration(np.full(n, 1.0 / n))
    record.sharpe = sharpe
    record.cagr = float(equity[-1] ** (1.0 / years) - 1.0) if years > 0 else 0.0
    record.vol = annualized_vol(daily)
    record.mdd = max_drawdown(equity)
    record.turnover_ann = proxy.turnover_ann
    record.efficiency = efficiency(sharpe, proxy.turnover_ann)
    record.hhi = hhi
    record.n_eff = n_eff
    record.c5 = c5
    record.cost_drag_bp = cost_drag(proxy.turnover_ann,
                                    config.cost_bp_per_100_turnover)
    record.final_value = float(equity[-1])
    record.converged = True
    record.iterations = 0


def _run_task(task) -> SweepRecord:
    run_id, draw_id, subset, kind, combo = task
    config: BacktestConfig = _CTX["config"]
    if kind == "qsw":
        alpha, beta, lam, omega = combo
        record = SweepRecord(run_id, draw_id, "qsw", alpha, beta, lam, omega)
    else:
        record = SweepRecord(run_id, draw_id, kind, None, None, None, None)
    try:
        panel = _task_panel(draw_id, subset)
        if kind == "qsw":
            params = replace(_CTX["base_params"], alpha=alpha, beta=beta,
                             lambda_hold=lam, omega=omega)
            strategy = QswStrategy(params)
            result = run_backtest(panel, strategy, config)
            _fill_metrics(record, summarize(result))
            record.converged = strategy.all_converged
            record.iterations = strategy.total_iterations
        elif kind == "mpt_max_sharpe":
            strategy = MptStrategy()
            result = run_backtest(panel, strategy, config)
            _fill_metrics(record, summarize(result))
            record.converged = True
            record.iterations = 0
        elif kind == "index_proxy":
            _index_record(record, panel, config)
        else:  # pragma: no cover - defensive
            raise ValueError(f"unknown task kind {kind!r}")
    except Exception as exc:
        record.error = f"{type(exc).__name__}: {exc}"
        record.converged = None
        record.iterations = None
    return record


def _run_serial(tasks, panel, config, base_params):
    _init_worker(panel, config, base_params)
    try:
        return [_run_task(t) for t in tasks]
    finally:
        _CTX.clear()


def _execute(tasks, panel, config, base_params, workers: int):
    started = time.perf_counter()
    if workers <= 1:
        records = _run_serial(tasks, panel, config, base_params)
    else:
        ctx = get_context("spawn")
        chunk = max(1, len(tasks) // (workers * 8))
        try:
            with ProcessPoolExecutor(
                    max_workers=workers, mp_context=ctx,
                    initializer=_init_worker,
                    initargs=(panel, config, base_params)) as ex:
                records = list(ex.map(_run_task, tasks, chunksize=chunk))
        except BrokenProcessPool:
            # spawn needs an importable __main__; interactive drivers
            # (REPL, stdin scripts) cannot provide one, so finish the
            # sweep serially rather than failing
            logger.warning("worker pool could not start; running the "
                           "sweep serially")
            records = _run_serial(tasks, panel, config, base_params)
    records.sort(key=lambda r: r.run_id)
    elapsed = time.perf_counter() - started
    n_err = sum(1 for r in records if r.error)
    logger.info("sweep: %d records in %.1fs (%.1f/s), %d error-tagged",
                len(records), elapsed, len(records) / max(elapsed, 1e-9),
                n_err)
    return records


def _default_base_params() -> QswParams:
    return QswParams(alpha=1.0, beta=1.0, lambda_hold=1.0, omega=0.2)


def run_scenarios(panel: ReturnsPanel, config: BacktestConfig,
                  omega_values=DEFAULT_OMEGAS,
                  base_params: QswParams | None = None,
                  workers: int = 1) -> list[SweepRecord]:
    """The six presets crossed with the mixing values, plus one
    mean-variance benchmark record and one index-proxy record."""
    base = base_params or _default_base_params()
    tasks = []
    run_id = 0
    for preset in SCENARIO_PRESETS:
        for omega in omega_values:
            tasks.append((run_id, None, None, "qsw",
                          (preset.alpha, preset.beta, preset.lambda_hold,
                           omega)))
            run_id += 1
    tasks.append((run_id, None, None, "mpt_max_sharpe", None))
    tasks.append((run_id + 1, None, None, "index_proxy", None))
    return _execute(tasks, panel, config, base, workers)


def run_grid(panel: ReturnsPanel, config: BacktestConfig,
             grid: GridSpec | None = None,
             base_params: QswParams | None = None,
             workers: int = 1) -> list[SweepRecord]:
    """Backtest every grid point; one record per configuration."""
    grid = grid or GridSpec()
    base = base_params or _default_base_params()
    tasks = [(run_id, None, None, "qsw", combo)
             for run_id, combo in enumerate(grid.combos())]
    return _execute(tasks, panel, config, base, workers)


def run_robustness(panel: ReturnsPanel, config: BacktestConfig,
                   grid: GridSpec | None = None,
                   spec: RobustnessSpec | None = None,
                   base_params: QswParams | None = None,
                   workers: int = 1):
    """Full grid plus both benchmarks on each random sub-universe.

    Returns ``(records, summary)`` where the summary holds the
    best-by-Sharpe QSW configuration per draw and the win rates against
    the re-optimized mean-variance benchmark on Sharpe and on efficiency.
    """
    grid = grid or GridSpec()
    spec = spec or RobustnessSpec()
    base = base_params or _default_base_params()
    if spec.subset_size > panel.n_assets:
        raise DataError("subset_size exceeds the universe size")

    rng = np.random.default_rng(spec.seed)
    tasks = []
    run_id = 0
    for draw in range(spec.n_draws):
        subset = np.sort(rng.choice(panel.n_assets, size=spec.subset_size,
                                    replace=False))
        for combo in grid.combos():
            tasks.append((run_id, draw, subset, "qsw", combo))
            run_id += 1
        tasks.append((run_id, draw, subset, "mpt_max_sharpe", None))
        tasks.append((run_id + 1, draw, subset, "index_proxy", None))
        run_id += 2

    records = _execute(tasks, panel, config, base, workers)
    return records, summarize_robustness(records)


def summarize_robustness(records: list[SweepRecord]) -> RobustnessSummary:
    """Best QSW per draw versus the same draw's mean-variance benchmark."""
    draws = sorted({r.draw_id for r in records if r.draw_id is not None})
    per_draw = []
    sharpe_wins = eff_wins = scored = 0
    for draw in draws:
        mine = [r for r in records if r.draw_id == draw and not r.error]
        qsw = [r for r in mine if r.strategy == "qsw"]
        mpt = [r for r in mine if r.strategy == "mpt_max_sharpe"]
        if not qsw or not mpt:
            continue
        best = max(qsw, key=lambda r: (r.sharpe, -r.run_id))
        bench = mpt[0]
        scored += 1
        s_win = best.sharpe > bench.sharpe
        e_win = best.efficiency > bench.efficiency
        sharpe_wins += s_win
        eff_wins += e_win
        per_draw.append({
            "draw_id": draw,
            "best_run_id": best.run_id,
            "alpha": best.alpha, "beta": best.beta,
            "lambda": best.lambda_hold, "omega": best.omega,
            "qsw_sharpe": best.sharpe, "mpt_sharpe": bench.sharpe,
            "qsw_efficiency": best.efficiency,
            "mpt_efficiency": bench.efficiency,
            "sharpe_win": s_win, "efficiency_win": e_win,
        })
    if scored == 0:
        return RobustnessSummary([], 0.0, 0.0)
    return RobustnessSummary(per_draw, sharpe_wins / scored,
                             eff_wins / scored)
