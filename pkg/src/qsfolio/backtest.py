"""Rolling-window backtesting with calendar rebalancing.

At each rebalance date the strategy sees only returns strictly before that
date (the training window), then holdings drift with simple returns until
the next rebalance - plain buy-and-hold accounting, so the daily portfolio
return is the drifted-weight dot product with asset returns.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .classical import mpt_max_sharpe
from .data import ReturnsPanel, compute_stats
from .engine import run_to_stationary
from .errors import DataError
from .graph import QswParams, build_graph

__all__ = [
    "BacktestConfig",
    "BacktestResult",
    "run_backtest",
    "rebalance_indices",
    "QswStrategy",
    "MptStrategy",
]

_REBALANCE_MONTHS = {"quarterly": (1, 4, 7, 10),
                     "monthly": tuple(range(1, 13))}


@dataclass(frozen=True)
class BacktestConfig:
    """Backtest window, rebalancing rule and trading-cost settings.

    ``turnover_convention`` selects between the consecutive-target formula
    (``paper_literal``) and measuring against the drifted pre-rebalance
    weights (``drift_aware``).
    """

    train_days: int = 252
    rebalance: str = "quarterly"
    start: str | None = None
    end: str | None = None
    cost_bp_per_100_turnover: float = 20.0
    turnover_convention: str = "paper_literal"

    def __post_init__(self):
        if self.train_days < 2:
            raise DataError("train_days must be >= 2")
        if self.rebalance not in _REBALANCE_MONTHS:
            raise DataError(f"unknown rebalance rule {self.rebalance!r}")
        if self.turnover_convention not in ("paper_literal", "drift_aware"):
            raise DataError(
                f"unknown turnover convention {self.turnover_convention!r}")
        if self.cost_bp_per_100_turnover < 0:
            raise DataError("cost must be non-negative")
        if self.start is not None and self.end is not None and \
                np.datetime64(self.start) >= np.datetime64(self.end):
            raise DataError("start must precede end")

    @property
    def periods_per_year(self) -> int:
        return 4 if self.rebalance == "quarterly" else 12


@dataclass(frozen=True)
class BacktestResult:
    """Equity path with V0 = 1, per-rebalance target and drifted weights."""

    dates: np.ndarray
    equity: np.ndarray
    daily_returns: np.ndarray
    weight_history: list
    drifted_history: list
    tickers: tuple
    config: BacktestConfig

    @property
    def final_value(self) -> float:
        return float(self.equity[-1])


def rebalance_indices(panel: ReturnsPanel, config: BacktestConfig) -> list[int]:
    """Row indices of rebalance dates: the first trading day of each
    rebalance month with a full training window of prior rows, restricted
    to the configured date range."""
    dates = panel.dates
    months = dates.astype("datetime64[M]")
    month_num = (months.astype(int) % 12) + 1
    first_of_month = np.ones(len(dates), dtype=bool)
    first_of_month[1:] = months[1:] != months[:-1]

    wanted = np.isin(month_num, _REBALANCE_MONTHS[config.rebalance])
    eligible = first_of_month & wanted
    eligible[:config.train_days] = False
    if config.start is not None:
        eligible &= dates >= np.datetime64(config.start)
    if config.end is not None:
        eligible &= dates <= np.datetime64(config.end)
    return [int(i) for i in np.nonzero(eligible)[0]]


def _check_weights(w: np.ndarray, n: int) -> np.ndarray:
    w = np.asarray(w, dtype=float)
    if w.shape != (n,) or not np.isfinite(w).all():
        raise DataError("strategy returned malformed weights")
    if w.min() < -1e-9 or abs(w.sum() - 1.0) > 1e-6:
        raise DataError("strategy weights are not on the simplex")
    w = np.clip(w, 0.0, None)
    return w / w.sum()


def run_backtest(panel: ReturnsPanel,
                 strategy: Callable[[ReturnsPanel], np.ndarray],
                 config: BacktestConfig) -> BacktestResult:
    """Run one strategy over the panel under the given config.

    The equity series starts at 1.0 on the close before the first
    rebalanced day; the return of the rebalance day itself already accrues
    at the new target weights.
    """
    rebalances = rebalance_indices(panel, config)
    if not rebalances:
        raise DataError("insufficient history: no rebalance date has a full "
                        "training window inside the backtest range")
    t0 = rebalances[0]
    t_end = panel.n_days - 1
    if config.end is not None:
        inside = np.nonzero(panel.dates <= np.datetime64(config.end))[0]
        t_end = int(inside[-1])
    if t_end < t0:
        raise DataError("backtest range ends before the first rebalance")

    simple = panel.to_simple().returns
    n = panel.n_assets
    reb_set = set(rebalances)

    equity = np.empty(t_end - t0 + 2)
    equity[0] = 1.0
    value = 1.0
    holdings = np.zeros(n)
    weight_history: list = []
    drifted_history: list = []

    for tau in range(t0, t_end + 1):
        if tau in reb_set:
            if weight_history:
                drifted_history.append((panel.dates[tau], holdings / value))
            window = panel.window(tau - config.train_days, tau)
            target = _check_weights(strategy(window), n)
            weight_history.append((panel.dates[tau], target))
            holdings = value * target
        holdings = holdings * (1.0 + simple[tau])
        value = holdings.sum()
        equity[tau - t0 + 1] = value

    if len(equity) < 2:
        raise DataError("no trading days after the first rebalance")
    daily_returns = equity[1:] / equity[:-1] - 1.0
    return BacktestResult(
        dates=panel.dates[t0 - 1:t_end + 1],
        equity=equity,
        daily_returns=daily_returns,
        weight_history=weight_history,
        drifted_history=drifted_history,
        tickers=panel.tickers,
        config=config,
    )


class QswStrategy:
    """Walk-based weights; records per-rebalance convergence diagnostics."""

    def __init__(self, params: QswParams):
        self.params = params
        self.history: list[tuple[bool, int]] = []

    def __call__(self, window: ReturnsPanel) -> np.ndarray:
        stats = compute_stats(window)
        graph = build_graph(stats, self.params)
        result = run_to_stationary(graph, self.params)
        self.history.append((result.converged, result.iterations))
        return result.weights

    @property
    def all_converged(self) -> bool:
        return all(c for c, _ in self.history)

    @property
    def total_iterations(self) -> int:
        return sum(i for _, i in self.history)


class MptStrategy:
    """Long-only maximum-Sharpe weights on each training window."""

    def __init__(self, rf: float = 0.0):
        self.rf = rf
        self.warnings: list[str] = []

    def __call__(self, window: ReturnsPanel) -> np.ndarray:
        stats = compute_stats(window)
        bench = mpt_max_sharpe(stats.mu, stats.cov, self.rf)
        if bench.warning:
            self.warnings.append(bench.warning)
        return bench.weights
