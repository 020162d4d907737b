"""Performance, concentration, trading and cost metrics.

Conventions: 252 trading days per year; Sharpe uses the sample standard
deviation; turnover annualizes the mean per-rebalance absolute weight
change by the number of rebalance periods per year (4 for quarterly).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .backtest import BacktestResult

__all__ = [
    "DegenerateSeriesWarning",
    "MetricsReport",
    "annualized_sharpe",
    "annualized_vol",
    "max_drawdown",
    "concentration",
    "annualized_turnover",
    "efficiency",
    "cost_drag",
    "summarize",
]

TRADING_DAYS = 252
EFFICIENCY_FLOOR = 0.01  # added to turnover so zero-turnover runs stay finite


class DegenerateSeriesWarning(UserWarning):
    """A return series had zero dispersion; the Sharpe ratio was set to 0."""


@dataclass(frozen=True)
class MetricsReport:
    """All headline metrics of one backtest."""

    sharpe_ann: float
    vol_ann: float
    cagr: float
    mdd: float
    hhi_mean: float
    n_eff_mean: float
    c5_mean: float
    turnover_ann: float
    efficiency: float
    cost_drag_bp: float
    final_value: float


def annualized_sharpe(daily_returns: np.ndarray) -> float:
    """``mean * 252 / (std * sqrt(252))`` with the sample (m-1) std.

    A dispersion-free series has no meaningful Sharpe ratio; it yields 0
    with a :class:`DegenerateSeriesWarning`.
    """
    r = np.asarray(daily_returns, dtype=float)
    if len(r) < 2:
        raise ValueError("need at least 2 return observations")
    sd = r.std(ddof=1)
    if sd == 0.0:
        warnings.warn("zero-dispersion return series; Sharpe set to 0",
                      DegenerateSeriesWarning, stacklevel=2)
        return 0.0
    return float(r.mean() * TRADING_DAYS / (sd * np.sqrt(TRADING_DAYS)))


def annualized_vol(daily_returns: np.ndarray) -> float:
    r = np.asarray(daily_returns, dtype=float)
    if len(r) < 2:
        return 0.0
    return float(r.std(ddof=1) * np.sqrt(TRADING_DAYS))


def max_drawdown(equity: np.ndarray) -> float:
    """Largest peak-to-trough relative decline, in [0, 1)."""
    v = np.asarray(equity, dtype=float)
    if (v <= 0).any():
        raise ValueError("equity series must be strictly positive")
    peaks = np.maximum.accumulate(v)
    return float(((peaks - v) / peaks).max())


def concentration(weights: np.ndarray) -> tuple[float, float, float]:
    """(HHI, effective number of stocks, top-5 concentration)."""
    w = np.asarray(weights, dtype=float)
    hhi = float(w @ w)
    c5 = float(np.sort(w)[::-1][:5].sum())
    return hhi, 1.0 / hhi, c5


def annualized_turnover(weight_history: list[np.ndarray],
                        prior_weights: list[np.ndarray] | None = None,
                        periods_per_year: int = 4) -> float:
    """Mean per-rebalance sum of absolute weight changes, annualized.

    By default each rebalance is compared against the previous target
    weights; pass ``prior_weights`` (one entry per rebalance after the
    first, e.g. drifted pre-rebalance weights) to override. Fewer than two
    rebalances mean nothing was traded: turnover 0.
    """
    targets = [np.asarray(w, dtype=float) for w in weight_history]
    if len(targets) < 2:
        return 0.0
    priors = targets[:-1] if prior_weights is None \
        else [np.asarray(w, dtype=float) for w in prior_weights]
    if len(priors) != len(targets) - 1:
        raise ValueError("need one prior weight vector per rebalance "
                         "after the first")
    changes = [np.abs(t - p).sum() for t, p in zip(targets[1:], priors)]
    return float(periods_per_year * np.mean(changes))


def efficiency(sharpe: float, turnover_ann: float) -> float:
    """Sharpe per unit of annual turnover, floored to avoid division by 0."""
    if turnover_ann < 0:
        raise ValueError("turnover must be non-negative")
    return float(sharpe / (turnover_ann + EFFICIENCY_FLOOR))


def cost_drag(turnover_ann: float, bp_per_100: float) -> float:
    """Annual implementation drag in basis points; turnover is a fraction
    (1.0 means 100% of the book traded per year)."""
    if turnover_ann < 0 or bp_per_100 < 0:
        raise ValueError("inputs must be non-negative")
    return float(turnover_ann * bp_per_100)


def summarize(result: BacktestResult) -> MetricsReport:
    """Compute every metric of a backtest result.

    Concentration metrics average over rebalance dates (with
    ``n_eff_mean`` defined as ``1 / hhi_mean``); CAGR converts elapsed
    trading days to years at 252 per year.
    """
    r = result.daily_returns
    if len(r) >= 2:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", DegenerateSeriesWarning)
            sharpe = annualized_sharpe(r)
        vol = annualized_vol(r)
    else:
        sharpe, vol = 0.0, 0.0

    years = len(r) / TRADING_DAYS
    final_value = result.final_value
    cagr = float(final_value ** (1.0 / years) - 1.0) if years > 0 else 0.0

    targets = [w for _, w in result.weight_history]
    conc = np.array([concentration(w) for w in targets])
    hhi_mean = float(conc[:, 0].mean())
    c5_mean = float(conc[:, 2].mean())

    config = result.config
    priors = None
    if config.turnover_convention == "drift_aware":
        priors = [w for _, w in result.drifted_history]
    turnover = annualized_turnover(targets, priors, config.periods_per_year)

    return MetricsReport(
        sharpe_ann=sharpe,
        vol_ann=vol,
        cagr=cagr,
        mdd=max_drawdown(result.equity),
        hhi_mean=hhi_mean,
        n_eff_mean=1.0 / hhi_mean,
        c5_mean=c5_mean,
        turnover_ann=turnover,
        efficiency=efficiency(sharpe, turnover),
        cost_drag_bp=cost_drag(turnover, config.cost_bp_per_100_turnover),
        final_value=final_value,
    )
