"""Price/return panels and per-window asset statistics.

The prices CSV schema is ``date,<ticker1>,<ticker2>,...`` with ISO-8601
dates and positive adjusted close prices; empty cells mark missing data.
Any date row with a missing value (after dropping thin tickers) is dropped
wholesale.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd

from .errors import DataError

__all__ = [
    "PricePanel",
    "ReturnsPanel",
    "AssetStats",
    "load_prices",
    "compute_returns",
    "compute_stats",
    "save_prices_csv",
    "save_returns_csv",
]


def _readonly(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class PricePanel:
    """Date-indexed matrix of positive adjusted close prices.

    ``dates`` (strictly increasing, ``datetime64[D]``), ``tickers`` and the
    ``[T x n]`` ``prices`` matrix are immutable after construction.
    """

    dates: np.ndarray
    tickers: tuple[str, ...]
    prices: np.ndarray

    def __post_init__(self):
        dates = np.asarray(self.dates, dtype="datetime64[D]")
        prices = np.asarray(self.prices, dtype=float)
        if prices.ndim != 2:
            raise DataError("prices must be a 2-D matrix")
        if prices.shape != (len(dates), len(self.tickers)):
            raise DataError("prices shape inconsistent with dates/tickers")
        if len(dates) > 1 and not (dates[1:] > dates[:-1]).all():
            raise DataError("dates must be strictly increasing")
        if not np.isfinite(prices).all() or (prices <= 0).any():
            raise DataError("prices must be finite and strictly positive")
        object.__setattr__(self, "dates", _readonly(dates))
        object.__setattr__(self, "tickers", tuple(self.tickers))
        object.__setattr__(self, "prices", _readonly(prices))

    @property
    def n_assets(self) -> int:
        return len(self.tickers)

    @property
    def n_days(self) -> int:
        return len(self.dates)


@dataclass(frozen=True)
class ReturnsPanel:
    """Per-asset daily returns; ``mode`` is ``"log"`` or ``"simple"``."""

    dates: np.ndarray
    tickers: tuple[str, ...]
    returns: np.ndarray
    mode: str = "log"

    def __post_init__(self):
        if self.mode not in ("log", "simple"):
            raise DataError(f"unknown return mode {self.mode!r}")
        dates = np.asarray(self.dates, dtype="datetime64[D]")
        returns = np.asarray(self.returns, dtype=float)
        if returns.shape != (len(dates), len(self.tickers)):
            raise DataError("returns shape inconsistent with dates/tickers")
        object.__setattr__(self, "dates", _readonly(dates))
        object.__setattr__(self, "tickers", tuple(self.tickers))
        object.__setattr__(self, "returns", _readonly(returns))

    @property
    def n_assets(self) -> int:
        return len(self.tickers)

    @property
    def n_days(self) -> int:
        return len(self.dates)

    def window(self, start: int, stop: int) -> "ReturnsPanel":
        """Rows ``start:stop`` as a new panel (used for training windows)."""
        return ReturnsPanel(self.dates[start:stop], self.tickers,
                            self.returns[start:stop], self.mode)

    def to_simple(self) -> "ReturnsPanel":
        """Exact conversion to simple returns (identity if already simple)."""
        if self.mode == "simple":
            return self
        return ReturnsPanel(self.dates, self.tickers,
                            np.expm1(self.returns), "simple")


@dataclass(frozen=True)
class AssetStats:
    """Per-asset mean, volatility, daily Sharpe ratio plus the covariance.

    The Sharpe ratio is defined as 0 for zero-volatility assets so that
    degenerate columns cannot inject infinities into the graph weights.
    """

    mu: np.ndarray
    sigma: np.ndarray
    sr: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mu = _readonly(np.asarray(self.mu, dtype=float))
        sigma = _readonly(np.asarray(self.sigma, dtype=float))
        sr = _readonly(np.asarray(self.sr, dtype=float))
        cov = np.asarray(self.cov, dtype=float)
        n = len(mu)
        if not (len(sigma) == len(sr) == n) or cov.shape != (n, n):
            raise DataError("inconsistent statistics shapes")
        if not np.allclose(cov, cov.T, atol=1e-12, rtol=0):
            raise DataError("covariance matrix must be symmetric")
        if (np.diag(cov) < -1e-15).any():
            raise DataError("covariance diagonal must be non-negative")
        if not np.isfinite(sr).all():
            raise DataError("Sharpe ratios must be finite")
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "sr", sr)
        object.__setattr__(self, "cov", _readonly(cov))

    @property
    def n_assets(self) -> int:
        return len(self.mu)


def load_prices(path: str | Path, min_history: int = 2) -> PricePanel:
    """Load a prices CSV, keeping tickers with at least ``min_history`` valid rows.

    Rows are sorted by date; any remaining row with a missing cell is
    dropped. Raises :class:`DataError` on malformed input, non-positive
    prices, duplicate dates, or fewer than 2 surviving rows.
    """
    path = Path(path)
    if not path.exists():
        raise DataError(f"prices file not found: {path}")
    try:
        df = pd.read_csv(path)
    except Exception as exc:
        raise DataError(f"malformed prices CSV {path}: {exc}") from None
    if df.shape[1] < 2 or df.columns[0].strip().lower() != "date":
        raise DataError("prices CSV must have a leading 'date' column and "
                        "at least one ticker column")
    try:
        dates = pd.to_datetime(df.iloc[:, 0], format="%Y-%m-%d").to_numpy(
            dtype="datetime64[D]")
    except Exception as exc:
        raise DataError(f"unparseable ISO-8601 dates: {exc}") from None

    values = df.iloc[:, 1:].apply(pd.to_numeric, errors="coerce").to_numpy(float)
    tickers = [str(c) for c in df.columns[1:]]

    order = np.argsort(dates, kind="stable")
    dates, values = dates[order], values[order]
    if len(dates) > 1 and (dates[1:] == dates[:-1]).any():
        raise DataError("duplicate dates in prices CSV")

    keep = np.isfinite(values).sum(axis=0) >= min_history
    if not keep.any():
        raise DataError(f"no ticker has {min_history} rows of history")
    values = values[:, keep]
    tickers = [t for t, k in zip(tickers, keep) if k]

    full_rows = np.isfinite(values).all(axis=1)
    dates, values = dates[full_rows], values[full_rows]
    if len(dates) < 2:
        raise DataError("fewer than 2 complete rows survive missing-data drops")
    if (values <= 0).any():
        raise DataError("non-positive price encountered")
    return PricePanel(dates, tuple(tickers), values)


def compute_returns(panel: PricePanel, mode: str = "log") -> ReturnsPanel:
    """Daily returns from a price panel (``T-1`` rows).

    ``log``: ``ln(p_t / p_{t-1})``; ``simple``: ``p_t / p_{t-1} - 1``.
    """
    if mode not in ("log", "simple"):
        raise DataError(f"unknown return mode {mode!r}")
    if panel.n_days < 2:
        raise DataError("need at least 2 price rows to compute returns")
    ratio = panel.prices[1:] / panel.prices[:-1]
    rets = np.log(ratio) if mode == "log" else ratio - 1.0
    return ReturnsPanel(panel.dates[1:], panel.tickers, rets, mode)


def compute_stats(returns: ReturnsPanel,
                  window: tuple[int, int] | None = None) -> AssetStats:
    """Mean, volatility, Sharpe ratio and sample covariance over a window.

    ``window`` is a half-open row range ``(start, stop)``; ``None`` uses the
    whole panel. The covariance uses the unbiased ``m - 1`` denominator and
    ``sigma`` is its diagonal square root, so the two always agree.
    """
    if window is None:
        window = (0, returns.n_days)
    start, stop = window
    if start < 0 or stop > returns.n_days or stop - start < 2:
        raise DataError(f"window {window} outside panel or shorter than 2 rows")
    block = returns.returns[start:stop]
    mu = block.mean(axis=0)
    centered = block - mu
    cov = centered.T @ centered / (block.shape[0] - 1)
    cov = (cov + cov.T) / 2.0
    sigma = np.sqrt(np.clip(np.diag(cov), 0.0, None))
    with np.errstate(divide="ignore", invalid="ignore"):
        sr = np.where(sigma > 0, mu / np.where(sigma > 0, sigma, 1.0), 0.0)
    return AssetStats(mu, sigma, sr, cov)


def save_prices_csv(panel: PricePanel, path: str | Path) -> None:
    """Write a panel back out in the canonical prices CSV schema."""
    df = pd.DataFrame(panel.prices, columns=list(panel.tickers))
    df.insert(0, "date", [str(d) for d in panel.dates])
    df.to_csv(path, index=False)


def save_returns_csv(panel: ReturnsPanel, path: str | Path) -> None:
    """Write returns with the same date-column convention as prices."""
    df = pd.DataFrame(panel.returns, columns=list(panel.tickers))
    df.insert(0, "date", [str(d) for d in panel.dates])
    df.to_csv(path, index=False)
