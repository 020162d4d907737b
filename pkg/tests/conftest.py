"""Shared fixtures and oracle helpers."""

from __future__ import annotations

import numpy as np
import pytest

from qsfolio.data import AssetStats, ReturnsPanel, compute_returns, compute_stats
from qsfolio.graph import QswParams, build_graph
from qsfolio.synth import SynthSpec, synthesize_universe


def random_stats(n: int, seed: int, days: int = 300) -> AssetStats:
    """Statistics of a seeded random-returns window."""
    rng = np.random.default_rng(seed)
    rets = rng.normal(3e-4, 0.012, size=(days, n)) * \
        rng.uniform(0.6, 1.6, size=n)
    dates = np.arange("2020-01-01", days, dtype="datetime64[D]")
    panel = ReturnsPanel(dates, tuple(f"A{i}" for i in range(n)), rets, "log")
    return compute_stats(panel)


def random_graph(n: int, seed: int, **overrides):
    """Seeded random financial graph plus its parameters."""
    defaults = dict(alpha=10.0, beta=10.0, lambda_hold=10.0, omega=0.5)
    defaults.update(overrides)
    params = QswParams(**defaults)
    return build_graph(random_stats(n, seed), params), params


def random_density(n: int, seed: int) -> np.ndarray:
    """Random valid density matrix (Hermitian, PSD, unit trace)."""
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


@pytest.fixture
def small_panel():
    """10 assets, 2 sectors, ~1.6 years of daily returns."""
    prices = synthesize_universe(
        SynthSpec(n_assets=10, n_sectors=2, days=400, seed=11))
    return compute_returns(prices)


@pytest.fixture
def sector_panel():
    """20 assets, 4 sectors, ~3 years; enough for quarterly backtests."""
    prices = synthesize_universe(
        SynthSpec(n_assets=20, n_sectors=4, days=756, seed=5))
    return compute_returns(prices)


def write_prices_csv(path, dates, tickers, cells):
    """Write a prices CSV verbatim; ``cells[t][i]`` may be None for blanks."""
    lines = ["date," + ",".join(tickers)]
    for d, row in zip(dates, cells):
        lines.append(str(d) + "," + ",".join(
            "" if v is None else repr(v) for v in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path
