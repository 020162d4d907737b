"""Quantum-stochastic-walk portfolio optimization toolkit.

Subpackages and modules:

- ``data``      price/return panels, per-window asset statistics
- ``synth``     seeded synthetic universes with block-sector correlation
- ``graph``     dual-channel financial graph (weights, Google matrix, Hamiltonian)
- ``engine``    Kraus-operator density-matrix evolution to the stationary state
- ``classical`` classical references: rate-matrix stationary law, max-Sharpe
  mean-variance solver, equal-weight index proxy
- ``backtest``  rolling-window quarterly-rebalanced backtesting
- ``metrics``   performance, concentration, trading and cost metrics
- ``sweep``     scenario / grid / robustness experiment orchestration
- ``report``    CSV and plot emission
- ``cli``       command-line interface (``qsfolio`` entry point)
"""

__version__ = "0.1.0"

__all__ = ["__version__"]
