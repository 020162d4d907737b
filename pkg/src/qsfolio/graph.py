"""Dual-channel financial graph construction.

The classical channel turns asset statistics into an exponential-preference
weight matrix W, its row-stochastic normalization P, and the damped Google
matrix G. The coherent channel builds a real symmetric Hamiltonian H whose
diagonal rewards high Sharpe ratios and whose off-diagonal couples assets
through the min-max-normalized covariance.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .data import AssetStats
from .errors import ParameterError

__all__ = [
    "QswParams",
    "FinancialGraph",
    "build_weight_matrix",
    "row_normalize",
    "google_matrix",
    "normalize_covariance",
    "build_hamiltonian",
    "build_graph",
    "dump_graph_csv",
]

# exp() overflows just above exp(709); reject slightly earlier
_EXP_LIMIT = 700.0


@dataclass(frozen=True)
class QswParams:
    """Walk hyper-parameters and solver settings.

    ``alpha`` scales the preference for high-Sharpe destinations, ``beta``
    the covariance penalty, ``lambda_hold`` the self-loop holding reward and
    ``omega`` the quantum-classical mix (0 = coherent, 1 = classical).
    """

    alpha: float
    beta: float
    lambda_hold: float
    omega: float
    damping: float = 0.9
    gamma1: float = 100.0
    gamma2: float = 100.0
    dt: float = 0.1
    tol: float = 1e-8
    max_iters: int = 5000
    update_mode: str = "alg"

    def __post_init__(self):
        if self.alpha < 0 or self.beta < 0 or self.lambda_hold < 0:
            raise ParameterError("alpha, beta and lambda_hold must be >= 0")
        if not 0.0 <= self.omega <= 1.0:
            raise ParameterError("omega must lie in [0, 1]")
        if not 0.0 < self.damping < 1.0:
            raise ParameterError("damping must lie strictly in (0, 1)")
        if self.dt <= 0:
            raise ParameterError("dt must be positive")
        if self.tol <= 0:
            raise ParameterError("tol must be positive")
        if self.max_iters < 1:
            raise ParameterError("max_iters must be >= 1")
        if self.update_mode not in ("alg", "eq"):
            raise ParameterError(f"unknown update mode {self.update_mode!r}")

    def with_omega(self, omega: float) -> "QswParams":
        return replace(self, omega=omega)


@dataclass(frozen=True)
class FinancialGraph:
    """The assembled dual-channel graph for one training window."""

    n: int
    W: np.ndarray
    P: np.ndarray
    G: np.ndarray
    H: np.ndarray
    cov_hat: np.ndarray


def build_weight_matrix(stats: AssetStats, params: QswParams) -> np.ndarray:
    """Exponential preference weights.

    ``W_ij = exp(alpha * SR_j - beta * Sigma_ij)`` for ``i != j`` and
    ``W_ii = exp(lambda_hold * SR_i)``. Exponent arguments beyond the
    double-precision exp() range are rejected rather than clamped.
    """
    if stats.n_assets < 1:
        raise ParameterError("need at least one asset")
    sr, cov = stats.sr, stats.cov
    expo = params.alpha * sr[None, :] - params.beta * cov
    diag = params.lambda_hold * sr
    np.fill_diagonal(expo, diag)
    worst = np.abs(expo).max() if expo.size else 0.0
    if worst > _EXP_LIMIT:
        raise ParameterError(
            f"weight exponent {worst:.1f} exceeds {_EXP_LIMIT:.0f}; "
            "rescale parameters (alpha/beta/lambda too large for these stats)")
    return np.exp(expo)


def row_normalize(W: np.ndarray) -> np.ndarray:
    """Row-stochastic transition matrix ``P_ij = W_ij / sum_k W_ik``."""
    W = np.asarray(W, dtype=float)
    sums = W.sum(axis=1, keepdims=True)
    if (sums <= 0).any():
        raise ParameterError("zero row sum; cannot normalize weight matrix")
    return W / sums


def google_matrix(P: np.ndarray, damping: float = 0.9) -> np.ndarray:
    """Damped transition matrix with uniform teleportation.

    ``G = damping * P + (1 - damping) / n``, keeping every entry at least
    ``(1 - damping) / n`` so the walk is ergodic.
    """
    if not 0.0 < damping < 1.0:
        raise ParameterError("damping must lie strictly in (0, 1)")
    P = np.asarray(P, dtype=float)
    n = P.shape[0]
    return damping * P + (1.0 - damping) / n


def normalize_covariance(cov: np.ndarray) -> np.ndarray:
    """Min-max normalization of the covariance over all entries.

    A constant matrix maps to all zeros, which simply removes the coherent
    coupling instead of dividing by zero.
    """
    cov = np.asarray(cov, dtype=float)
    lo, hi = cov.min(), cov.max()
    if hi == lo:
        return np.zeros_like(cov)
    return (cov - lo) / (hi - lo)


def build_hamiltonian(stats: AssetStats, params: QswParams) -> np.ndarray:
    """Real symmetric Hamiltonian: ``-gamma1 * SR_i`` on the diagonal,
    ``gamma2 * normalized covariance`` off it."""
    if stats.n_assets < 1:
        raise ParameterError("need at least one asset")
    cov_hat = normalize_covariance(stats.cov)
    H = params.gamma2 * cov_hat
    np.fill_diagonal(H, -params.gamma1 * stats.sr)
    return (H + H.T) / 2.0


def build_graph(stats: AssetStats, params: QswParams) -> FinancialGraph:
    """Assemble W, P, G, H and the normalized covariance for one window."""
    W = build_weight_matrix(stats, params)
    P = row_normalize(W)
    G = google_matrix(P, params.damping)
    cov_hat = normalize_covariance(stats.cov)
    H = build_hamiltonian(stats, params)
    return FinancialGraph(n=stats.n_assets, W=W, P=P, G=G, H=H,
                          cov_hat=cov_hat)


def dump_graph_csv(graph: FinancialGraph, out_dir: str | Path) -> None:
    """Debug dump of W/P/G/H as header-free row-major CSV matrices."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name in ("W", "P", "G", "H"):
        np.savetxt(out / f"{name}.csv", getattr(graph, name), delimiter=",")
