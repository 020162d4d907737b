"""Classical references: rate-matrix stationary law, long-only max-Sharpe
mean-variance optimizer, and an equal-weight index proxy.

``classical_stationary`` is the independent oracle for the walk's
classical limit: with jump rates ``C_ij`` moving mass from node j to node
i, the stationary law is the null vector of ``Q = C - diag(colsum(C))``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .data import ReturnsPanel
from .errors import ParameterError

__all__ = [
    "BenchmarkWeights",
    "ProxySeries",
    "classical_stationary",
    "mpt_max_sharpe",
    "index_proxy",
]

INDEX_TURNOVER = 0.05  # fixed annual-turnover assumption for the proxy


@dataclass(frozen=True)
class BenchmarkWeights:
    """Simplex weights produced by a classical method."""

    weights: np.ndarray
    method: str
    warning: str | None = None
    kkt_residual: float | None = None


@dataclass(frozen=True)
class ProxySeries:
    """Equal-weight index proxy equity path with its turnover tag."""

    dates: np.ndarray
    equity: np.ndarray
    turnover_ann: float = INDEX_TURNOVER
    method: str = "index_proxy"


def classical_stationary(C: np.ndarray) -> np.ndarray:
    """Stationary distribution of the continuous-time jump process with
    rate matrix C (columns are sources, rows destinations).

    Solved by dense null-space extraction of the generator, then
    cross-checked against plain power iteration of the uniformized chain.
    """
    C = np.asarray(C, dtype=float)
    if C.ndim != 2 or C.shape[0] != C.shape[1]:
        raise ParameterError("rate matrix must be square")
    if (C <= 0).any():
        raise ParameterError("rate matrix must be strictly positive")
    n = C.shape[0]
    if n == 1:
        return np.array([1.0])

    colsum = C.sum(axis=0)
    Q = C - np.diag(colsum)
    null = scipy.linalg.null_space(Q, rcond=1e-12)
    if null.shape[1] != 1:
        raise ParameterError("generator null space is not one-dimensional "
                             "(reducible rate matrix?)")
    pi = null[:, 0]
    pi = pi / pi.sum()
    if (pi <= 0).any():
        raise ParameterError("stationary vector is not strictly positive")
    if np.abs(Q @ pi).max() > 1e-10:
        raise ParameterError("null-space residual too large")

    # uniformized-chain power iteration as an independent cross-check
    rate = 1.01 * (colsum - np.diag(C)).max()
    M = np.eye(n) + Q / rate
    p = np.full(n, 1.0 / n)
    for _ in range(1_000_000):
        nxt = M @ p
        if np.abs(nxt - p).max() < 1e-14:
            p = nxt
            break
        p = nxt
    if np.abs(p - pi).max() > 1e-8:
        raise ParameterError("power-iteration cross-check failed")
    return pi


def _project_weighted_simplex(z: np.ndarray, a: np.ndarray) -> np.ndarray:
    """Euclidean projection onto ``{y >= 0, a.y = 1}``.

    The KKT system gives ``y = max(0, z + theta * a)`` with
    ``g(theta) = a.y(theta) - 1`` piecewise linear and nondecreasing; the
    root is located exactly by scanning the sorted breakpoints.
    """
    nz = a != 0.0
    breaks = np.unique(-z[nz] / a[nz])

    def g(theta: float) -> float:
        return float(a @ np.maximum(0.0, z + theta * a) - 1.0)

    lo = breaks[0] - 1.0
    while g(lo) >= 0.0:
        lo = 2.0 * lo - breaks[-1] - 1.0
    hi = breaks[-1] + 1.0
    while g(hi) < 0.0:
        hi = 2.0 * hi - breaks[0] + 1.0

    candidates = np.concatenate(([lo], breaks, [hi]))
    vals = np.array([g(t) for t in candidates])
    k = int(np.searchsorted(vals >= 0.0, True))
    t0, t1 = candidates[k - 1], candidates[k]
    g0, g1 = vals[k - 1], vals[k]
    theta = t0 if g1 == g0 else t0 - g0 * (t1 - t0) / (g1 - g0)
    return np.maximum(0.0, z + theta * a)


def _project_simplex(z: np.ndarray) -> np.ndarray:
    """Euclidean projection onto the probability simplex (sort-based)."""
    u = np.sort(z)[::-1]
    css = np.cumsum(u) - 1.0
    idx = np.arange(1, len(z) + 1)
    rho = np.nonzero(u - css / idx > 0)[0][-1]
    theta = css[rho] / (rho + 1.0)
    return np.maximum(0.0, z - theta)


def _fista_quadratic(cov: np.ndarray, project, y0: np.ndarray,
                     a: np.ndarray, max_iters: int = 200_000,
                     tol: float = 1e-15):
    """Accelerated projected gradient descent on ``y' Sigma y``.

    Stops when either the iterate stalls or the KKT residual (checked
    periodically) is far below the verification threshold.
    """
    lam_max = float(np.linalg.eigvalsh(cov)[-1])
    step = 1.0 / max(2.0 * lam_max, 1e-30)
    y = project(y0)
    z = y.copy()
    t = 1.0
    for k in range(1, max_iters + 1):
        y_new = project(z - step * 2.0 * (cov @ z))
        t_new = (1.0 + np.sqrt(1.0 + 4.0 * t * t)) / 2.0
        # monotone restart keeps the momentum from overshooting
        if y_new @ (cov @ y_new) > y @ (cov @ y):
            z = y_new.copy()
            t_new = 1.0
        else:
            z = y_new + (t - 1.0) / t_new * (y_new - y)
        moved = np.abs(y_new - y).max()
        y = y_new
        t = t_new
        if moved <= tol * max(1.0, np.abs(y).max()):
            break
        if k % 256 == 0 and _kkt_residual(y, cov, a) < 1e-11:
            break
    return y


def _kkt_residual(y: np.ndarray, cov: np.ndarray, a: np.ndarray) -> float:
    """Max violation of the KKT system of ``min y'Sy s.t. a.y=1, y>=0``."""
    grad = 2.0 * (cov @ y)
    active = y > 1e-12 * max(1.0, y.max())
    denom = float(a[active] @ a[active])
    nu = float(a[active] @ grad[active]) / denom if denom > 0 else 0.0
    slack = grad - nu * a
    scale = max(1.0, np.abs(grad).max(), abs(nu) * max(1.0, np.abs(a).max()))
    res = max(
        float(np.abs(slack[active]).max(initial=0.0)),
        float(max(0.0, -(slack[~active].min(initial=0.0)))),
        abs(float(a @ y) - 1.0),
    )
    return res / scale


def mpt_max_sharpe(mu: np.ndarray, cov: np.ndarray,
                   rf: float = 0.0) -> BenchmarkWeights:
    """Long-only maximum-Sharpe portfolio over one training window.

    Uses the standard convex reformulation: minimize ``y' Sigma y`` subject
    to ``(mu - rf).y = 1, y >= 0`` and rescale ``w = y / sum(y)``. When no
    asset beats the risk-free rate the problem has no tangency solution and
    a long-only minimum-variance portfolio is returned with a warning.
    """
    mu = np.asarray(mu, dtype=float)
    cov = np.asarray(cov, dtype=float)
    n = len(mu)
    if cov.shape != (n, n):
        raise ParameterError("mu/cov shapes disagree")
    cov = (cov + cov.T) / 2.0
    if n == 1:
        return BenchmarkWeights(np.array([1.0]), "mpt_max_sharpe")

    a = mu - rf
    if a.max() <= 0.0:
        ones = np.ones(n)
        w = _fista_quadratic(cov, _project_simplex, np.full(n, 1.0 / n), ones)
        w = w / w.sum()
        return BenchmarkWeights(
            w, "mpt_max_sharpe",
            warning="no asset return exceeds the risk-free rate; "
                    "falling back to long-only minimum variance")

    project = lambda z: _project_weighted_simplex(z, a)
    y = _fista_quadratic(cov, project, np.zeros(n), a)
    total = y.sum()
    if total <= 0.0:
        raise ParameterError("degenerate max-Sharpe reformulation solution")
    w = y / total
    return BenchmarkWeights(w, "mpt_max_sharpe",
                            kkt_residual=_kkt_residual(y, cov, a))


def index_proxy(returns: ReturnsPanel) -> ProxySeries:
    """Equal-weight index proxy: compounds the cross-sectional mean
    log-gross return, tagged with the fixed 5% annual turnover assumption.

    For a single asset this reproduces that asset's cumulative return
    exactly; for mirrored two-asset returns the proxy is flat to second
    order.
    """
    if returns.n_days < 1:
        raise ParameterError("empty returns panel")
    log_gross = returns.returns if returns.mode == "log" \
        else np.log1p(returns.returns)
    equity = np.exp(np.cumsum(log_gross.mean(axis=1)))
    return ProxySeries(dates=returns.dates, equity=equity)
