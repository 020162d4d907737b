"""Kraus-operator discretization of the walk dynamics.

One evolution step is the quantum channel

    rho' = K0 rho K0^dag + sum_ij K_ij rho K_ij^dag,
    K_ij = gamma_ij |i><j|,   gamma_ij^2 = 1 - exp(-omega * c_ij * dt),

with jump rates ``c = G`` (the Google matrix). Because every K_ij is a
single-entry matrix, the jump sum collapses to ``diag(Gamma @ diag(rho))``
where ``Gamma[i, j] = gamma_ij^2``; the column sums ``d_j = sum_i Gamma_ij``
are the total per-source jump probabilities.

K0 is built as ``exp(-i (1-omega) H dt) @ diag(sqrt(1 - d))``: applying the
survival factor on the source side makes the completeness relation
``K0^dag K0 + diag(d) = I`` hold exactly, which is what keeps the channel
trace-preserving without any renormalization.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ParameterError
from ..graph import FinancialGraph, QswParams

__all__ = ["KrausSet", "hermitian_unitary", "build_kraus"]


def hermitian_unitary(H: np.ndarray, s: float) -> np.ndarray:
    """``exp(-i s H)`` for real symmetric H via eigendecomposition.

    Exact up to the eigensolver: ``U = V exp(-i s L) V^T`` with ``H = V L V^T``,
    so unitarity holds to machine precision for any step size.
    """
    H = np.asarray(H, dtype=float)
    if not np.isfinite(H).all():
        raise ParameterError("Hamiltonian contains non-finite entries")
    n = H.shape[0]
    if s == 0.0:
        return np.eye(n, dtype=complex)
    lam, V = np.linalg.eigh(H)
    return (V * np.exp(-1j * s * lam)) @ V.T


@dataclass(frozen=True)
class KrausSet:
    """Operators for one discrete step of the walk.

    ``K0`` is the combined coherent/survival operator, ``Gamma`` the matrix
    of squared jump amplitudes, ``decay`` its column sums and ``rates`` the
    underlying Google-matrix rates. ``unitary`` and ``sqrt_keep`` are the
    factors of K0, kept separately for the staged update mode.
    """

    K0: np.ndarray
    Gamma: np.ndarray
    decay: np.ndarray
    rates: np.ndarray
    unitary: np.ndarray = field(repr=False, default=None)
    sqrt_keep: np.ndarray = field(repr=False, default=None)

    @property
    def n(self) -> int:
        return self.Gamma.shape[0]

    def completeness_residual(self) -> float:
        """Max-abs deviation of ``K0^dag K0 + diag(decay)`` from identity."""
        lhs = self.K0.conj().T @ self.K0 + np.diag(self.decay)
        return float(np.abs(lhs - np.eye(self.n)).max())


def build_kraus(graph: FinancialGraph, params: QswParams) -> KrausSet:
    """Build the Kraus set for a graph and parameter choice.

    Fails if any column's total jump probability reaches 1, which means the
    time step is too coarse for the given rates.
    """
    G = graph.G
    gamma = -np.expm1(-params.omega * G * params.dt)  # 1 - exp(-w c dt)
    decay = gamma.sum(axis=0)
    if (decay >= 1.0).any():
        raise ParameterError(
            f"total jump probability per step reaches {decay.max():.3f} >= 1; "
            "time step too large; reduce dt")
    sqrt_keep = np.sqrt(1.0 - decay)
    unitary = hermitian_unitary(graph.H, (1.0 - params.omega) * params.dt)
    K0 = unitary * sqrt_keep[None, :]
    return KrausSet(K0=K0, Gamma=gamma, decay=decay, rates=G,
                    unitary=unitary, sqrt_keep=sqrt_keep)
