"""Pure-NumPy evolution loop (fallback when the C kernel is unavailable).

Kept in lock-step with ``qsfolio._native._evolve``: the two implementations
run the same operation sequence so results agree to rounding error.
"""

from __future__ import annotations

import numpy as np

MODE_ALG = 0
MODE_EQ = 1


def evolve_to_stationary(unitary: np.ndarray, sqrt_keep: np.ndarray,
                         gamma: np.ndarray, rho0: np.ndarray, mode: int,
                         tol: float, max_iters: int):
    """Iterate the channel until the entrywise 1-norm step difference
    drops to ``tol`` or ``max_iters`` is hit.

    Returns ``(rho, iterations, converged, final_delta)``.
    """
    rho = np.array(rho0, dtype=complex)
    k0 = unitary * sqrt_keep[None, :]
    keep = np.outer(sqrt_keep, sqrt_keep)
    k0h = k0.conj().T
    uh = unitary.conj().T
    diag = np.diag_indices_from(rho)

    delta = np.inf
    for it in range(1, max_iters + 1):
        if mode == MODE_EQ:
            new = (k0 @ rho) @ k0h
            new[diag] += gamma @ rho[diag].real
        else:
            sigma = (unitary @ rho) @ uh
            new = sigma * keep
            new[diag] += gamma @ sigma[diag].real
            new /= np.trace(new).real
        delta = float(np.abs(new - rho).sum())
        rho = new
        if delta <= tol:
            return rho, it, True, delta
    return rho, max_iters, False, delta
