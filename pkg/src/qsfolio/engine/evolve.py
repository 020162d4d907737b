"""Evolution of the density matrix to its stationary state.

Two update modes are provided. ``eq`` applies the operator-sum step
directly: coherent/survival conjugation plus the jump influx computed from
the pre-step diagonal. ``alg`` stages the same physics the way the
iterative procedure is usually written: first the coherent rotation, then
the survival damping and jump influx computed from the post-rotation
diagonal, followed by a trace renormalization (a no-op up to rounding,
since both stages preserve the trace exactly). The modes differ at
O(dt^2) for intermediate mixing and coincide in the classical limit.

The hot loop is dispatched to a compiled kernel when available; set
``QSFOLIO_FORCE_NUMPY=1`` to force the pure-NumPy fallback.
"""

from __future__ import annotations

import os
import warnings
from dataclasses import dataclass

import numpy as np

from ..errors import ParameterError
from ..graph import FinancialGraph, QswParams
from . import _loops
from .kraus import KrausSet, build_kraus

try:  # pragma: no cover - exercised only when the extension is present
    from .._native import _evolve as _native
except ImportError:  # pragma: no cover
    _native = None

__all__ = [
    "DensityMatrix",
    "StationaryResult",
    "active_backend",
    "evolve_step",
    "extract_weights",
    "run_to_stationary",
]

_MODES = {"alg": _loops.MODE_ALG, "eq": _loops.MODE_EQ}

# negative diagonal mass beyond this is treated as an invalid state rather
# than rounding dust
_PSD_TOL = 1e-8


def active_backend() -> str:
    """Name of the evolution-loop backend in use: ``native`` or ``numpy``."""
    if _native is None or os.environ.get("QSFOLIO_FORCE_NUMPY", "") not in ("", "0"):
        return "numpy"
    return "native"


def _loop_impl(backend: str | None):
    name = backend or active_backend()
    if name == "native":
        if _native is None:
            raise ParameterError("native backend requested but not built")
        return _native.evolve_to_stationary
    if name == "numpy":
        return _loops.evolve_to_stationary
    raise ParameterError(f"unknown backend {name!r}")


@dataclass(frozen=True)
class DensityMatrix:
    """Complex Hermitian, unit-trace, PSD state of the walk."""

    rho: np.ndarray

    def __post_init__(self):
        rho = np.asarray(self.rho, dtype=complex)
        if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
            raise ParameterError("density matrix must be square")
        object.__setattr__(self, "rho", rho)

    @classmethod
    def maximally_mixed(cls, n: int) -> "DensityMatrix":
        return cls(np.eye(n, dtype=complex) / n)

    @property
    def n(self) -> int:
        return self.rho.shape[0]

    def hermiticity_error(self) -> float:
        return float(np.abs(self.rho - self.rho.conj().T).max())

    def trace_error(self) -> float:
        return abs(float(np.trace(self.rho).real) - 1.0)

    def min_eigenvalue(self) -> float:
        herm = (self.rho + self.rho.conj().T) / 2.0
        return float(np.linalg.eigvalsh(herm)[0])

    def validate(self, herm_tol: float = 1e-10, trace_tol: float = 1e-10,
                 psd_tol: float = _PSD_TOL) -> None:
        if self.hermiticity_error() > herm_tol:
            raise ParameterError("density matrix is not Hermitian")
        if self.trace_error() > trace_tol:
            raise ParameterError("density matrix trace differs from 1")
        if self.min_eigenvalue() < -psd_tol:
            raise ParameterError("density matrix has a negative eigenvalue")


@dataclass(frozen=True)
class StationaryResult:
    """Outcome of an evolution run."""

    rho_inf: DensityMatrix
    weights: np.ndarray
    iterations: int
    converged: bool
    final_delta: float


def evolve_step(rho: DensityMatrix, kraus: KrausSet,
                mode: str = "alg") -> DensityMatrix:
    """One discrete step of the walk in the requested update mode."""
    if mode not in _MODES:
        raise ParameterError(f"unknown update mode {mode!r}")
    state = rho.rho
    if not np.isfinite(state.view(float)).all():
        raise ParameterError("density matrix contains non-finite entries")
    diag = np.diag_indices(kraus.n)
    if mode == "eq":
        new = (kraus.K0 @ state) @ kraus.K0.conj().T
        new[diag] += kraus.Gamma @ state[diag].real
    else:
        u = kraus.unitary
        sigma = (u @ state) @ u.conj().T
        new = sigma * np.outer(kraus.sqrt_keep, kraus.sqrt_keep)
        new[diag] += kraus.Gamma @ sigma[diag].real
        new /= np.trace(new).real
    return DensityMatrix(new)


def extract_weights(rho: DensityMatrix) -> np.ndarray:
    """Portfolio weights from the diagonal: clamp negative rounding dust
    to zero and renormalize onto the simplex."""
    w = rho.rho.diagonal().real.copy()
    if w.min() < -_PSD_TOL:
        raise ParameterError("diagonal entry below the PSD tolerance; "
                             "state is not a valid density matrix")
    w[w < 0.0] = 0.0
    total = w.sum()
    if total <= 0.0:
        raise ParameterError("non-positive total diagonal mass")
    return w / total


def run_to_stationary(graph: FinancialGraph, params: QswParams,
                      rho0: DensityMatrix | None = None,
                      backend: str | None = None,
                      trace_path=None) -> StationaryResult:
    """Evolve from the maximally mixed state until the step difference
    (entrywise 1-norm) drops below ``params.tol``.

    Non-convergence within ``params.max_iters`` is reported through the
    ``converged`` flag, not raised. A unique stationary state exists for
    any ``omega > 0``; ``omega = 0`` is allowed for unitary-limit tests but
    generally never converges. ``trace_path`` switches to an instrumented
    NumPy loop that logs per-iteration diagnostics as CSV.
    """
    if params.omega == 0.0:
        warnings.warn("omega=0 is purely coherent: no stationary state is "
                      "guaranteed and the run will typically not converge",
                      stacklevel=2)
    kraus = build_kraus(graph, params)
    start = DensityMatrix.maximally_mixed(graph.n) if rho0 is None else rho0
    mode = _MODES[params.update_mode]

    if trace_path is not None:
        rho, iters, converged, delta = _traced_loop(
            kraus, start.rho, mode, params.tol, params.max_iters, trace_path)
    else:
        impl = _loop_impl(backend)
        rho, iters, converged, delta = impl(
            kraus.unitary, kraus.sqrt_keep, kraus.Gamma, start.rho,
            mode, params.tol, params.max_iters)

    final = DensityMatrix(rho)
    return StationaryResult(rho_inf=final, weights=extract_weights(final),
                            iterations=iters, converged=converged,
                            final_delta=float(delta))


def _traced_loop(kraus: KrausSet, rho0: np.ndarray, mode: int, tol: float,
                 max_iters: int, trace_path):
    """Diagnostic loop logging iteration, delta, trace and min eigenvalue."""
    mode_name = "eq" if mode == _loops.MODE_EQ else "alg"
    state = DensityMatrix(rho0)
    delta = np.inf
    converged = False
    it = 0
    with open(trace_path, "w", encoding="utf-8") as fh:
        fh.write("iteration,delta,trace,min_eigenvalue\n")
        for it in range(1, max_iters + 1):
            new = evolve_step(state, kraus, mode_name)
            delta = float(np.abs(new.rho - state.rho).sum())
            state = new
            fh.write(f"{it},{delta!r},{float(np.trace(state.rho).real)!r},"
                     f"{state.min_eigenvalue()!r}\n")
            if delta <= tol:
                converged = True
                break
    return state.rho, it, converged, delta
