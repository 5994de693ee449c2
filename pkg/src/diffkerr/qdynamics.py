"""Quantum diffusive Kerr oscillator: master-equation generator and exact propagator."""

from __future__ import annotations

import numpy as np

from .algebra import KernelTable, ModelParams, gamma_n, zeta_n
from .engine import diagonal_factors, propagate
from .errors import TruncationError
from .fock import FockDensity, coherent_amplitudes, default_nmax

__all__ = ["master_rhs", "evolve", "evolution_nmax", "population_tail", "TRACE_TOL", "EVOLVED_TAIL_TOL"]

TRACE_TOL = 1e-6
EVOLVED_TAIL_TOL = 1e-10


def master_rhs(state: FockDensity | np.ndarray, params: ModelParams) -> np.ndarray:
    """Generator applied to rho, elementwise.

    ``(drho/dt)[m,n] = -i g (m^2 - n^2) rho[m,n]
    + 2 kappa (sqrt((m+1)(n+1)) rho[m+1,n+1] + sqrt(mn) rho[m-1,n-1] - (m+n+1) rho[m,n])``

    Entries outside the truncation are zero, so population pushed above
    ``nmax`` is lost (the trace leaks by ``2 kappa (nmax+1) rho[nmax,nmax]``).
    """
    rho = state.rho if isinstance(state, FockDensity) else np.asarray(state, dtype=complex)
    dim = rho.shape[0]
    k = np.arange(dim, dtype=float)
    m = k[:, None]
    n = k[None, :]
    out = -1j * params.g * (m * m - n * n) * rho
    if params.kappa == 0.0:
        return out
    sq = np.sqrt(np.outer(k, k))
    jump = np.zeros_like(rho)
    # a rho a^dagger
    jump[:-1, :-1] += sq[1:, 1:] * rho[1:, 1:]
    # a^dagger rho a
    jump[1:, 1:] += sq[1:, 1:] * rho[:-1, :-1]
    out += 2.0 * params.kappa * (jump - (m + n + 1.0) * rho)
    return out


def evolve(
    state0: FockDensity,
    t: float,
    params: ModelParams,
    *,
    trace_tol: float = TRACE_TOL,
    hermitian: bool = True,
) -> FockDensity:
    """Exact density matrix at time ``t`` from the disentangled propagator.

    Every diagonal ``m - n = d`` evolves independently with kernels
    ``gamma_d``, ``zeta_d`` and phase ``exp(i g t d)``.  With ``hermitian``
    (default) only ``d >= 0`` is computed and the rest mirrored.

    Raises
    ------
    TruncationError
        If the truncated result loses more than ``trace_tol`` of the input trace.
    """
    if t < 0:
        raise ValueError(f"t must be non-negative, got {t}")
    table = KernelTable(params, t, state0.nmax)
    rho_t = propagate(
        state0.rho, table.gamma_arr, table.zeta_arr, table.quantum_phase(), hermitian=hermitian
    )
    out = FockDensity(rho_t)
    drift = abs(out.trace() - state0.trace())
    if drift > trace_tol:
        raise TruncationError(
            f"trace changed by {drift:.3e} (> {trace_tol:.1e}) at t={t:g}; increase nmax"
        )
    return out


def population_tail(alpha0: complex, t: float, params: ModelParams, nbig: int) -> np.ndarray:
    """Mass above level ``N`` of the evolved coherent state, for ``N = 0..nbig``.

    Populations only feel the ``d = 0`` kernels (no ``g`` dependence), so
    this costs one ``(nbig+1)^2`` matrix-vector product.  Mass pushed above
    ``nbig`` is counted in every entry.
    """
    x = np.abs(coherent_amplitudes(alpha0, nbig)) ** 2
    b, dvec = diagonal_factors(0, nbig + 1, gamma_n(0, t, params), zeta_n(0, t, params), 1.0)
    pops = np.real(b.T @ (dvec * (b @ x)))
    return np.maximum(1.0 - np.cumsum(pops), 0.0)


def evolution_nmax(
    alpha0: complex, t: float, params: ModelParams, tail_tol: float = EVOLVED_TAIL_TOL
) -> int:
    """Truncation adequate for a coherent state evolved up to time ``t``.

    Diffusion raises the mean photon number by ``2 kappa t`` and fattens the
    tail, so the initial-state policy :func:`default_nmax` is a lower bound
    only.  Returns the smallest ``N >= default_nmax(alpha0)`` whose evolved
    population tail is at most ``tail_tol``.
    """
    base = default_nmax(alpha0)
    nbig = 2 * base
    while True:
        tail = population_tail(alpha0, t, params, nbig)
        if tail[-1] <= 1e-2 * tail_tol:
            below = np.nonzero(tail <= tail_tol)[0]
            return max(base, int(below[0]))
        nbig *= 2
