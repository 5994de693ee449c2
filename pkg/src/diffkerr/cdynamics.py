"""Classical drift-diffusion of a phase-space density in the Pi_{m,n} basis.

The classical generator shares its eigenbasis with the quantum one, so a
valid initial density ``w = sum c[m,n] Pi_{m,n}`` evolves by the same
coefficient map as the density matrix, with kernels ``(v_d, u_d)`` in place
of ``(gamma_d, zeta_d)`` and no per-difference phase.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .algebra import KernelTable, ModelParams
from .engine import propagate
from .errors import NegativityError, TruncationError, TruncationWarning
from .fock import FockDensity
from .phasespace import (
    PhaseGrid,
    _check_residue,
    coherent_series_coefficients,
    render_coefficients,
    RESIDUE_TOL,
)
from .qdynamics import evolution_nmax

__all__ = [
    "CoefficientTable",
    "expand_initial",
    "evolve_classical",
    "classical_grid",
    "classical_nmax",
    "MASS_TOL",
    "NEGATIVITY_TOL",
    "POSITIVITY_RATIO",
    "CLASSICAL_TAIL_TOL",
    "CLASSICAL_NMAX_CAP",
]

MASS_TOL = 1e-6
NEGATIVITY_TOL = 1e-9
POSITIVITY_RATIO = 1e-6
CLASSICAL_TAIL_TOL = 1e-6
CLASSICAL_NMAX_CAP = 240


@dataclass(frozen=True, eq=False)
class CoefficientTable:
    """Coefficients ``c[m, n]`` of ``w = sum c[m,n] Pi_{m,n}``; Hermitian for a real ``w``."""

    c: np.ndarray

    def __post_init__(self):
        c = np.array(self.c, dtype=complex)
        if c.ndim != 2 or c.shape[0] != c.shape[1]:
            raise ValueError(f"coefficients must be square, got shape {c.shape}")
        c.setflags(write=False)
        object.__setattr__(self, "c", c)

    @property
    def nmax(self) -> int:
        return self.c.shape[0] - 1

    def mass(self) -> float:
        """``sum c[m,m]``; the rendered density integrates to half of this."""
        return float(np.real(np.trace(self.c)))

    def hermiticity_residual(self) -> float:
        return float(np.max(np.abs(self.c - self.c.conj().T)))


def _scan_window(state: FockDensity) -> PhaseGrid:
    mean_n = float(np.sum(np.arange(state.dim) * state.populations()))
    return PhaseGrid.square(math.sqrt(max(mean_n, 0.0)) + 4.0, 301)


def expand_initial(
    state0: FockDensity, grid: PhaseGrid | None = None, *, tol: float = NEGATIVITY_TOL
) -> CoefficientTable:
    """Take a state's Wigner function as the initial classical density.

    The coefficients are the density-matrix elements themselves.  The state is
    accepted only if its Wigner function is non-negative on ``grid`` (default:
    square window of radius ``sqrt(<n>) + 4``, 301 points per axis), allowing
    ``tol`` plus the error a truncated tail of weight ``tau = 1 - Tr rho`` can
    introduce, ``(2 sqrt(tau) + tau) / pi``.

    Raises
    ------
    NegativityError
        If the scan finds a value below the allowance.
    """
    if grid is None:
        grid = _scan_window(state0)
    _check_residue(state0.rho, grid, RESIDUE_TOL)
    values = render_coefficients(state0.rho, grid)
    tau = max(0.0, 1.0 - state0.trace().real)
    allowance = tol + (2.0 * math.sqrt(tau) + tau) / math.pi
    worst = float(values.min())
    if worst < -allowance:
        raise NegativityError(
            f"initial Wigner function reaches {worst:.3e} (< -{allowance:.1e}); "
            "not a valid classical distribution"
        )
    return CoefficientTable(state0.rho)


def evolve_classical(
    coeffs0: CoefficientTable, t: float, params: ModelParams, *, mass_tol: float = MASS_TOL
) -> CoefficientTable:
    """Propagate coefficients with the classical kernels ``(v_d, u_d)``.

    Raises
    ------
    TruncationError
        If ``sum c[m,m]`` drifts by more than ``mass_tol``.
    """
    if t < 0:
        raise ValueError(f"t must be non-negative, got {t}")
    table = KernelTable(params, t, coeffs0.nmax)
    ones = np.ones(2 * coeffs0.nmax + 1, dtype=complex)
    out = CoefficientTable(propagate(coeffs0.c, table.v_arr, table.u_arr, ones))
    drift = abs(out.mass() - coeffs0.mass())
    if drift > mass_tol:
        raise TruncationError(
            f"classical mass changed by {drift:.3e} (> {mass_tol:.1e}) at t={t:g}; increase nmax"
        )
    return out


def classical_grid(
    coeffs: CoefficientTable,
    grid: PhaseGrid,
    *,
    tol: float = RESIDUE_TOL,
    workers: int = 1,
) -> PhaseGrid:
    """Render ``w`` on the grid.

    Exact evolution keeps ``w >= 0``; values below ``-1e-6 * max(w)`` are
    reported with a :class:`TruncationWarning`.
    """
    _check_residue(coeffs.c, grid, tol, workers)
    values = render_coefficients(coeffs.c, grid, workers=workers)
    lo, hi = float(values.min()), float(values.max())
    if lo < -POSITIVITY_RATIO * hi:
        warnings.warn(
            f"classical density reaches {lo:.3e} against max {hi:.3e}; truncation too small",
            TruncationWarning,
            stacklevel=2,
        )
    return grid.with_values(values)


def _coefficient_tail(alpha0: complex, t: float, params: ModelParams, nmax: int) -> float:
    # Coefficients of the evolved coherent state are available in closed form,
    # so the part beyond nmax can be measured (up to 2 nmax).  |Pi| <= 1/pi.
    c = np.abs(coherent_series_coefficients(alpha0, t, params, 2 * nmax, family="classical"))
    return float(c.sum() - c[: nmax + 1, : nmax + 1].sum()) / math.pi


def classical_nmax(
    alpha0: complex,
    t: float,
    params: ModelParams,
    tail_tol: float = CLASSICAL_TAIL_TOL,
    cap: int = CLASSICAL_NMAX_CAP,
) -> int:
    """Truncation for an evolved coherent input, bounding the pointwise rendering error.

    Starts from :func:`evolution_nmax` and grows by half until the discarded
    coefficients can move any grid value by at most ``tail_tol``.

    Raises
    ------
    TruncationError
        If the bound stops shrinking or ``cap`` is exceeded.  This happens for
        ``kappa = 0`` once the spiral winds tightly: ``|v_d| -> 1`` and the
        expansion spreads over arbitrarily high levels.
    """
    nmax = evolution_nmax(alpha0, t, params)
    prev = math.inf
    while nmax <= cap:
        tail = _coefficient_tail(alpha0, t, params, nmax)
        if tail <= tail_tol:
            return nmax
        if tail >= prev:
            break
        prev = tail
        nmax = int(math.ceil(1.5 * nmax))
    raise TruncationError(
        f"classical expansion for |alpha0|={abs(alpha0):.4g}, t={t:g}, kappa={params.kappa:g} "
        f"does not reach pointwise tail {tail_tol:.0e} within nmax={cap}"
    )
