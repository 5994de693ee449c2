"""Truncated Fock-space density matrices."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammainc, gammaln

from .errors import InvariantError, TruncationError

__all__ = [
    "FockDensity",
    "coherent_amplitudes",
    "coherent_density",
    "default_nmax",
    "fidelity_coherent",
    "poisson_tail",
    "purity",
    "TAIL_TOL",
]

TAIL_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class FockDensity:
    """Density matrix ``rho[m, n] = <m|rho|n>`` on levels ``0..nmax``."""

    rho: np.ndarray

    def __post_init__(self):
        rho = np.array(self.rho, dtype=complex)
        if rho.ndim != 2 or rho.shape[0] != rho.shape[1] or rho.shape[0] == 0:
            raise ValueError(f"rho must be a non-empty square matrix, got shape {rho.shape}")
        rho.setflags(write=False)
        object.__setattr__(self, "rho", rho)

    @property
    def nmax(self) -> int:
        return self.rho.shape[0] - 1

    @property
    def dim(self) -> int:
        return self.rho.shape[0]

    def trace(self) -> complex:
        return complex(np.trace(self.rho))

    def populations(self) -> np.ndarray:
        return np.real(np.diagonal(self.rho)).copy()

    def hermiticity_residual(self) -> float:
        return float(np.max(np.abs(self.rho - self.rho.conj().T)))

    def mean_amplitude(self) -> complex:
        """``Tr(rho a)``."""
        m = np.arange(1, self.dim)
        return complex(np.sum(np.sqrt(m) * np.diagonal(self.rho, offset=-1)))

    def check(self, tol: float = 1e-12, diag_floor: float = -1e-10) -> None:
        """Raise :class:`InvariantError` unless rho is a valid truncated state."""
        herm = self.hermiticity_residual()
        if herm > tol:
            raise InvariantError(f"hermiticity residual {herm:.3e} exceeds {tol:.1e}")
        diag = np.diagonal(self.rho)
        if np.max(np.abs(diag.imag)) > tol:
            raise InvariantError("diagonal entries carry an imaginary part")
        if np.min(diag.real) < diag_floor:
            raise InvariantError(f"negative population {np.min(diag.real):.3e}")

    def padded(self, nmax: int) -> "FockDensity":
        """Embed into a larger truncation (zeros in the new rows/columns)."""
        if nmax < self.nmax:
            raise ValueError("padded() only enlarges the truncation")
        out = np.zeros((nmax + 1, nmax + 1), dtype=complex)
        out[: self.dim, : self.dim] = self.rho
        return FockDensity(out)


def poisson_tail(mean: float, nmax: int) -> float:
    """Poisson probability mass strictly above ``nmax``."""
    if mean == 0.0:
        return 0.0
    # P(N <= k) = Q(k+1, mean), so P(N > k) is the regularized lower gamma
    return float(gammainc(nmax + 1, mean))


def default_nmax(alpha0: complex) -> int:
    """Truncation ``ceil(|a|^2 + 8 sqrt(|a|^2 + 1)) + 4``."""
    mean = abs(alpha0) ** 2
    return int(math.ceil(mean + 8.0 * math.sqrt(mean + 1.0))) + 4


def coherent_amplitudes(alpha0: complex, nmax: int) -> np.ndarray:
    """Fock amplitudes ``exp(-|a|^2/2) a^m / sqrt(m!)`` for ``m = 0..nmax``."""
    m = np.arange(nmax + 1)
    r = abs(alpha0)
    if r == 0.0:
        out = np.zeros(nmax + 1, dtype=complex)
        out[0] = 1.0
        return out
    log_mag = m * math.log(r) - 0.5 * r * r - 0.5 * gammaln(m + 1)
    return np.exp(log_mag) * np.exp(1j * m * np.angle(alpha0))


def _require_tail(alpha: complex, nmax: int, tail_tol: float) -> None:
    tail = poisson_tail(abs(alpha) ** 2, nmax)
    if tail > tail_tol:
        raise TruncationError(
            f"nmax={nmax} too small for |alpha|={abs(alpha):.4g}: "
            f"Poisson tail {tail:.3e} exceeds {tail_tol:.1e}"
        )


def coherent_density(alpha0: complex, nmax: int, tail_tol: float = TAIL_TOL) -> FockDensity:
    """Truncated projector ``|alpha0><alpha0|``."""
    if nmax < 0:
        raise ValueError("nmax must be non-negative")
    _require_tail(alpha0, nmax, tail_tol)
    c = coherent_amplitudes(alpha0, nmax)
    return FockDensity(np.outer(c, c.conj()))


def fidelity_coherent(state: FockDensity, beta: complex, tail_tol: float = TAIL_TOL) -> float:
    """Overlap ``<beta|rho|beta>`` within the state's truncation."""
    _require_tail(beta, state.nmax, tail_tol)
    c = coherent_amplitudes(beta, state.nmax)
    return float(np.real(np.vdot(c, state.rho @ c)))


def purity(state: FockDensity) -> float:
    """``Tr(rho^2)``."""
    return float(np.real(np.einsum("ij,ji->", state.rho, state.rho)))
