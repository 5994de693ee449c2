"""Coefficient propagation shared by the quantum and classical solutions.

Both closed-form solutions have the same shape.  For a coefficient matrix
``c[m, n]`` in the ``|m><n|`` (or ``Pi_{m,n}``) basis and difference
``d = m - n``::

    c_t[m+l, n+l] = sum_{j,l} c[m+j, n+j]
                    * sqrt((m+j)! (n+j)! (m+l)! (n+l)!) / (m! n! l! j!)
                    * K_d**(l+j) * S_d**(m+n+1) * phase_d

with raising kernel ``K`` (gamma or v), scale kernel ``S`` (zeta or u) and a
per-difference phase (``exp(i g t d)`` quantum, 1 classical).  Differences are
never mixed, so every diagonal ``d`` is an independent linear map
``y = B.T @ (D * (B @ x))`` with ``B[p, r] = ratio(p, r) * K**(r - p)``.
"""

from __future__ import annotations

import numpy as np
from scipy.special import gammaln

__all__ = ["propagate", "diagonal_factors"]


def _log_ratio_matrix(a: int, size: int) -> np.ndarray:
    """``log( sqrt((r+a)! r! / ((p+a)! p!)) / (r-p)! )`` for ``r >= p``, else -inf."""
    idx = np.arange(size)
    lf = gammaln(np.arange(size + a) + 1.0)
    half = 0.5 * (lf[idx + a] + lf[idx])
    p = idx[:, None]
    r = idx[None, :]
    gap = r - p
    out = np.full((size, size), -np.inf)
    upper = gap >= 0
    out[upper] = (half[None, :] - half[:, None])[upper] - lf[gap[upper]]
    return out


def _powers(base: complex, count: int) -> np.ndarray:
    out = np.empty(count, dtype=complex)
    acc = 1.0 + 0.0j
    for k in range(count):
        out[k] = acc
        acc = acc * base
    return out


def diagonal_factors(a: int, size: int, raise_k: complex, scale_k: complex, phase: complex):
    """Return ``(B, D)`` so that one diagonal ``|d| = a`` maps as ``B.T @ (D * (B @ x))``."""
    logr = _log_ratio_matrix(a, size)
    kpow = _powers(raise_k, size)
    gap = np.subtract.outer(np.arange(size), np.arange(size)).T  # r - p
    upper = gap >= 0
    b = np.zeros((size, size), dtype=complex)
    b[upper] = np.exp(logr[upper]) * kpow[gap[upper]]
    spow = _powers(scale_k, 2 * size + a + 1)
    d = spow[2 * np.arange(size) + a + 1] * phase
    return b, d


def propagate(
    coeffs: np.ndarray,
    raise_k: np.ndarray,
    scale_k: np.ndarray,
    phase: np.ndarray,
    *,
    hermitian: bool = True,
) -> np.ndarray:
    """Apply the disentangled propagator to a coefficient matrix.

    Parameters
    ----------
    coeffs : ndarray, shape (N+1, N+1)
        Input coefficients ``c[m, n]``.
    raise_k, scale_k, phase : ndarray, shape (2N+1,)
        Per-difference kernels indexed ``[d + N]`` for ``d = m - n``.
    hermitian : bool
        Compute ``d >= 0`` only, fill ``d < 0`` by conjugation and keep the
        main diagonal real.  Pass False to evaluate every diagonal directly.

    Returns
    -------
    ndarray
        Propagated coefficients, all four sums truncated at ``N``.
    """
    coeffs = np.asarray(coeffs, dtype=complex)
    dim = coeffs.shape[0]
    nmax = dim - 1
    if coeffs.shape != (dim, dim):
        raise ValueError("coefficient matrix must be square")
    for arr in (raise_k, scale_k, phase):
        if len(arr) != 2 * nmax + 1:
            raise ValueError("kernel arrays must cover differences -N..N")

    out = np.zeros_like(coeffs)
    ds = range(0, nmax + 1) if hermitian else range(-nmax, nmax + 1)
    for d in ds:
        a = abs(d)
        size = dim - a
        x = np.diagonal(coeffs, offset=-d)
        b, dvec = diagonal_factors(a, size, raise_k[d + nmax], scale_k[d + nmax], phase[d + nmax])
        y = b.T @ (dvec * (b @ x))
        if hermitian and d == 0:
            y = y.real.astype(complex)
        rows = np.arange(size) + max(d, 0)
        cols = np.arange(size) + max(-d, 0)
        out[rows, cols] = y
        if hermitian and d > 0:
            out[cols, rows] = y.conj()
    return out
