"""c-number kernels of the disentangled su(1,1) propagator.

Both the quantum Liouvillian and the classical Fokker-Planck operator split
into a conserved "difference" generator (eigenvalue ``n = m - n'`` on
``|m><n'|`` or on the phase-space function ``Pi_{m,n'}``) times an su(1,1)
Lie exponential.  Ordering that exponential as raise * scale * lower gives
scalar kernels per difference ``n``:

quantum      gamma_n(t)  raising/lowering weight,  zeta_n(t)  scale factor
classical    v_n(t)      raising/lowering weight,  u_n(t)     scale factor

Conventions: hbar = 1; the pair (g, kappa) fixes the interaction-picture
dynamics, the oscillator frequency never enters.

All kernels are even functions of the square-root quantity (``Delta`` or
``s``), so the principal branch is used without loss of generality.  When the
hyperbolic argument is tiny the printed ratios are 0/0; they are evaluated
through a three-term Taylor series of ``sinh(z)/z`` and ``cosh(z)`` instead.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "ModelParams",
    "KernelTable",
    "lambda_n",
    "delta_n",
    "gamma_n",
    "zeta_n",
    "classical_kernels",
    "SMALL_ARG",
]

SMALL_ARG = 1e-6


@dataclass(frozen=True)
class ModelParams:
    """Nonlinearity ``g`` (rad per unit time) and diffusion ``kappa`` (1/time)."""

    g: float
    kappa: float

    def __post_init__(self):
        if not (np.isfinite(self.g) and np.isfinite(self.kappa)):
            raise ValueError("g and kappa must be finite")
        if self.g < 0 or self.kappa < 0:
            raise ValueError(f"g and kappa must be non-negative, got g={self.g}, kappa={self.kappa}")


def _scalarize(value, like):
    if np.ndim(like) == 0:
        return complex(value)
    return value


def lambda_n(n, params: ModelParams):
    """Eigenvalue ``i g n + 2 kappa`` of the Lambda super-operator."""
    n_arr = np.asarray(n, dtype=float)
    return _scalarize(1j * params.g * n_arr + 2.0 * params.kappa, n)


def delta_n(n, params: ModelParams):
    """Principal root of ``Lambda_n**2 - 4 kappa**2``.

    Downstream kernels are even in this root, so the branch is immaterial.
    """
    # expanded form avoids cancellation in (2 kappa)^2 - 4 kappa^2 at n = 0
    n_arr = np.asarray(n, dtype=float)
    radicand = -(params.g * n_arr) ** 2 + 4j * params.g * params.kappa * n_arr
    return _scalarize(np.sqrt(radicand.astype(complex)), n)


def _sinhc_cosh(z, t):
    """Three-term Taylor forms of ``t * sinh(z)/z`` and ``cosh(z)``."""
    z2 = z * z
    return t * (1.0 + z2 / 6.0 + z2 * z2 / 120.0), 1.0 + z2 / 2.0 + z2 * z2 / 24.0


def _su11_kernels(root, coef, numer, scale, t):
    """Shared evaluation of the two kernel shapes.

    With ``z = scale * root * t`` the kernels are::

        weight = numer * sinh(z) / (scale*root*cosh(z) + coef*sinh(z))
        factor = scale*root / (scale*root*cosh(z) + coef*sinh(z))

    ``scale`` is 1 for the quantum family (root = Delta) and 2 for the
    classical one (root = s, with the 4s = 2*(2s) prefactor absorbed below).
    """
    root = np.asarray(root, dtype=complex)
    coef = np.asarray(coef, dtype=complex)
    numer = np.asarray(numer, dtype=complex)
    root, coef, numer = np.broadcast_arrays(root, coef, numer)
    z = scale * root * t
    small = np.abs(z) < SMALL_ARG

    weight = np.empty(z.shape, dtype=complex)
    factor = np.empty(z.shape, dtype=complex)

    if np.any(small):
        # sinh(z)/(scale*root) = t * sinhc(z); everything divided by scale*root
        zs = z[small]
        s_over, c = _sinhc_cosh(zs, t)
        den = c + coef[small] * s_over
        weight[small] = numer[small] * s_over / den
        factor[small] = 1.0 / den

    big = ~small
    if np.any(big):
        zb = z[big]
        rb = scale * root[big]
        with np.errstate(over="ignore", invalid="ignore"):
            th = np.tanh(zb)
            sech = 1.0 / np.cosh(zb)
        # principal roots have Re >= 0, so cosh only overflows toward sech -> 0
        sech = np.where(np.isfinite(sech), sech, 0.0)
        den = rb + coef[big] * th
        weight[big] = numer[big] * th / den
        factor[big] = rb * sech / den
    return weight, factor


def _quantum_pair(n, t, params: ModelParams):
    if t < 0:
        raise ValueError(f"t must be non-negative, got {t}")
    n_arr = np.asarray(n, dtype=float)
    lam = 1j * params.g * n_arr + 2.0 * params.kappa
    delta = np.asarray(delta_n(n_arr, params), dtype=complex)
    return _su11_kernels(delta, lam, 2.0 * params.kappa * np.ones_like(lam), 1.0, t)


def gamma_n(n, t, params: ModelParams):
    """Raising/lowering weight ``2k sinh(Dt) / (D cosh(Dt) + L sinh(Dt))``."""
    weight, _ = _quantum_pair(n, t, params)
    return _scalarize(weight, n)


def zeta_n(n, t, params: ModelParams):
    """Scale factor ``D / (D cosh(Dt) + L sinh(Dt))``."""
    _, factor = _quantum_pair(n, t, params)
    return _scalarize(factor, n)


def classical_kernels(n, t, params: ModelParams):
    """Classical kernels ``(u_n(t), v_n(t))`` with ``s = sqrt(i g kappa n)``.

    ``u = 4s / (4s cosh(2ts) + (4k + ign) sinh(2ts))`` and
    ``v = (4k - ign) sinh(2ts) / (same denominator)``.
    """
    if t < 0:
        raise ValueError(f"t must be non-negative, got {t}")
    n_arr = np.asarray(n, dtype=float)
    s = np.sqrt((1j * params.g * params.kappa * n_arr).astype(complex))
    ign = 1j * params.g * n_arr
    # divide through by 2: (4s cosh + B sinh) = 2 * (2s cosh + (B/2) sinh), z = 2st
    weight, factor = _su11_kernels(
        s, (4.0 * params.kappa + ign) / 2.0, (4.0 * params.kappa - ign) / 2.0, 2.0, t
    )
    return _scalarize(factor, n), _scalarize(weight, n)


@dataclass(frozen=True, eq=False)
class KernelTable:
    """Quantum and classical kernels for differences ``-N..N`` at one time.

    Filled once at construction (single-threaded) and read-only afterwards.
    Index with :meth:`gamma`, :meth:`zeta`, :meth:`u`, :meth:`v` or through the
    offset arrays ``*_arr[n + N]``.
    """

    params: ModelParams
    t: float
    nmax: int
    gamma_arr: np.ndarray = field(init=False, repr=False)
    zeta_arr: np.ndarray = field(init=False, repr=False)
    u_arr: np.ndarray = field(init=False, repr=False)
    v_arr: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.nmax < 0:
            raise ValueError("nmax must be non-negative")
        ns = np.arange(-self.nmax, self.nmax + 1)
        g_arr, z_arr = _quantum_pair(ns, self.t, self.params)
        u_arr, v_arr = classical_kernels(ns, self.t, self.params)
        for name, arr in (("gamma_arr", g_arr), ("zeta_arr", z_arr), ("u_arr", u_arr), ("v_arr", v_arr)):
            arr = np.asarray(arr, dtype=complex)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def differences(self) -> np.ndarray:
        return np.arange(-self.nmax, self.nmax + 1)

    def _at(self, arr, n):
        if abs(n) > self.nmax:
            raise IndexError(f"difference {n} outside table range +-{self.nmax}")
        return complex(arr[n + self.nmax])

    def gamma(self, n: int) -> complex:
        return self._at(self.gamma_arr, n)

    def zeta(self, n: int) -> complex:
        return self._at(self.zeta_arr, n)

    def u(self, n: int) -> complex:
        return self._at(self.u_arr, n)

    def v(self, n: int) -> complex:
        return self._at(self.v_arr, n)

    def quantum_phase(self) -> np.ndarray:
        """Interaction-picture phase ``exp(i g t n)`` per difference."""
        return np.exp(1j * self.params.g * self.t * self.differences)
