"""Weyl-Wigner basis functions, grid rendering and phase-space metrics.

The basis function of ``|m><n|`` (hbar = 1, complex coordinate
``alpha = (Q + iP)/sqrt(2)``) is, for ``n >= m``::

    Pi_{m,n}(alpha) = (-1)^m / pi * sqrt(m!/n!) * exp(-2|alpha|^2)
                      * (2 alpha)^(n-m) * L_m^(n-m)(4|alpha|^2)

and ``Pi_{n,m} = conj(Pi_{m,n})``.  With this normalization a state's Wigner
function integrates to 1/2 over the alpha plane; ``normalization="standard"``
on the CLI doubles emitted values to unit mass.

Grid rendering does not call :func:`pi_mn` point by point.  For each
difference ``k = n - m`` it runs the Laguerre recurrence on the bounded
functions ``psi_m = e^{-x/2} x^{k/2} sqrt(m!/(m+k)!) L_m^k(x)`` (matrix
elements of a unitary, so ``|psi_m| <= 1``), starting from a log-domain seed.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

from .algebra import KernelTable, ModelParams
from .errors import GeometryError, ImaginaryResidueError
from .fock import FockDensity, default_nmax

__all__ = [
    "PhaseGrid",
    "laguerre_assoc",
    "pi_mn",
    "render_coefficients",
    "wigner_from_density",
    "coherent_series_coefficients",
    "wigner_coherent_evolved",
    "grid_integral",
    "negativity_volume",
    "l1_distance",
    "grid_moments",
    "angular_variance",
    "RESIDUE_TOL",
    "LOG_DOMAIN_X",
]

RESIDUE_TOL = 1e-9
LOG_DOMAIN_X = 60.0
CHUNK = 8192


@dataclass(frozen=True, eq=False)
class PhaseGrid:
    """Rectangular sampling of the alpha plane.

    ``values[i, j]`` sits at ``re_axis[i] + 1j * im_axis[j]``.
    """

    re_min: float
    re_max: float
    im_min: float
    im_max: float
    nx: int
    ny: int
    values: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        if self.nx < 2 or self.ny < 2:
            raise ValueError("grids need at least 2 samples per axis")
        if not (self.re_max > self.re_min and self.im_max > self.im_min):
            raise ValueError("grid bounds must satisfy min < max")
        vals = np.zeros((self.nx, self.ny)) if self.values is None else np.array(self.values, dtype=float)
        if vals.shape != (self.nx, self.ny):
            raise ValueError(f"values shape {vals.shape} != ({self.nx}, {self.ny})")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @classmethod
    def square(cls, radius: float, n: int = 301, center: complex = 0.0) -> "PhaseGrid":
        c = complex(center)
        return cls(c.real - radius, c.real + radius, c.imag - radius, c.imag + radius, n, n)

    @classmethod
    def default_for(cls, alpha0: complex, n: int = 301) -> "PhaseGrid":
        """Window ``|Re|, |Im| <= |alpha0| + 4`` around the origin."""
        return cls.square(abs(alpha0) + 4.0, n)

    @property
    def re_axis(self) -> np.ndarray:
        return np.linspace(self.re_min, self.re_max, self.nx)

    @property
    def im_axis(self) -> np.ndarray:
        return np.linspace(self.im_min, self.im_max, self.ny)

    @property
    def alpha(self) -> np.ndarray:
        re, im = np.meshgrid(self.re_axis, self.im_axis, indexing="ij")
        return re + 1j * im

    @property
    def cell_area(self) -> float:
        return ((self.re_max - self.re_min) / (self.nx - 1)) * ((self.im_max - self.im_min) / (self.ny - 1))

    def geometry(self) -> tuple:
        return (self.re_min, self.re_max, self.im_min, self.im_max, self.nx, self.ny)

    def same_geometry(self, other: "PhaseGrid") -> bool:
        return self.geometry() == other.geometry()

    def with_values(self, values: np.ndarray) -> "PhaseGrid":
        return PhaseGrid(*self.geometry(), values=values)


# ---------------------------------------------------------------------------
# special functions


def laguerre_assoc(m: int, a: int, x):
    """Associated Laguerre polynomial ``L_m^a(x)`` by upward recurrence in degree.

    ``(k+1) L_{k+1} = (2k + 1 + a - x) L_k - (k + a) L_{k-1}``
    """
    if m < 0 or a < 0:
        raise ValueError("m and a must be non-negative")
    x = np.asarray(x, dtype=float)
    prev = np.ones_like(x)
    if m == 0:
        return prev if x.ndim else float(prev)
    cur = 1.0 + a - x
    for k in range(1, m):
        prev, cur = cur, ((2 * k + 1 + a - x) * cur - (k + a) * prev) / (k + 1)
    return cur if x.ndim else float(cur)


def pi_mn(m: int, n: int, alpha):
    """Weyl-Wigner transform of ``|m><n|`` at ``alpha`` (scalar or array).

    Beyond ``4|alpha|^2 > 60`` the prefactor and the Laguerre value are
    combined as log-magnitudes with the sign carried separately.
    """
    if m < 0 or n < 0:
        raise ValueError("m and n must be non-negative")
    scalar = np.ndim(alpha) == 0
    alpha = np.atleast_1d(np.asarray(alpha, dtype=complex))
    lo, k = min(m, n), abs(n - m)
    x = 4.0 * np.abs(alpha) ** 2
    lag = np.atleast_1d(laguerre_assoc(lo, k, x))
    # arg of (2 alpha)^k for n >= m, of (2 alpha*)^k otherwise
    direction = 1.0 if n >= m else -1.0
    phase = np.exp(1j * direction * k * np.angle(alpha))
    half_log_fac = 0.5 * (gammaln(lo + 1) - gammaln(lo + k + 1))
    sign = (-1.0) ** lo / math.pi

    out = np.empty(alpha.shape, dtype=complex)
    direct = x <= LOG_DOMAIN_X
    if np.any(direct):
        xd = x[direct]
        out[direct] = (
            math.exp(half_log_fac) * np.exp(-xd / 2.0) * np.sqrt(xd) ** k * lag[direct] * phase[direct]
        )
    logd = ~direct
    if np.any(logd):
        xl = x[logd]
        with np.errstate(divide="ignore"):
            log_mag = half_log_fac - xl / 2.0 + 0.5 * k * np.log(xl) + np.log(np.abs(lag[logd]))
        out[logd] = np.sign(lag[logd]) * np.exp(log_mag) * phase[logd]
    out *= sign
    return complex(out[0]) if scalar else out


# ---------------------------------------------------------------------------
# rendering


def _recurrence_coefficients(k: int, count: int):
    m = np.arange(count, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        root = np.sqrt(m * (m + k))
        a = (2 * m - 1 + k) / root
        b = 1.0 / root
        c = np.sqrt((m - 1) * (m - 1 + k) / (m * (m + k)))
    c[:2] = 0.0
    return a, b, c


def _render_chunk(coeffs: np.ndarray, alpha: np.ndarray) -> np.ndarray:
    """``sum_{m,n} coeffs[m,n] Pi_{m,n}(alpha)`` for Hermitian ``coeffs`` (real result)."""
    dim = coeffs.shape[0]
    x = 4.0 * np.abs(alpha) ** 2
    with np.errstate(divide="ignore"):
        logx = np.log(x)
    unit = np.exp(1j * np.angle(alpha))
    rot = np.ones_like(unit)
    total = np.zeros(alpha.shape)
    rows = np.empty((dim, alpha.size))
    tmp = np.empty(alpha.size)
    tmp2 = np.empty(alpha.size)
    signs = (-1.0) ** np.arange(dim)
    for k in range(dim):
        count = dim - k
        diag = np.diagonal(coeffs, offset=k) * signs[:count]
        if k:
            rot = rot * unit
        if not np.any(diag):
            continue
        a, b, c = _recurrence_coefficients(k, count)
        with np.errstate(invalid="ignore"):
            seed = 0.5 * k * logx - 0.5 * x - 0.5 * gammaln(k + 1.0)
        if k == 0:
            seed = -0.5 * x
        np.exp(seed, out=rows[0])
        for m in range(1, count):
            np.multiply(x, -b[m], out=tmp)
            tmp += a[m]
            tmp *= rows[m - 1]
            if m >= 2:
                np.multiply(rows[m - 2], c[m], out=tmp2)
                tmp -= tmp2
            rows[m] = tmp
        radial_re = diag.real @ rows[:count]
        if k == 0:
            total += radial_re
        else:
            radial_im = diag.imag @ rows[:count]
            total += 2.0 * (rot.real * radial_re - rot.imag * radial_im)
    return total / math.pi


def render_coefficients(coeffs: np.ndarray, grid: PhaseGrid, *, workers: int = 1) -> np.ndarray:
    """Evaluate ``sum c[m,n] Pi_{m,n}`` on the grid, returned as a real array.

    Only the Hermitian part of ``coeffs`` is rendered; the anti-Hermitian part
    is what would survive as an imaginary residue (see :func:`_check_residue`).
    Points are processed in independent chunks, optionally on a thread pool.
    """
    coeffs = np.asarray(coeffs, dtype=complex)
    herm = 0.5 * (coeffs + coeffs.conj().T)
    flat = grid.alpha.ravel()
    chunks = [flat[i : i + CHUNK] for i in range(0, flat.size, CHUNK)]
    if workers > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda ch: _render_chunk(herm, ch), chunks))
    else:
        parts = [_render_chunk(herm, ch) for ch in chunks]
    return np.concatenate(parts).reshape(grid.nx, grid.ny)


def _check_residue(coeffs: np.ndarray, grid: PhaseGrid, tol: float, workers: int = 1) -> float:
    """Largest imaginary part the full (unfolded) sum would carry on the grid."""
    anti = (coeffs - coeffs.conj().T) / 2j
    # |Pi_{m,n}| <= 1/pi, so this bounds the residue without rendering it
    bound = float(np.sum(np.abs(anti))) / math.pi
    if bound <= tol:
        return bound
    residue = float(np.max(np.abs(render_coefficients(anti, grid, workers=workers))))
    if residue > tol:
        raise ImaginaryResidueError(f"imaginary residue {residue:.3e} exceeds {tol:.1e}")
    return residue


def wigner_from_density(
    state: FockDensity, grid: PhaseGrid, *, tol: float = RESIDUE_TOL, workers: int = 1
) -> PhaseGrid:
    """Wigner function ``sum rho[m,n] Pi_{m,n}`` of a truncated state."""
    _check_residue(state.rho, grid, tol, workers)
    return grid.with_values(render_coefficients(state.rho, grid, workers=workers))


def coherent_series_coefficients(
    alpha0: complex,
    t: float,
    params: ModelParams,
    nmax: int | None = None,
    *,
    family: str = "quantum",
) -> np.ndarray:
    """Basis coefficients of an evolved coherent state with the ``j`` sum done in closed form.

    For ``rho(0) = |alpha0><alpha0|`` the inner sum collapses to
    ``exp(|alpha0|^2 K_d)``, leaving::

        c[m+l, n+l] = e^{-|a|^2} a^m conj(a)^n / (m! n! l!) sqrt((m+l)! (n+l)!)
                      * K_d^l S_d^(m+n+1) exp(|a|^2 K_d) phase_d

    with ``(K, S, phase) = (gamma, zeta, e^{igtd})`` for ``family="quantum"``
    and ``(v, u, 1)`` for ``family="classical"``.
    """
    if nmax is None:
        nmax = default_nmax(alpha0)
    table = KernelTable(params, t, nmax)
    if family == "quantum":
        raise_k, scale_k, phases = table.gamma_arr, table.zeta_arr, table.quantum_phase()
    elif family == "classical":
        raise_k, scale_k, phases = table.v_arr, table.u_arr, np.ones(2 * nmax + 1, dtype=complex)
    else:
        raise ValueError(f"unknown kernel family {family!r}")

    r0 = abs(alpha0)
    log_r0 = math.log(r0) if r0 > 0 else -math.inf
    arg0 = float(np.angle(alpha0))
    lf = gammaln(np.arange(2 * nmax + 2) + 1.0)
    out = np.zeros((nmax + 1, nmax + 1), dtype=complex)
    for d in range(nmax + 1):
        size = nmax + 1 - d
        kd, sd, ph = raise_k[d + nmax], scale_k[d + nmax], phases[d + nmax]
        q = np.arange(size)[:, None]
        l = np.arange(size)[None, :]
        valid = l <= q
        lv = np.where(valid, l, 0)
        n = q - lv
        m = n + d
        tot = m + n
        with np.errstate(divide="ignore", invalid="ignore"):
            log_k = math.log(abs(kd)) if kd != 0 else -math.inf
            log_s = math.log(abs(sd)) if sd != 0 else -math.inf
            amp_pow = np.where(tot == 0, 0.0, tot * log_r0)
            k_pow = np.where(lv == 0, 0.0, lv * log_k)
            log_mag = (
                -r0 * r0
                + amp_pow
                - lf[m]
                - lf[n]
                - lf[lv]
                + 0.5 * (lf[m + lv] + lf[n + lv])
                + k_pow
                + (tot + 1) * log_s
                + r0 * r0 * kd.real
            )
            phase = d * arg0 + lv * np.angle(kd) + (tot + 1) * np.angle(sd) + r0 * r0 * kd.imag
        terms = np.where(valid, np.exp(log_mag) * np.exp(1j * phase), 0.0)
        col = terms.sum(axis=1) * ph
        rows = np.arange(size) + d
        cols = np.arange(size)
        out[rows, cols] = col
        if d:
            out[cols, rows] = col.conj()
    return out


def wigner_coherent_evolved(
    alpha0: complex,
    t: float,
    params: ModelParams,
    grid: PhaseGrid,
    nmax: int | None = None,
    *,
    tol: float = RESIDUE_TOL,
    workers: int = 1,
) -> PhaseGrid:
    """Wigner function of ``|alpha0>`` evolved to ``t``, straight from the coherent-state series."""
    coeffs = coherent_series_coefficients(alpha0, t, params, nmax, family="quantum")
    _check_residue(coeffs, grid, tol, workers)
    return grid.with_values(render_coefficients(coeffs, grid, workers=workers))


# ---------------------------------------------------------------------------
# metrics


def grid_integral(grid: PhaseGrid) -> float:
    return float(np.sum(grid.values) * grid.cell_area)


def negativity_volume(grid: PhaseGrid) -> float:
    """Integrated negative part of the sampled distribution."""
    return float(np.sum(np.maximum(0.0, -grid.values)) * grid.cell_area)


def l1_distance(a: PhaseGrid, b: PhaseGrid) -> float:
    if not a.same_geometry(b):
        raise GeometryError(f"grid geometries differ: {a.geometry()} vs {b.geometry()}")
    return float(np.sum(np.abs(a.values - b.values)) * a.cell_area)


def grid_moments(grid: PhaseGrid) -> dict:
    """Mass-normalized ``<Re a>``, ``<Im a>``, ``<|a|^2>`` of the sampled distribution."""
    alpha = grid.alpha
    w = grid.values
    mass = np.sum(w)
    return {
        "mass": float(mass * grid.cell_area),
        "mean_re": float(np.sum(alpha.real * w) / mass),
        "mean_im": float(np.sum(alpha.imag * w) / mass),
        "mean_abs2": float(np.sum(np.abs(alpha) ** 2 * w) / mass),
    }


def angular_variance(grid: PhaseGrid, bin_width: float | None = None, min_count: int = 16) -> float:
    """Count-weighted mean, over annuli of fixed ``|alpha|``, of the variance of grid values.

    Zero for a rotationally symmetric distribution; large for spiral or
    fringe structure.
    """
    r = np.abs(grid.alpha).ravel()
    vals = grid.values.ravel()
    if bin_width is None:
        bin_width = (grid.re_max - grid.re_min) / (grid.nx - 1)
    # restrict to annuli fully inside the window
    rmax = min(abs(grid.re_min), abs(grid.re_max), abs(grid.im_min), abs(grid.im_max))
    keep = r < rmax
    idx = (r[keep] / bin_width).astype(int)
    v = vals[keep]
    counts = np.bincount(idx)
    sums = np.bincount(idx, weights=v)
    sq = np.bincount(idx, weights=v * v)
    ok = counts >= min_count
    mean = sums[ok] / counts[ok]
    var = np.maximum(sq[ok] / counts[ok] - mean * mean, 0.0)
    return float(np.sum(var * counts[ok]) / np.sum(counts[ok]))
