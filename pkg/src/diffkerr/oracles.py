"""Brute-force reference solvers: RK4 on the master equation, Monte Carlo of the Langevin process."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .algebra import ModelParams
from .errors import ConfigError, StabilityError
from .fock import FockDensity
from .phasespace import PhaseGrid
from .qdynamics import master_rhs

__all__ = [
    "stability_bound",
    "integrate_master",
    "SdeConfig",
    "sde_ensemble",
    "ensemble_histogram",
    "histogram_l1_bound",
    "BLOCK_SIZE",
    "RNG_ALGORITHM",
]

BLOCK_SIZE = 4096
RNG_ALGORITHM = "Philox4x64-10"
_TINY = 1e-300


def stability_bound(params: ModelParams, nmax: int) -> float:
    """Largest accepted RK4 step, ``1 / max(g nmax^2, kappa nmax)``."""
    return 1.0 / max(params.g * nmax * nmax, params.kappa * nmax, _TINY)


def integrate_master(
    state0: FockDensity, t: float, params: ModelParams, dt: float | None = None
) -> FockDensity:
    """Classic fourth-order Runge-Kutta on :func:`master_rhs` from 0 to ``t``.

    The step is fixed; the last one is shortened to land on ``t``.  The default
    ``dt`` is ``min(1e-3, stability_bound)``.

    Raises
    ------
    StabilityError
        If ``dt`` exceeds :func:`stability_bound`.
    """
    if t < 0:
        raise ValueError(f"t must be non-negative, got {t}")
    bound = stability_bound(params, state0.nmax)
    if dt is None:
        dt = min(1e-3, bound)
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    if dt > bound:
        raise StabilityError(f"dt={dt:g} exceeds the RK4 stability bound {bound:.3e} at nmax={state0.nmax}")

    rho = state0.rho.copy()
    nsteps = int(math.floor(t / dt))
    last = t - nsteps * dt
    # avoid a degenerate sliver step from rounding
    if last < 1e-12 * dt:
        last = 0.0
    steps = [dt] * nsteps + ([last] if last > 0 else [])
    for h in steps:
        k1 = master_rhs(rho, params)
        k2 = master_rhs(rho + 0.5 * h * k1, params)
        k3 = master_rhs(rho + 0.5 * h * k2, params)
        k4 = master_rhs(rho + h * k3, params)
        rho = rho + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return FockDensity(rho)


@dataclass(frozen=True)
class SdeConfig:
    """Monte Carlo settings.

    Attributes
    ----------
    ntraj : int
        Number of trajectories.
    dt : float
        Time step.
    seed : int
        Root seed, 0 <= seed < 2**64.
    scheme : str
        ``"split"`` rotates each point exactly by its drift angle then adds
        the noise increment; ``"euler"`` is the plain Euler-Maruyama update.
    """

    ntraj: int
    dt: float
    seed: int = 0
    scheme: str = "split"

    def __post_init__(self):
        if int(self.ntraj) != self.ntraj or self.ntraj < 1:
            raise ConfigError(f"ntraj must be a positive integer, got {self.ntraj}")
        if not (math.isfinite(self.dt) and self.dt > 0):
            raise ConfigError(f"dt must be positive, got {self.dt}")
        if int(self.seed) != self.seed or not 0 <= self.seed < 2**64:
            raise ConfigError(f"seed must be an integer in [0, 2**64), got {self.seed}")
        if self.scheme not in ("split", "euler"):
            raise ConfigError(f"unknown scheme {self.scheme!r}")

    @classmethod
    def for_params(cls, params: ModelParams, ntraj: int = 100_000, seed: int = 0) -> "SdeConfig":
        """Default step ``1e-3 / g`` (``1e-3`` when ``g = 0``)."""
        dt = 1e-3 / params.g if params.g > 0 else 1e-3
        return cls(ntraj=ntraj, dt=dt, seed=seed)


def _block_generator(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy=seed, spawn_key=(block,))))


def _run_block(alpha0: complex, t: float, params: ModelParams, cfg: SdeConfig, block: int, size: int):
    rng = _block_generator(cfg.seed, block)
    noise = rng.standard_normal((2, size))
    a = np.full(size, complex(alpha0))
    a.real += 0.5 * noise[0]
    a.imag += 0.5 * noise[1]

    nsteps = int(math.floor(t / cfg.dt))
    last = t - nsteps * cfg.dt
    steps = [cfg.dt] * nsteps + ([last] if last > 1e-12 * cfg.dt else [])
    g, kappa = params.g, params.kappa
    for h in steps:
        r2 = a.real * a.real + a.imag * a.imag
        if g:
            if cfg.scheme == "split":
                a *= np.exp(-2j * g * h * r2)
            else:
                a += -2j * g * h * r2 * a
        if kappa:
            rng.standard_normal(out=noise)
            scale = math.sqrt(kappa * h)
            a.real += scale * noise[0]
            a.imag += scale * noise[1]
    return a


def sde_ensemble(
    alpha0: complex, t: float, params: ModelParams, cfg: SdeConfig, *, workers: int = 1
) -> np.ndarray:
    """Final points of ``d alpha = -2ig|alpha|^2 alpha dt + sqrt(kappa) (dW1 + i dW2)``.

    Initial points are drawn from ``(1/pi) exp(-2|alpha - alpha0|^2)``
    (standard deviation 1/2 per coordinate).  Trajectories are grouped in
    blocks of :data:`BLOCK_SIZE`; block ``b`` draws from a Philox stream seeded
    with ``SeedSequence(seed, spawn_key=(b,))``, so output is identical for
    any ``workers``.
    """
    if t < 0:
        raise ValueError(f"t must be non-negative, got {t}")
    nblocks = -(-cfg.ntraj // BLOCK_SIZE)
    sizes = [min(BLOCK_SIZE, cfg.ntraj - b * BLOCK_SIZE) for b in range(nblocks)]

    def job(b):
        return _run_block(alpha0, t, params, cfg, b, sizes[b])

    if workers > 1 and nblocks > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(job, range(nblocks)))
    else:
        parts = [job(b) for b in range(nblocks)]
    return np.concatenate(parts)


def ensemble_histogram(points: np.ndarray, grid: PhaseGrid) -> PhaseGrid:
    """Bin points into cells centred on the grid nodes, scaled to integrate to 1/2.

    Points outside the window are dropped before normalizing.
    """
    points = np.asarray(points, dtype=complex).ravel()
    hx = (grid.re_max - grid.re_min) / (grid.nx - 1)
    hy = (grid.im_max - grid.im_min) / (grid.ny - 1)
    ex = grid.re_min - 0.5 * hx + hx * np.arange(grid.nx + 1)
    ey = grid.im_min - 0.5 * hy + hy * np.arange(grid.ny + 1)
    counts, _, _ = np.histogram2d(points.real, points.imag, bins=[ex, ey])
    total = counts.sum()
    if total == 0:
        return grid.with_values(np.zeros((grid.nx, grid.ny)))
    return grid.with_values(0.5 * counts / (total * grid.cell_area))


def histogram_l1_bound(reference: PhaseGrid, npoints: int) -> float:
    """Expected L1 gap between a histogram of ``npoints`` samples and ``reference``.

    Sum of the mean absolute counting error per cell, ``sqrt(2 N p / pi)``,
    and the cell-average versus node-value error, ``h^2 / 24 * |laplacian|``,
    both in the mass-1/2 convention.
    """
    w = np.maximum(reference.values, 0.0)
    area = reference.cell_area
    mass = float(w.sum() * area)
    if mass <= 0 or npoints < 1:
        return 0.0
    prob = w * area / mass
    sampling = 0.5 * float(np.sum(np.sqrt(2.0 * prob / (math.pi * npoints))))
    hx = (reference.re_max - reference.re_min) / (reference.nx - 1)
    hy = (reference.im_max - reference.im_min) / (reference.ny - 1)
    v = reference.values
    dxx = np.zeros_like(v)
    dyy = np.zeros_like(v)
    dxx[1:-1, :] = (v[2:, :] - 2 * v[1:-1, :] + v[:-2, :]) / hx**2
    dyy[:, 1:-1] = (v[:, 2:] - 2 * v[:, 1:-1] + v[:, :-2]) / hy**2
    binning = float(np.sum(np.abs(hx * hx * dxx + hy * hy * dyy)) / 24.0 * area)
    return sampling + binning
