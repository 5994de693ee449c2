"""Exact quantum and classical dynamics of the Kerr oscillator under phase-space diffusion."""

from .algebra import KernelTable, ModelParams, classical_kernels, delta_n, gamma_n, lambda_n, zeta_n
from .cdynamics import CoefficientTable, classical_grid, classical_nmax, evolve_classical, expand_initial
from .errors import (
    ConfigError,
    DiffKerrError,
    GeometryError,
    ImaginaryResidueError,
    InvariantError,
    NegativityError,
    StabilityError,
    TruncationError,
    TruncationWarning,
)
from .fock import FockDensity, coherent_density, default_nmax, fidelity_coherent, purity
from .oracles import SdeConfig, ensemble_histogram, integrate_master, sde_ensemble
from .phasespace import (
    PhaseGrid,
    grid_integral,
    l1_distance,
    laguerre_assoc,
    negativity_volume,
    pi_mn,
    wigner_coherent_evolved,
    wigner_from_density,
)
from .qdynamics import evolution_nmax, evolve, master_rhs

__version__ = "0.1.0"
