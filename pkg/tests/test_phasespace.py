import math
import warnings
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from diffkerr.algebra import ModelParams
from diffkerr.errors import GeometryError, ImaginaryResidueError
from diffkerr.fock import FockDensity, coherent_density, default_nmax
from diffkerr.phasespace import (
    PhaseGrid,
    angular_variance,
    coherent_series_coefficients,
    grid_integral,
    grid_moments,
    l1_distance,
    laguerre_assoc,
    negativity_volume,
    pi_mn,
    render_coefficients,
    wigner_coherent_evolved,
    wigner_from_density,
)
from diffkerr.qdynamics import evolution_nmax, evolve

from conftest import as_complex

G = 0.1


def gaussian(grid, center):
    return np.exp(-2 * np.abs(grid.alpha - center) ** 2) / math.pi


def fock_state(k, nmax):
    rho = np.zeros((nmax + 1, nmax + 1))
    rho[k, k] = 1
    return FockDensity(rho)


class TestSpecialFunctions:
    def test_laguerre_low_orders(self):
        assert laguerre_assoc(0, 3, 2.2) == 1
        assert laguerre_assoc(1, 3, 2.2) == pytest.approx(1 + 3 - 2.2)
        assert np.allclose(laguerre_assoc(1, 2, np.array([0.0, 1.0])), [3.0, 2.0])

    def test_laguerre_reference(self, reference):
        for r in reference["laguerre"]:
            want = float(r["value"])
            assert laguerre_assoc(r["m"], r["a"], float(Fraction(r["x"]))) == pytest.approx(want, rel=1e-12)

    def test_pi_examples(self):
        assert pi_mn(0, 0, 0) == pytest.approx(1 / math.pi)
        assert pi_mn(1, 1, 0) == pytest.approx(-1 / math.pi)

    def test_pi_reference(self, reference):
        for r in reference["pi_mn"]:
            got = pi_mn(r["m"], r["n"], complex(*r["alpha"]))
            assert abs(got - as_complex(r["value"])) <= 1e-15

    @given(
        st.integers(0, 30),
        st.integers(0, 30),
        st.complex_numbers(max_magnitude=8, allow_nan=False, allow_infinity=False),
    )
    def test_pi_conjugation(self, m, n, alpha):
        assert pi_mn(m, n, alpha) == pytest.approx(pi_mn(n, m, alpha).conjugate(), rel=1e-12, abs=1e-300)

    def test_pi_bounded(self):
        alpha = np.linspace(0, 12, 400) * np.exp(0.3j)
        for m, n in [(0, 0), (40, 40), (5, 60), (100, 103)]:
            vals = pi_mn(m, n, alpha)
            assert np.all(np.isfinite(vals))
            assert np.max(np.abs(vals)) <= 1 / math.pi + 1e-12

    def test_log_domain_switch_continuous(self):
        r = math.sqrt(60.0) / 2
        lo, hi = pi_mn(7, 11, r * (1 - 1e-12)), pi_mn(7, 11, r * (1 + 1e-12))
        assert abs(lo - hi) <= 1e-10 * abs(hi)


class TestPhaseGrid:
    def test_cell_area(self):
        grid = PhaseGrid(-1, 3, -2, 2, 5, 9)
        assert grid.cell_area == pytest.approx(1.0 * 0.5)

    def test_orientation(self):
        grid = PhaseGrid(-1, 1, 0, 4, 3, 5)
        assert grid.alpha[2, 0] == 1 + 0j
        assert grid.alpha[0, 4] == -1 + 4j

    def test_validation(self):
        with pytest.raises(ValueError):
            PhaseGrid(1, 0, 0, 1, 3, 3)
        with pytest.raises(ValueError):
            PhaseGrid(0, 1, 0, 1, 3, 3, values=np.zeros((3, 4)))

    def test_default_window(self):
        grid = PhaseGrid.default_for(3)
        assert (grid.re_min, grid.re_max, grid.nx) == (-7, 7, 301)


class TestWigner:
    def test_vacuum(self):
        grid = PhaseGrid.square(6, 301)
        w = wigner_from_density(coherent_density(0, 12), grid)
        assert np.max(np.abs(w.values - gaussian(grid, 0))) <= 1e-15
        assert grid_integral(w) == pytest.approx(0.5, abs=1e-4)

    @pytest.mark.parametrize("alpha0", [1.0, 2.0, 3.0, 1.5 - 2j])
    def test_coherent_gaussian(self, alpha0):
        grid = PhaseGrid.default_for(alpha0, 151)
        w = wigner_from_density(coherent_density(alpha0, default_nmax(alpha0) + 20), grid)
        assert np.max(np.abs(w.values - gaussian(grid, alpha0))) <= 1e-8

    def test_number_state(self):
        grid = PhaseGrid.square(1, 3)
        assert wigner_from_density(fock_state(1, 3), grid).values[1, 1] == pytest.approx(-1 / math.pi)

    def test_matches_direct_sum(self):
        rng = np.random.default_rng(7)
        c = rng.normal(size=(25, 25)) + 1j * rng.normal(size=(25, 25))
        c = c + c.conj().T
        grid = PhaseGrid.square(5, 9)
        direct = sum(c[m, n] * pi_mn(m, n, grid.alpha.ravel()) for m in range(25) for n in range(25))
        assert np.max(np.abs(render_coefficients(c, grid).ravel() - direct.real)) <= 1e-13

    def test_workers_identical(self):
        grid = PhaseGrid.square(5, 101)
        state = coherent_density(2 + 1j, 30)
        assert np.array_equal(
            wigner_from_density(state, grid).values, wigner_from_density(state, grid, workers=3).values
        )

    def test_imaginary_residue(self):
        rho = np.zeros((3, 3), dtype=complex)
        rho[0, 1] = 0.3
        with pytest.raises(ImaginaryResidueError):
            wigner_from_density(FockDensity(rho), PhaseGrid.square(3, 21))

    def test_orthogonality_surrogate(self):
        grid = PhaseGrid.square(6, 301)
        for m in range(11):
            assert grid_integral(grid.with_values(pi_mn(m, m, grid.alpha).real)) == pytest.approx(0.5, abs=1e-4)
        for m, n in [(0, 1), (2, 5), (3, 4), (7, 10)]:
            vals = pi_mn(m, n, grid.alpha)
            assert abs(np.sum(vals) * grid.cell_area) <= 1e-6


class TestCoherentSeries:
    def test_t0_gaussian(self):
        grid = PhaseGrid.default_for(2, 121)
        w = wigner_coherent_evolved(2, 0.0, ModelParams(G, 0.01), grid, nmax=50)
        assert np.max(np.abs(w.values - gaussian(grid, 2))) <= 1e-8

    @pytest.mark.parametrize(
        "alpha0, kappa, t",
        [(3, 0.0, math.pi / (2 * G)), (3, 0.01, math.pi / (2 * G)), (2, 0.01, math.pi / G), (1 + 1j, 0.05, 7.0)],
    )
    def test_pipeline_equivalence(self, alpha0, kappa, t):
        p = ModelParams(G, kappa)
        grid = PhaseGrid.default_for(alpha0, 121)
        nmax = evolution_nmax(alpha0, t, p)
        direct = wigner_coherent_evolved(alpha0, t, p, grid, nmax=nmax)
        piped = wigner_from_density(evolve(coherent_density(alpha0, nmax), t, p), grid)
        assert np.max(np.abs(direct.values - piped.values)) <= 1e-8

    def test_coefficients_hermitian(self):
        c = coherent_series_coefficients(2 - 1j, 4.0, ModelParams(G, 0.02), 30)
        assert np.array_equal(c, c.conj().T)
        c = coherent_series_coefficients(2, 4.0, ModelParams(G, 0.02), 30, family="classical")
        assert np.trace(c).real == pytest.approx(1.0, abs=1e-9)
        with pytest.raises(ValueError):
            coherent_series_coefficients(2, 1.0, ModelParams(G, 0.0), 10, family="other")

    def test_cat_state(self):
        grid = PhaseGrid.default_for(3, 141)
        w = wigner_coherent_evolved(3, math.pi / (2 * G), ModelParams(G, 0.0), grid)
        lobe = w.values[np.unravel_index(np.argmin(np.abs(grid.alpha - 3)), w.values.shape)]
        mirror = w.values[np.unravel_index(np.argmin(np.abs(grid.alpha + 3)), w.values.shape)]
        # each lobe carries half the weight of a coherent-state peak
        assert lobe == pytest.approx(0.5 / math.pi, rel=1e-6)
        assert mirror == pytest.approx(0.5 / math.pi, rel=1e-6)
        # fringes between the lobes dip close to -1/pi
        near_origin = np.abs(grid.alpha) < 1
        assert w.values[near_origin].min() < -0.25
        assert negativity_volume(w) > 0.1

    def test_revival_reflection(self):
        grid = PhaseGrid.default_for(3, 121)
        w = wigner_coherent_evolved(3, math.pi / G, ModelParams(G, 0.0), grid, nmax=60)
        assert np.max(np.abs(w.values - gaussian(grid, -3))) <= 1e-8


class TestMetrics:
    def test_zero_grid(self):
        grid = PhaseGrid.square(1, 5)
        assert grid_integral(grid) == 0
        assert negativity_volume(grid) == 0

    def test_gaussian_not_negative(self):
        grid = PhaseGrid.square(4, 101)
        assert negativity_volume(grid.with_values(gaussian(grid, 0.5))) == 0

    def test_fock_negativity_refinement(self):
        values = []
        for n in (201, 401):
            grid = PhaseGrid.square(5, n)
            values.append(negativity_volume(wigner_from_density(fock_state(1, 4), grid)))
        assert values[0] > 0
        assert abs(values[1] - values[0]) <= 0.01 * values[1]

    def test_l1(self):
        a = PhaseGrid.square(2, 11).with_values(np.ones((11, 11)))
        assert l1_distance(a, a) == 0
        with pytest.raises(GeometryError):
            l1_distance(a, PhaseGrid.square(2, 13))

    def test_moments(self):
        grid = PhaseGrid.square(7, 201)
        m = grid_moments(grid.with_values(gaussian(grid, 1 - 2j)))
        assert m["mass"] == pytest.approx(0.5, abs=1e-6)
        assert m["mean_re"] == pytest.approx(1, abs=1e-9)
        assert m["mean_im"] == pytest.approx(-2, abs=1e-9)
        assert m["mean_abs2"] == pytest.approx(5.5, abs=1e-8)

    def test_angular_variance(self):
        grid = PhaseGrid.square(6, 201)
        symmetric = angular_variance(grid.with_values(gaussian(grid, 0)))
        lopsided = angular_variance(grid.with_values(gaussian(grid, 2)))
        assert lopsided > 100 * symmetric
