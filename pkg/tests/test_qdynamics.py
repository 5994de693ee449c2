import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from diffkerr.algebra import KernelTable, ModelParams
from diffkerr.engine import propagate
from diffkerr.errors import TruncationError
from diffkerr.fock import FockDensity, coherent_density, default_nmax, purity
from diffkerr.oracles import integrate_master
from diffkerr.qdynamics import evolution_nmax, evolve, master_rhs, population_tail

P = ModelParams(0.1, 0.01)


def random_density(rng, dim, decay=0.35):
    # random mixed state concentrated on low levels
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    a *= np.exp(-decay * np.arange(dim))[:, None]
    rho = a @ a.conj().T
    return FockDensity(rho / np.trace(rho))


class TestMasterRhs:
    def test_vacuum(self):
        out = master_rhs(coherent_density(0, 6), ModelParams(0.3, 0.25))
        assert out[0, 0] == pytest.approx(-2 * 0.25)
        assert out[1, 1] == pytest.approx(2 * 0.25)

    def test_zero_generator(self):
        state = random_density(np.random.default_rng(0), 8)
        assert np.array_equal(master_rhs(state, ModelParams(0, 0)), np.zeros((8, 8)))

    def test_trace_leak(self):
        state = random_density(np.random.default_rng(1), 10, decay=0.05)
        rhs = master_rhs(state, P)
        leak = -2 * P.kappa * (state.nmax + 1) * state.rho[-1, -1]
        assert np.trace(rhs) == pytest.approx(leak, abs=1e-15)

    def test_accepts_arrays(self):
        state = random_density(np.random.default_rng(2), 5)
        assert np.array_equal(master_rhs(state, P), master_rhs(state.rho, P))


class TestEvolve:
    def test_identity_at_t0(self):
        state = random_density(np.random.default_rng(3), 12)
        assert np.array_equal(evolve(state, 0.0, P).rho, state.rho)

    @pytest.mark.parametrize("t", [0.37, 5.0, math.pi / 0.1, 123.4])
    def test_kerr_phases(self, t):
        p = ModelParams(0.1, 0.0)
        state = coherent_density(2, 30)
        m = np.arange(31)
        expected = np.exp(-1j * p.g * (m[:, None] ** 2 - m[None, :] ** 2) * t) * state.rho
        assert np.max(np.abs(evolve(state, t, p).rho - expected)) <= 1e-12

    def test_matches_rk4(self):
        # kappa = 0.001, t = pi/g
        p = ModelParams(0.1, 0.001)
        state = coherent_density(2, evolution_nmax(2, math.pi / p.g, p))
        exact = evolve(state, math.pi / p.g, p)
        rk = integrate_master(state, math.pi / p.g, p, dt=2e-3)
        assert np.max(np.abs(exact.rho - rk.rho)) <= 1e-6

    def test_semigroup(self):
        state = coherent_density(2, 45)
        a = evolve(evolve(state, 7.0, P), 11.0, P)
        b = evolve(state, 18.0, P)
        assert np.max(np.abs(a.rho - b.rho)) <= 1e-8

    def test_mirrored_matches_direct(self):
        state = random_density(np.random.default_rng(4), 30, decay=0.8)
        a = evolve(state, 9.0, P)
        b = evolve(state, 9.0, P, hermitian=False)
        assert np.max(np.abs(a.rho - b.rho)) <= 1e-10
        assert a.hermiticity_residual() == 0.0

    @settings(max_examples=10, deadline=None)
    @given(g=st.floats(0.0, 1.0), t=st.floats(0.0, 40.0))
    def test_populations_independent_of_g(self, g, t):
        state = coherent_density(1.5 + 0.5j, 40)
        base = evolve(state, t, ModelParams(0.0, 0.01)).populations()
        assert np.max(np.abs(evolve(state, t, ModelParams(g, 0.01)).populations() - base)) <= 1e-12

    @pytest.mark.parametrize("alpha0", [1.0, 2.0, 3.0, 2 - 2j])
    def test_trace_preserved(self, alpha0):
        t = 2 * math.pi / P.g
        nmax = evolution_nmax(alpha0, t, P)
        state0 = coherent_density(alpha0, nmax)
        for s in np.linspace(0, t, 4):
            out = evolve(state0, s, P)
            assert abs(out.trace() - state0.trace()) <= 1e-8
            out.check()

    def test_revival(self):
        p = ModelParams(0.1, 0.0)
        from diffkerr.fock import fidelity_coherent

        state = evolve(coherent_density(3, default_nmax(3)), math.pi / p.g, p)
        assert fidelity_coherent(state, -3) >= 1 - 1e-8

    def test_purity_decreases(self):
        state = evolve(coherent_density(2, 40), 5.0, P)
        assert purity(state) < 1 - 1e-3

    def test_truncation_guard(self):
        with pytest.raises(TruncationError):
            evolve(coherent_density(2, default_nmax(2)), math.pi / P.g, P)

    def test_negative_time(self):
        with pytest.raises(ValueError):
            evolve(coherent_density(1, 20), -1.0, P)


class TestTruncationPolicy:
    def test_tail_monotone(self):
        tail = population_tail(2, 30.0, P, 80)
        assert np.all(np.diff(tail) <= 1e-15)
        assert tail[0] == pytest.approx(1 - evolve(coherent_density(2, 80), 30.0, P).populations()[0], abs=1e-12)

    def test_evolution_nmax(self):
        t = math.pi / P.g
        n = evolution_nmax(2, t, P)
        assert n >= default_nmax(2)
        assert population_tail(2, t, P, 4 * n)[n] <= 1e-10
        assert population_tail(2, t, P, 4 * n)[n - 1] > 1e-10
        assert evolution_nmax(2, 0.0, P) == default_nmax(2)


class TestEngine:
    def test_quantum_kernels_bit_identical(self):
        state = coherent_density(2, 45)
        table = KernelTable(P, 12.0, 45)
        raw = propagate(state.rho, table.gamma_arr, table.zeta_arr, table.quantum_phase())
        assert np.array_equal(raw, evolve(state, 12.0, P).rho)

    def test_shape_checks(self):
        table = KernelTable(P, 1.0, 3)
        with pytest.raises(ValueError):
            propagate(np.eye(5), table.gamma_arr, table.zeta_arr, table.quantum_phase())

    def test_matches_literal_quadruple_sum(self):
        # explicit four-index sum on a small truncation
        from math import factorial

        rng = np.random.default_rng(5)
        state = random_density(rng, 7, decay=0.1)
        N = state.nmax
        t = 3.3
        table = KernelTable(P, t, N)
        rho0 = state.rho
        expected = np.zeros_like(rho0)
        for m in range(N + 1):
            for n in range(N + 1):
                d = m - n
                gam, zet, ph = table.gamma(d), table.zeta(d), np.exp(1j * P.g * t * d)
                for l in range(N + 1 - max(m, n)):
                    for j in range(N + 1 - max(m, n)):
                        w = math.sqrt(
                            factorial(m + j) * factorial(n + j) * factorial(m + l) * factorial(n + l)
                        ) / (factorial(m) * factorial(n) * factorial(l) * factorial(j))
                        expected[m + l, n + l] += rho0[m + j, n + j] * w * gam ** (l + j) * zet ** (m + n + 1) * ph
        got = propagate(rho0, table.gamma_arr, table.zeta_arr, table.quantum_phase(), hermitian=False)
        assert np.max(np.abs(got - expected)) <= 1e-14
