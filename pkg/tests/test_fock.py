import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from diffkerr.errors import InvariantError, TruncationError
from diffkerr.fock import (
    FockDensity,
    coherent_density,
    default_nmax,
    fidelity_coherent,
    poisson_tail,
    purity,
)

amplitudes = st.complex_numbers(max_magnitude=3.0, allow_nan=False, allow_infinity=False)


def test_vacuum():
    rho = coherent_density(0, 5).rho
    expected = np.zeros((6, 6))
    expected[0, 0] = 1
    assert np.array_equal(rho, expected)


def test_coherent_element():
    assert coherent_density(1, 30).rho[0, 1] == pytest.approx(math.exp(-1), rel=1e-15)


def test_trace_is_poisson_mass(reference):
    row = next(r for r in reference["poisson"] if r["mean"] == 9 and r["nmax"] == 39)
    assert default_nmax(3) == 39
    assert abs(coherent_density(3, 39).trace() - float(row["mass"])) <= 1e-10


def test_default_nmax():
    assert default_nmax(0) == 12
    assert default_nmax(3) == 39
    assert default_nmax(3j) == 39
    assert poisson_tail(4.0, default_nmax(2)) < 1e-9


def test_poisson_tail_reference(reference):
    for r in reference["poisson"]:
        assert poisson_tail(r["mean"], r["nmax"]) == pytest.approx(float(r["tail"]), rel=1e-9, abs=1e-16)


def test_truncation_error():
    with pytest.raises(TruncationError):
        coherent_density(3, 10)


def test_fidelity_examples():
    assert fidelity_coherent(coherent_density(0, 40), 3) == pytest.approx(math.exp(-9), rel=1e-12)
    # |<-a|a>|^2 = exp(-4|a|^2)
    assert fidelity_coherent(coherent_density(2, 40), -2) == pytest.approx(math.exp(-16), rel=1e-9)
    assert fidelity_coherent(coherent_density(2, 40), 2) == pytest.approx(1.0, abs=1e-12)


@given(amplitudes)
def test_coherent_state_properties(alpha):
    state = coherent_density(alpha, default_nmax(alpha))
    state.check()
    assert purity(state) == pytest.approx(1.0, abs=1e-10)
    assert state.mean_amplitude() == pytest.approx(alpha, abs=1e-7)
    assert abs(state.trace() - 1) <= 1e-9


def test_purity_mixed():
    assert purity(FockDensity(np.diag([0.5, 0.5]))) == pytest.approx(0.5)


def test_density_validation():
    with pytest.raises(ValueError):
        FockDensity(np.zeros((2, 3)))
    bad = FockDensity(np.array([[1.0, 0.1], [0.3, 0.0]]))
    with pytest.raises(InvariantError):
        bad.check()
    with pytest.raises(InvariantError):
        FockDensity(np.diag([1.1, -0.1])).check()


def test_padded_and_immutable():
    state = coherent_density(1, 20)
    big = state.padded(30)
    assert big.nmax == 30
    assert np.array_equal(big.rho[:21, :21], state.rho)
    with pytest.raises(ValueError):
        state.rho[0, 0] = 2
