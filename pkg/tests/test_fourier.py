import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import dft_slow
from projkit.engine import StopRule, gerchberg_saxton
from projkit.errors import StructuralError
from projkit.fourier import (
    FourierMagnitudeSet,
    SupportSet,
    dft,
    idft,
    to_complex,
    to_real,
)


def rand_complex(rng, n):
    return rng.normal(size=n) + 1j * rng.normal(size=n)


@pytest.mark.parametrize("n", [1, 2, 3, 8, 17, 64])
def test_dft_matches_explicit_sum(n):
    z = rand_complex(np.random.default_rng(n), n)
    assert np.max(np.abs(dft(z) - dft_slow(z))) <= 1e-12


@pytest.mark.parametrize("n", [4, 31, 64])
def test_dft_unitary(n):
    rng = np.random.default_rng(100 + n)
    z, w = rand_complex(rng, n), rand_complex(rng, n)
    assert abs(np.linalg.norm(dft(z)) - np.linalg.norm(z)) <= 1e-12
    assert abs(np.vdot(dft(z), dft(w)) - np.vdot(z, w)) <= 1e-12
    assert np.max(np.abs(idft(dft(z)) - z)) <= 1e-12


def test_interleaving_round_trip_and_norm():
    z = np.array([1 + 2j, -3 + 0.5j])
    x = to_real(z)
    assert x.tolist() == [1.0, 2.0, -3.0, 0.5]
    assert np.array_equal(to_complex(x), z)
    assert np.linalg.norm(x) == pytest.approx(np.linalg.norm(z), rel=1e-15)
    with pytest.raises(StructuralError):
        to_complex([1.0, 2.0, 3.0])


@settings(max_examples=50)
@given(st.integers(1, 32), st.integers(0, 2**31 - 1))
def test_magnitude_projection_hits_amplitude(n, seed):
    rng = np.random.default_rng(seed)
    a = rng.uniform(0, 2, n)
    M = FourierMagnitudeSet(a)
    x = rng.normal(size=2 * n)
    p = M.project(x)
    assert M.residual(p) <= 1e-10
    # idempotent up to rounding
    assert np.linalg.norm(M.project(p) - p) <= 1e-12 * (1 + np.linalg.norm(p))


def test_magnitude_projection_is_nearest_among_phase_choices():
    rng = np.random.default_rng(3)
    a = rng.uniform(0.5, 1.5, 6)
    M = FourierMagnitudeSet(a)
    x = rng.normal(size=12)
    d = np.linalg.norm(x - M.project(x))
    for _ in range(200):
        ph = np.exp(2j * np.pi * rng.uniform(size=6))
        y = to_real(idft(a * ph))
        assert d <= np.linalg.norm(x - y) + 1e-12


def test_zero_coefficient_gets_phase_one():
    M = FourierMagnitudeSet([1.0, 1.0])
    p = M.project([0.0, 0.0, 0.0, 0.0])
    assert np.allclose(dft(to_complex(p)), [1.0, 1.0])
    assert M.extinctions([0.0, 0.0, 0.0, 0.0]) == 2


def test_support_projection():
    S = SupportSet([True, False, True])
    assert S.project([1, 2, 3, 4, 5, 6]).tolist() == [1, 2, 0, 0, 5, 6]


def _supported_signal(seed=7, n=8, k=3):
    rng = np.random.default_rng(seed)
    mask = np.zeros(n, bool)
    mask[:k] = True
    z = np.zeros(n, complex)
    z[:k] = rand_complex(rng, k)
    return rng, mask, to_real(z), np.abs(dft(z))


def test_gs_fixed_point():
    _, mask, x, amp = _supported_signal()
    tr = gerchberg_saxton(amp, SupportSet(mask), x, StopRule(max_iter=50))
    assert tr.a_offset == 0
    assert tr.extras["residuals"][0] <= 1e-12
    assert tr.status == "converged"
    assert np.linalg.norm(tr.limit - x) <= 1e-12


def test_gs_recovery_from_perturbed_start():
    # frozen regression: seed 7, perturbation 0.05, horizon 500 iterations
    rng, mask, x, amp = _supported_signal()
    x0 = x + 0.05 * rng.normal(size=x.size)
    tr = gerchberg_saxton(amp, SupportSet(mask), x0, StopRule(max_iter=500))
    assert tr.status == "converged"
    assert tr.extras["residuals"][-1] < 1e-8


def test_gs_dimension_check():
    with pytest.raises(StructuralError):
        gerchberg_saxton(np.ones(4), SupportSet([True] * 3), np.zeros(6))
