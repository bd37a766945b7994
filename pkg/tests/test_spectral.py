import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from tmdecomp.spectral import (aggregate_density, dft, dual_position, fourier_basis,
                               idft, position_period_hours, spectral_density)

from conftest import naive_dft

finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)


def test_dft_constant():
    np.testing.assert_allclose(dft(np.ones(4)), [2, 0, 0, 0], atol=1e-15)


def test_dft_impulse():
    np.testing.assert_allclose(dft([1.0, 0, 0, 0]), [0.5] * 4, atol=1e-15)


@pytest.mark.parametrize("T", [1, 2, 7, 16, 33, 64])
def test_dft_matches_naive_sum(rng, T):
    x = rng.standard_normal(T)
    np.testing.assert_allclose(dft(x), naive_dft(x), atol=1e-10, rtol=0)


def test_fourier_basis_is_unitary_and_matches_dft(rng):
    W = fourier_basis(12)
    np.testing.assert_allclose(W.conj().T @ W, np.eye(12), atol=1e-12)
    x = rng.standard_normal(12)
    np.testing.assert_allclose(W.T @ x, dft(x), atol=1e-12)


def test_dft_roundtrip_columns(rng):
    M = rng.standard_normal((2016, 3))
    np.testing.assert_allclose(idft(dft(M, axis=0), axis=0).real, M, atol=1e-12)


@settings(max_examples=50, deadline=None)
@given(arrays(float, st.integers(2, 64), elements=finite))
def test_parseval_and_symmetry(x):
    phi = spectral_density(x).phi
    energy = float(x @ x)
    assert abs(phi.sum() - energy) <= 1e-9 * max(energy, 1e-300) + 1e-12
    T = x.size
    t = np.arange(2, T + 1)
    np.testing.assert_allclose(phi[t - 1], phi[T - t + 1], rtol=1e-9, atol=1e-9 * max(energy, 1))


def test_density_constant():
    c = 1.5
    np.testing.assert_allclose(spectral_density(np.full(4, c)).phi, [4 * c * c, 0, 0, 0],
                               atol=1e-14)


def test_density_cosine_splits_between_dual_positions():
    T = 8
    k = np.arange(T)
    x = np.cos(2 * np.pi * k / T)
    oracle = np.abs(naive_dft(x)) ** 2
    phi = spectral_density(x).phi
    np.testing.assert_allclose(phi, oracle, atol=1e-12)
    assert phi[1] == pytest.approx(phi[7])
    assert phi[1] + phi[7] == pytest.approx(float(x @ x))
    assert np.all(np.delete(phi, [1, 7]) < 1e-20)


def test_aggregate_density(rng):
    x = rng.standard_normal(16)
    np.testing.assert_allclose(aggregate_density(x[:, None]).phi, spectral_density(x).phi)
    np.testing.assert_allclose(aggregate_density(np.c_[x, x]).phi,
                               2 * spectral_density(x).phi)
    M = rng.standard_normal((16, 3))
    oracle = sum(np.abs(naive_dft(M[:, j])) ** 2 for j in range(3))
    np.testing.assert_allclose(aggregate_density(M).phi, oracle, atol=1e-10)


def test_aggregate_density_of_white_noise_is_flat():
    M = np.random.default_rng(7).standard_normal((2016, 121))
    phi = aggregate_density(M).phi[1:]
    assert phi.std() / phi.mean() < 0.2


@pytest.mark.parametrize("t, hours", [(8, 24.0), (15, 12.0), (29, 6.0), (57, 3.0),
                                      (113, 1.5), (169, 1.0), (2010, 24.0)])
def test_period_hours(t, hours):
    assert position_period_hours(t, 2016, 300) == pytest.approx(hours, rel=1e-12)


def test_period_dc_and_range():
    assert position_period_hours(1, 2016) == "DC"
    with pytest.raises(ValueError):
        position_period_hours(0, 2016)
    with pytest.raises(ValueError):
        position_period_hours(2017, 2016)


def test_dual_position():
    assert dual_position(8, 2016) == 2010
    assert dual_position(1, 2016) == 1
    assert dual_position(1009, 2016) == 1009
