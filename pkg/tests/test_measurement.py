import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sgqst.core import basis_state, expectation
from sgqst.learner import LearnerConfig, learn_state
from sgqst.measurement import (
    MeasurementDevice, NoiseModel, budget, depolarize, noisy_expectation, stochastic_matrix,
)
from sgqst.randgen import ginibre_mixed_state, haar_random_pure, make_rng

RHO_82 = np.diag([0.8, 0.2])


def test_noiseless_exact_expectation():
    dev = MeasurementDevice(RHO_82, 100, exact=True)
    assert noisy_expectation(dev, basis_state(2, 0)) == pytest.approx(0.8)


def test_fully_random_device_returns_uniform():
    rng = make_rng(0)
    for d in (2, 3, 5):
        rho = ginibre_mixed_state(d, d, rng)
        dev = MeasurementDevice(rho, 10, exact=True, noise_lambda=1.0)
        assert dev.expectation(haar_random_pure(d, rng)) == pytest.approx(1 / d, abs=1e-12)


def test_noise_formula_arithmetic():
    # p = 0.9 on |0>, (1 - 0.2) * 0.9 + 0.2 / 2 = 0.82
    dev = MeasurementDevice(np.diag([0.9, 0.1]), 10, exact=True, noise_lambda=0.2)
    assert dev.expectation(basis_state(2, 0)) == pytest.approx(0.82, abs=1e-15)


def test_depolarize_examples():
    rho = ginibre_mixed_state(3, 3, make_rng(1))
    np.testing.assert_array_equal(depolarize(rho, 0.0), rho)
    np.testing.assert_allclose(depolarize(rho, 1.0), np.eye(3) / 3, atol=1e-15)
    np.testing.assert_allclose(depolarize(np.diag([1.0, 0.0]), 0.2), np.diag([0.9, 0.1]))
    with pytest.raises(ValueError):
        depolarize(rho, 1.2)


def test_stochastic_matrix_examples():
    np.testing.assert_array_equal(stochastic_matrix(NoiseModel(0.0, 3)), np.eye(3))
    np.testing.assert_allclose(stochastic_matrix(NoiseModel(1.0, 2)), np.full((2, 2), 0.5))
    m = stochastic_matrix(NoiseModel(0.2, 4))
    np.testing.assert_allclose(np.diag(m), 0.85)
    np.testing.assert_allclose(m[~np.eye(4, dtype=bool)], 0.05)
    np.testing.assert_allclose(m.sum(axis=1), 1.0, atol=1e-12)


def test_noise_model_range():
    with pytest.raises(ValueError):
        NoiseModel(-0.1, 2)
    with pytest.raises(ValueError):
        MeasurementDevice(RHO_82, 10, exact=True, noise_lambda=1.5)


@settings(max_examples=200, deadline=None)
@given(st.floats(0.0, 1.0), st.integers(2, 64))
def test_stochastic_matrix_is_doubly_stochastic(lam, d):
    m = stochastic_matrix(NoiseModel(lam, d))
    assert np.all(m >= 0)
    np.testing.assert_allclose(m.sum(axis=0), 1.0, atol=1e-12)
    np.testing.assert_allclose(m.sum(axis=1), 1.0, atol=1e-12)


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 8), st.floats(0.0, 1.0))
def test_noise_views_agree(seed, d, lam):
    rng = make_rng(seed)
    rho = ginibre_mixed_state(d, int(rng.integers(1, d + 1)), rng)
    phi = haar_random_pure(d, rng)
    dev = MeasurementDevice(rho, 1, exact=True, noise_lambda=lam)
    assert abs(dev.expectation(phi) - expectation(depolarize(rho, lam), phi)) <= 1e-12


def test_basis_measurement_uses_noise_matrix():
    rho = ginibre_mixed_state(3, 3, make_rng(5))
    dev = MeasurementDevice(rho, 7, exact=True, noise_lambda=0.3)
    probs = dev.measure_basis(np.eye(3))
    expected = stochastic_matrix(NoiseModel(0.3, 3)) @ np.real(np.diag(rho))
    np.testing.assert_allclose(probs, expected, atol=1e-12)
    assert dev.copies == 7


def test_shots_concentration():
    # |phi> = |+>, rho = |0><0| gives p' = 0.5
    plus = np.array([1, 1]) / np.sqrt(2)
    dev = MeasurementDevice(np.diag([1.0, 0.0]), 10_000, rng=make_rng(3))
    freqs = np.array([dev.expectation(plus) for _ in range(1000)])
    assert np.mean(np.abs(freqs - 0.5) <= 0.02) >= 0.99


def test_shots_are_seeded():
    phi = haar_random_pure(3, make_rng(1))
    rho = ginibre_mixed_state(3, 3, make_rng(2))
    a = MeasurementDevice(rho, 50, rng=make_rng(4))
    b = MeasurementDevice(rho, 50, rng=make_rng(4))
    assert [a.expectation(phi) for _ in range(20)] == [b.expectation(phi) for _ in range(20)]


def test_budget_ledger():
    dev = MeasurementDevice(RHO_82, 100, rng=make_rng(0))
    assert budget(dev) == 0
    dev.expectation(basis_state(2, 0))
    assert budget(dev) == 100
    exact = MeasurementDevice(RHO_82, 100, exact=True)
    exact.expectation(basis_state(2, 0))
    assert budget(exact) == 100


def test_budget_full_rank_qubit_run():
    # N (d (2K + 1) + 1) with d = 2, K = 10, N = 100
    dev = MeasurementDevice(np.eye(2) / 2, 100, exact=True)
    res = learn_state(dev, LearnerConfig(d=2, N=100, K=10), rng=make_rng(0))
    assert res.r_hat == 2
    assert budget(dev) == 4300


def test_sampling_device_requires_rng():
    with pytest.raises(ValueError):
        MeasurementDevice(RHO_82, 10)
