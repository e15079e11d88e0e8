"""Shared test fixtures and instance builders."""

import numpy as np
import pytest

from potdc.arraymodel import (ArrayConfig, GaussianDensity, ScatteredSource,
                              UniformDensity, covariance_from_density,
                              generate_snapshots, sample_covariance)
from potdc.linalg import psd_sqrt_factor


def random_hermitian(rng, n):
    A = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return 0.5 * (A + A.conj().T)


def random_psd(rng, n, rank=None):
    r = rank or n
    X = rng.standard_normal((r, n)) + 1j * rng.standard_normal((r, n))
    A = X.conj().T @ X / r
    return 0.5 * (A + A.conj().T)


def beamforming_instance(M=10, snr_db=0.0, inr_db=10.0, seed=0, K=20,
                         gamma=10.0, eta_scale=0.3):
    """Sample-covariance beamforming instance with the stock densities.

    Returns (R_hat, gamma, Q, eta) ready for the solvers.
    """
    array = ArrayConfig(M)
    R_s = covariance_from_density(
        array, ScatteredSource(GaussianDensity(30.0, 4.0), 10 ** (snr_db / 10)))
    R_int = covariance_from_density(
        array, ScatteredSource(UniformDensity(10.0, 4.0), 10 ** (inr_db / 10)))
    X = generate_snapshots(R_s, R_int, 1.0, K, seed)
    R_hat = sample_covariance(X)
    R_tilde = covariance_from_density(
        array, ScatteredSource(GaussianDensity(32.0, 1.0), 1.0))
    Q = psd_sqrt_factor(R_tilde)
    eta = eta_scale * float(np.sqrt(np.real(np.trace(R_tilde))))
    return R_hat, gamma, Q, eta


@pytest.fixture
def rng():
    return np.random.default_rng(20240901)
