"""Infidelity and robust summaries over trial ensembles."""

import numpy as np

from .core import DimensionError, clamp_spectrum, psd_sqrt


def fidelity(rho, sigma):
    rho = np.asarray(rho, dtype=complex)
    sigma = np.asarray(sigma, dtype=complex)
    if rho.shape != sigma.shape:
        raise DimensionError(f"shape mismatch: {rho.shape} vs {sigma.shape}")
    root = psd_sqrt(rho)
    inner = root @ sigma @ root
    inner = 0.5 * (inner + inner.conj().T)
    # tr sqrt(M) is the sum of square roots of M's eigenvalues
    return float(np.sum(np.sqrt(clamp_spectrum(np.linalg.eigvalsh(inner)))) ** 2)


def infidelity(rho, sigma):
    """1 - (tr sqrt(sqrt(rho) sigma sqrt(rho)))^2, clamped to [0, 1]."""
    return min(max(1.0 - fidelity(rho, sigma), 0.0), 1.0)


def median(values):
    arr = np.asarray(values, dtype=float)
    if arr.size == 0:
        raise ValueError("median of an empty sequence")
    return float(np.median(arr))


def quantiles(values, q):
    """Linear-interpolation quantiles (numpy's default method)."""
    arr = np.asarray(values, dtype=float)
    if arr.size == 0:
        raise ValueError("quantiles of an empty sequence")
    q = np.asarray(q, dtype=float)
    if np.any((q < 0) | (q > 1)):
        raise ValueError(f"quantile levels must lie in [0, 1], got {q.tolist()}")
    return [float(x) for x in np.quantile(arr, q, method="linear")]
