"""Simulated measurement device with depolarizing readout noise and a copy ledger."""

from dataclasses import dataclass

import numpy as np

from .core import DimensionError, as_vector, expectation, validate_density


@dataclass(frozen=True)
class NoiseModel:
    """Uniform readout noise of strength ``lam`` on a d-outcome measurement.

    The outcome distribution of a d-outcome measurement is multiplied by the
    doubly stochastic matrix returned by :func:`stochastic_matrix`. For a
    two-outcome projector measurement the same noise reduces to
    ``p -> (1 - lam) p + lam / d``.
    """

    lam: float
    d: int

    def __post_init__(self):
        if not 0.0 <= self.lam <= 1.0:
            raise ValueError(f"noise strength must be in [0, 1], got {self.lam}")
        if self.d < 2:
            raise ValueError(f"dimension must be >= 2, got {self.d}")

    def apply(self, p):
        return (1.0 - self.lam) * p + self.lam / self.d


def stochastic_matrix(model):
    d, lam = model.d, model.lam
    m = np.full((d, d), lam / d)
    np.fill_diagonal(m, 1.0 - lam + lam / d)
    return m


def depolarize(rho, lam):
    """(1 - lam) rho + lam I / d."""
    if not 0.0 <= lam <= 1.0:
        raise ValueError(f"noise strength must be in [0, 1], got {lam}")
    rho = np.asarray(rho, dtype=complex)
    d = rho.shape[0]
    return (1.0 - lam) * rho + lam * np.eye(d) / d


class MeasurementDevice:
    """Oracle holding a hidden state and answering projector queries.

    ``shots`` is the nominal number of copies spent per query. With
    ``exact=True`` the device returns the noisy Born probability itself but
    still charges ``shots`` copies, so exact and sampled runs share the same
    accounting. The device owns its generator and ledger; use one per trial.
    """

    def __init__(self, rho, shots, *, exact=False, noise_lambda=0.0, rng=None):
        self.rho = validate_density(rho)
        self.d = self.rho.shape[0]
        if shots < 1:
            raise ValueError(f"shots must be >= 1, got {shots}")
        self.shots = int(shots)
        self.exact = bool(exact)
        self.noise = NoiseModel(float(noise_lambda), self.d)
        if rng is None and not self.exact:
            raise ValueError("a sampling device needs an rng")
        self.rng = rng
        self.copies = 0

    @property
    def noise_lambda(self):
        return self.noise.lam

    def _charge(self, n):
        self.copies += int(n)

    def expectation(self, phi, shots=None):
        """Two-outcome measurement {|phi><phi|, I - |phi><phi|}.

        Returns the observed frequency of the first outcome (or its exact
        probability) after readout noise.
        """
        n = self.shots if shots is None else int(shots)
        phi = as_vector(phi)
        if phi.size != self.d:
            raise DimensionError(f"device dimension {self.d}, vector dimension {phi.size}")
        p = self.noise.apply(expectation(self.rho, phi))
        p = min(max(p, 0.0), 1.0)
        self._charge(n)
        if self.exact:
            return p
        return self.rng.binomial(n, p) / n

    def measure_basis(self, basis, shots=None):
        """d-outcome measurement in an orthonormal basis given as columns.

        Returns the estimated outcome distribution, with the noise matrix
        applied to the ideal Born probabilities. Costs ``shots`` copies.
        """
        n = self.shots if shots is None else int(shots)
        basis = np.asarray(basis, dtype=complex)
        if basis.shape != (self.d, self.d):
            raise DimensionError(f"basis must be {self.d}x{self.d}, got {basis.shape}")
        ideal = np.real(np.einsum("ij,ik,kj->j", basis.conj(), self.rho, basis))
        ideal = np.clip(ideal, 0.0, None)
        probs = stochastic_matrix(self.noise) @ ideal
        probs = probs / probs.sum()
        self._charge(n)
        if self.exact:
            return probs
        return self.rng.multinomial(n, probs) / n


def noisy_expectation(dev, phi, shots=None):
    return dev.expectation(phi, shots)


def budget(dev):
    return dev.copies
