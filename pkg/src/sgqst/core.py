"""Complex vector and density-matrix primitives.

State vectors are 1-d complex numpy arrays, density matrices are 2-d complex
arrays. Nothing here is wrapped in a class: the functions check the invariants
they rely on and raise when those are violated.
"""

from dataclasses import dataclass, field

import numpy as np

NORM_TOL = 1e-10
TRACE_TOL = 1e-10
HERMITIAN_TOL = 1e-10
PSD_TOL = 1e-8
EIG_HERMITIAN_TOL = 1e-8


class DimensionError(ValueError):
    pass


class InvalidStateError(ValueError):
    """Raised when a matrix or probability is not a valid quantum object."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class NonHermitianError(InvalidStateError):
    pass


def as_vector(v):
    arr = np.asarray(v, dtype=complex)
    if arr.ndim != 1:
        raise DimensionError(f"expected a 1-d vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidStateError("vector has non-finite entries")
    return arr


def normalized(v):
    """Return ``v / ||v||``. Raises ``ZeroDivisionError`` on a zero vector."""
    arr = as_vector(v)
    if arr.size < 2:
        raise DimensionError("state vectors need dimension >= 2")
    norm = np.linalg.norm(arr)
    if norm < 1e-300:
        raise ZeroDivisionError("cannot normalize a zero vector")
    return arr / norm


def basis_state(d, index):
    v = np.zeros(d, dtype=complex)
    v[index] = 1.0
    return v


def canonical_phase(v):
    """Rotate the global phase so the first non-negligible entry is real positive."""
    arr = np.asarray(v, dtype=complex)
    mags = np.abs(arr)
    if mags.max(initial=0.0) == 0.0:
        return arr.copy()
    # first entry that is not numerical dust relative to the largest one
    idx = int(np.argmax(mags > 1e-8 * mags.max()))
    return arr * (np.conj(arr[idx]) / mags[idx])


def inner_product(a, b):
    """<a|b>, conjugating the first argument."""
    a = as_vector(a)
    b = as_vector(b)
    if a.shape != b.shape:
        raise DimensionError(f"dimension mismatch: {a.size} vs {b.size}")
    return complex(np.vdot(a, b))


def projector(v):
    v = as_vector(v)
    return np.outer(v, v.conj())


def _square(m):
    arr = np.asarray(m, dtype=complex)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {arr.shape}")
    return arr


def hermitian_defect(m):
    arr = _square(m)
    return float(np.max(np.abs(arr - arr.conj().T), initial=0.0))


def expectation(rho, phi):
    """Born-rule probability <phi|rho|phi> for a unit vector ``phi``.

    Values within 1e-8 outside [0, 1] are clamped; anything further out means
    ``rho`` or ``phi`` is not a valid state.
    """
    rho = _square(rho)
    phi = as_vector(phi)
    if rho.shape[0] != phi.size:
        raise DimensionError(f"dimension mismatch: rho is {rho.shape[0]}, phi is {phi.size}")
    p = float(np.real(np.vdot(phi, rho @ phi)))
    if p < -PSD_TOL or p > 1.0 + PSD_TOL:
        raise InvalidStateError(f"expectation {p!r} outside [0, 1]")
    return min(max(p, 0.0), 1.0)


@dataclass
class DensityReport:
    """Outcome of checking the three density-matrix invariants.

    ``violations`` maps each failed predicate (``hermitian``, ``trace``,
    ``psd``) to its magnitude: the largest entrywise Hermitian defect, the
    absolute trace error, and the most negative eigenvalue.
    """

    shape: tuple
    violations: dict = field(default_factory=dict)

    @property
    def ok(self):
        return not self.violations

    def __str__(self):
        if self.ok:
            return f"valid {self.shape[0]}x{self.shape[1]} density matrix"
        parts = [f"{name} violation {mag:.6g}" for name, mag in self.violations.items()]
        return "; ".join(parts)


def density_report(m):
    arr = np.asarray(m, dtype=complex)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        return DensityReport(arr.shape, {"square": float("nan")})
    report = DensityReport(arr.shape)
    if not np.all(np.isfinite(arr)):
        report.violations["finite"] = float("nan")
        return report
    herm = hermitian_defect(arr)
    if herm > HERMITIAN_TOL:
        report.violations["hermitian"] = herm
    trace_err = abs(np.trace(arr) - 1.0)
    if trace_err > TRACE_TOL:
        report.violations["trace"] = float(trace_err)
    # symmetrize so a tiny anti-Hermitian part does not break eigvalsh
    min_eig = float(np.linalg.eigvalsh(0.5 * (arr + arr.conj().T))[0])
    if min_eig < -PSD_TOL:
        report.violations["psd"] = min_eig
    return report


def validate_density(m):
    """Return ``m`` as a complex array if it is a density matrix, else raise."""
    report = density_report(m)
    if not report.ok:
        raise InvalidStateError(f"invalid density matrix: {report}", report)
    return np.array(m, dtype=complex)


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues in descending order with the matching eigenvectors as columns."""

    values: np.ndarray
    vectors: np.ndarray

    def __len__(self):
        return len(self.values)

    def vector(self, i):
        return self.vectors[:, i]

    def reconstruct(self):
        return (self.vectors * self.values) @ self.vectors.conj().T


def hermitian_eig(m):
    """Full eigendecomposition of a Hermitian matrix, largest eigenvalue first.

    Eigenvectors are phase-canonicalized. Raises ``NonHermitianError`` when
    the entrywise Hermitian defect exceeds 1e-8.
    """
    arr = _square(m)
    defect = hermitian_defect(arr)
    if defect > EIG_HERMITIAN_TOL:
        raise NonHermitianError(f"matrix is not Hermitian (defect {defect:.3g})")
    vals, vecs = np.linalg.eigh(0.5 * (arr + arr.conj().T))
    vals = vals[::-1].copy()
    vecs = vecs[:, ::-1]
    vecs = np.column_stack([canonical_phase(vecs[:, i]) for i in range(vecs.shape[1])])
    return Spectrum(vals, vecs)


def psd_sqrt(rho):
    """Principal square root of a PSD Hermitian matrix via eigendecomposition.

    Negative eigenvalues and rounding noise are clamped to zero first.
    """
    spec = hermitian_eig(rho)
    return (spec.vectors * np.sqrt(clamp_spectrum(spec.values))) @ spec.vectors.conj().T


def clamp_spectrum(values):
    """Zero eigenvalues that are rounding noise (below 1e-14 of the largest).

    Square roots amplify that noise: a 1e-17 eigenvalue becomes 3e-9.
    """
    values = np.asarray(values, dtype=float)
    cutoff = 1e-14 * max(1.0, float(np.max(np.abs(values), initial=0.0)))
    return np.where(values > cutoff, values, 0.0)


def density_from_pairs(values, vectors):
    """sum_i values[i] |v_i><v_i| for vectors given as columns."""
    vectors = np.asarray(vectors, dtype=complex)
    values = np.asarray(values, dtype=float)
    rho = (vectors * values) @ vectors.conj().T
    return 0.5 * (rho + rho.conj().T)
