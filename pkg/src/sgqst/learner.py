"""Self-guided learning of a mixed state, one eigenvector at a time.

The dominant eigenvector is found by SPSA ascent of <phi|rho|phi> starting
from the best mutually-unbiased basis vector. Each further eigenvector is
learned the same way from a random start in the orthogonal complement of the
vectors found so far, with their projector subtracted from the objective so
the ascent is pushed away from them. Learning stops once the estimated
eigenvalues account for (almost) all of the trace; the vectors are then
orthonormalized and the eigenvalues fixed up into a valid spectrum.
"""

from dataclasses import asdict, dataclass, field

import numpy as np

from .core import Spectrum, canonical_phase, density_from_pairs
from .mub import build_initializer_bases, select_initial_vector
from .randgen import make_rng, perturbation_vector, random_raw_vector

STANDARD = "standard"
NOISE_AWARE = "noise-aware"
NORMALIZATION_MODES = (STANDARD, NOISE_AWARE)
FILL_RESIDUAL = "residual"
FILL_RENORMALIZE = "renormalize"
TRUNCATION_FILLS = (FILL_RESIDUAL, FILL_RENORMALIZE)

MAX_RESAMPLES = 8
ZERO_NORM = 1e-12


class ZeroNormUpdate(ArithmeticError):
    """A perturbed or updated vector cancelled to (numerically) zero."""


class DependentVectorsError(ValueError):
    def __init__(self, index):
        super().__init__(f"vector {index} is linearly dependent on the preceding vectors")
        self.index = index


@dataclass(frozen=True)
class GainSchedule:
    """Step sizes alpha_k = alpha_scale / k^alpha_exponent and
    beta_k = beta_scale / k^beta_exponent (Spall's standard exponents).

    ``alpha_scale = 0`` freezes the learning vector, which is only useful as a
    diagnostic for the eigenvalue estimator.
    """

    alpha_scale: float = 1.0
    alpha_exponent: float = 0.602
    beta_scale: float = 0.1
    beta_exponent: float = 0.101

    def __post_init__(self):
        if self.alpha_scale < 0 or self.beta_scale <= 0:
            raise ValueError("gain scales must be positive")

    def __call__(self, k):
        if k < 1:
            raise ValueError(f"iteration index must be >= 1, got {k}")
        return self.alpha_scale / k**self.alpha_exponent, self.beta_scale / k**self.beta_exponent


DEFAULT_GAINS = GainSchedule()


def gains(k, schedule=DEFAULT_GAINS):
    return schedule(k)


@dataclass(frozen=True)
class LearnerConfig:
    d: int
    N: int
    K: int
    epsilon: float = 1e-4
    normalization: str = STANDARD
    seed: int = 0
    schedule: GainSchedule = DEFAULT_GAINS
    truncation_fill: str = FILL_RESIDUAL

    def __post_init__(self):
        if self.d < 2:
            raise ValueError(f"d must be >= 2, got {self.d}")
        if self.K < 1 or self.N < 1:
            raise ValueError("K and N must be >= 1")
        if not 0 < self.epsilon < 1:
            raise ValueError(f"epsilon must be in (0, 1), got {self.epsilon}")
        if self.normalization not in NORMALIZATION_MODES:
            raise ValueError(f"normalization must be one of {NORMALIZATION_MODES}")
        if self.truncation_fill not in TRUNCATION_FILLS:
            raise ValueError(f"truncation_fill must be one of {TRUNCATION_FILLS}")

    def total_copies(self):
        """Copies consumed by a complete run: N (d + 1) for the basis scan plus
        2NK for each of the d eigenvector slots (learned or re-measured)."""
        return self.N * (self.d * (2 * self.K + 1) + 1)

    def to_dict(self):
        return asdict(self)


@dataclass
class EigenpairEstimate:
    vector: np.ndarray
    value: float
    trace: list = None


@dataclass(frozen=True)
class Snapshot:
    """Estimate available after ``iteration`` SPSA steps in total
    (``local_iteration`` of them in eigenvector phase ``phase``)."""

    iteration: int
    phase: int
    local_iteration: int
    rho_hat: np.ndarray


@dataclass
class TomographyResult:
    rho_hat: np.ndarray
    spectrum: Spectrum
    r_hat: int
    copies_used: int
    config: LearnerConfig
    raw_values: list
    metadata: dict = field(default_factory=dict)
    snapshots: list = field(default_factory=list)


def perturbed_states(phi, delta, beta):
    """Normalized phi + beta*delta and phi - beta*delta."""
    if beta <= 0:
        raise ValueError("beta must be positive")
    out = []
    for x in (phi + beta * delta, phi - beta * delta):
        n = np.linalg.norm(x)
        if n < ZERO_NORM:
            raise ZeroNormUpdate("perturbed vector vanished; resample delta")
        out.append(x / n)
    return out[0], out[1]


def _prior_matrix(prior, d):
    if prior is None or len(prior) == 0:
        return np.zeros((d, 0), dtype=complex)
    if isinstance(prior, np.ndarray) and prior.ndim == 2:
        return prior
    return np.column_stack(prior)


def _measure(dev, eta, prior, shots=None):
    raw = dev.expectation(eta, shots)
    overlap = float(np.sum(np.abs(prior.conj().T @ eta) ** 2)) if prior.shape[1] else 0.0
    return raw, raw - overlap


def deflated_mu(dev, eta, prior, shots=None):
    """Measured <eta|rho|eta> minus sum_j |<eta|psi_j>|^2 over earlier eigenvectors.

    The overlap term is computed classically; only one query hits the device.
    """
    return _measure(dev, eta, _prior_matrix(prior, dev.d), shots)[1]


def spsa_gradient(mu_plus, mu_minus, beta, delta):
    if beta <= 0:
        raise ValueError("beta must be positive")
    return ((mu_plus - mu_minus) / (2.0 * beta)) * np.asarray(delta)


def spsa_update(phi, gradient, alpha):
    if alpha < 0:
        raise ValueError("alpha must be non-negative")
    y = phi + alpha * gradient
    n = np.linalg.norm(y)
    if n < ZERO_NORM:
        raise ZeroNormUpdate("update vanished")
    return y / n


def learn_eigenvector(dev, phi0, prior, cfg, rng, *, on_step=None, record_trace=False):
    """Run K SPSA iterations and return the learned vector and its eigenvalue.

    The eigenvalue is the average of all 2K raw (non-deflated) measured
    expectations. ``on_step(k, phi, q)`` is called after every iteration with
    the running accumulator q.
    """
    d = dev.d
    prior = _prior_matrix(prior, d)
    phi = np.asarray(phi0, dtype=complex)
    q = 0.0
    trace = [] if record_trace else None
    for k in range(1, cfg.K + 1):
        alpha, beta = cfg.schedule(k)
        for _ in range(MAX_RESAMPLES):
            delta = perturbation_vector(d, rng)
            try:
                eta_plus, eta_minus = perturbed_states(phi, delta, beta)
                break
            except ZeroNormUpdate:
                continue
        else:
            # pathological: nothing measured, iteration skipped
            if on_step is not None:
                on_step(k, phi, q)
            continue
        raw_plus, mu_plus = _measure(dev, eta_plus, prior, cfg.N)
        raw_minus, mu_minus = _measure(dev, eta_minus, prior, cfg.N)
        g = spsa_gradient(mu_plus, mu_minus, beta, delta)
        try:
            phi = spsa_update(phi, g, alpha)
        except ZeroNormUpdate:
            pass
        q += raw_plus + raw_minus
        if trace is not None:
            trace.append(q / (2 * k))
        if on_step is not None:
            on_step(k, phi, q)
    return EigenpairEstimate(phi, q / (2 * cfg.K), trace)


def nullspace_init(prior, rng, d=None):
    """Random unit vector orthogonal to every vector in ``prior``."""
    if d is None:
        if not prior:
            raise ValueError("dimension required when prior is empty")
        d = len(prior[0])
    p = _prior_matrix(prior, d)
    if p.shape[1] >= d:
        raise ValueError("prior vectors span the whole space")
    while True:
        v = random_raw_vector(d, rng)
        if p.shape[1]:
            # project twice; one pass leaves ~1e-16 relative leakage that can
            # exceed the orthogonality tolerance for near-dependent priors
            v = v - p @ (p.conj().T @ v)
            v = v - p @ (p.conj().T @ v)
        n = np.linalg.norm(v)
        if n >= 1e-8:
            return v / n


def orthonormalize(vectors):
    """Modified Gram-Schmidt, keeping <out_i|in_i> real and positive."""
    out = []
    for i, v in enumerate(vectors):
        w = np.array(v, dtype=complex)
        scale = np.linalg.norm(w)
        for u in out:
            w = w - np.vdot(u, w) * u
        # re-orthogonalize once for stability
        for u in out:
            w = w - np.vdot(u, w) * u
        n = np.linalg.norm(w)
        if scale == 0 or n < 1e-6 * scale:
            raise DependentVectorsError(i)
        out.append(w / n)
    return out


def _noise_aware(values, fill=FILL_RESIDUAL):
    """Keep the largest estimate as measured, divide the rest by the total and
    cut the list at the last index whose running sum stays <= 1.

    The cut leaves trace below one. ``fill="residual"`` gives the missing
    weight to the first dropped eigenvalue (it is smaller than that value by
    construction); ``fill="renormalize"`` rescales the kept values instead.
    """
    s = float(np.sum(values))
    cand = np.concatenate([values[:1], values[1:] / s])
    cum = np.cumsum(cand)
    t = max(1, int(np.searchsorted(cum, 1.0, side="right")))
    kept = cand[:t]
    if fill == FILL_RESIDUAL and t < len(cand):
        rest = 1.0 - kept.sum()
        if rest > 0:
            kept = np.append(kept, rest)
    return kept / kept.sum()


def finalize_eigenvalues(dev, basis, raw_values, r_hat, cfg):
    """Turn the learned eigenvalue estimates into a unit-trace spectrum.

    Full rank: the estimates are normalized. Rank deficient: each basis vector
    is re-measured with an even share of the 2NK(d - r_hat) copies a full-rank
    run would have spent, and those frequencies are normalized. In noise-aware
    mode the largest value is kept as measured, the rest are divided by the
    total, and the tail is cut where the running sum would exceed one (see
    ``_noise_aware`` for how the lost weight is restored).
    """
    vectors = list(basis)
    if len(vectors) != r_hat:
        raise ValueError(f"basis has {len(vectors)} vectors, r_hat is {r_hat}")
    d = cfg.d
    values = np.clip(np.asarray(raw_values, dtype=float), 0.0, None)
    if r_hat < d:
        total = 2 * cfg.N * cfg.K * (d - r_hat)
        share, extra = divmod(total, r_hat)
        remeasured = []
        for i, v in enumerate(vectors):
            n = share + (1 if i < extra else 0)
            remeasured.append(dev.expectation(v, n) if n > 0 else values[i])
        values = np.asarray(remeasured, dtype=float)
    if not np.any(values > 0):
        raise ValueError("all eigenvalue estimates are zero")
    if cfg.normalization == NOISE_AWARE:
        values = _noise_aware(values, cfg.truncation_fill)
        vectors = vectors[: len(values)]
    else:
        values = values / values.sum()
    order = np.argsort(-values, kind="stable")
    vecs = np.column_stack([canonical_phase(vectors[i]) for i in order])
    return Spectrum(values[order], vecs)


def _completed_estimate(vectors, values, d):
    """Provisional estimate mid-run: learned pairs, with any unassigned
    weight spread evenly over their orthogonal complement."""
    try:
        basis = orthonormalize(vectors)
    except DependentVectorsError as exc:
        basis = orthonormalize(vectors[: exc.index])
        values = values[: exc.index]
    vals = np.clip(np.asarray(values, dtype=float), 0.0, None)
    m = len(basis)
    if m == d or vals.sum() >= 1.0:
        if vals.sum() == 0:
            return np.eye(d, dtype=complex) / d
        return density_from_pairs(vals / vals.sum(), np.column_stack(basis))
    b = np.column_stack(basis)
    rest = (1.0 - vals.sum()) / (d - m)
    complement = np.eye(d) - b @ b.conj().T
    rho = density_from_pairs(vals, b) + rest * complement
    return 0.5 * (rho + rho.conj().T)


def learn_state(dev, cfg, *, rng=None, bases=None, checkpoints=()):
    """Estimate the device's hidden state.

    ``checkpoints`` are cumulative SPSA iteration counts at which a
    provisional estimate is stored in ``result.snapshots``; checkpoints past
    the end of the run receive the final estimate.
    """
    if dev.d != cfg.d:
        raise ValueError(f"device dimension {dev.d} != configured {cfg.d}")
    if rng is None:
        rng = make_rng(cfg.seed)
    d = cfg.d
    if bases is None:
        bases = build_initializer_bases(d)
    wanted = sorted(set(int(c) for c in checkpoints))
    pending = list(wanted)
    snapshots = []

    phi0, _ = select_initial_vector(dev, bases, cfg.N)
    vectors, values = [], []
    i = 1
    while True:
        offset = (i - 1) * cfg.K

        def on_step(k, phi, q, i=i, offset=offset):
            while pending and pending[0] == offset + k:
                est = _completed_estimate(vectors + [phi], values + [q / (2 * k)], d)
                snapshots.append(Snapshot(offset + k, i, k, est))
                pending.pop(0)

        est = learn_eigenvector(dev, phi0, vectors, cfg, rng, on_step=on_step if pending else None)
        vectors.append(est.vector)
        values.append(est.value)
        if i >= d or sum(values) > 1.0 - cfg.epsilon:
            break
        i += 1
        phi0 = nullspace_init(vectors, rng, d)

    r_learned = len(vectors)
    basis = orthonormalize(vectors)
    spectrum = finalize_eigenvalues(dev, basis, values, r_learned, cfg)
    rho_hat = density_from_pairs(spectrum.values, spectrum.vectors)

    done = r_learned * cfg.K
    for c in pending:
        snapshots.append(Snapshot(c, r_learned, c - (r_learned - 1) * cfg.K if c <= done else cfg.K, rho_hat))

    metadata = {
        "initializer": bases.kind,
        "exact_mub_count": bases.exact_count,
        "normalization": cfg.normalization,
        "learned_eigenvectors": r_learned,
    }
    return TomographyResult(
        rho_hat=rho_hat,
        spectrum=spectrum,
        r_hat=len(spectrum),
        copies_used=dev.copies,
        config=cfg,
        raw_values=[float(v) for v in values],
        metadata=metadata,
        snapshots=snapshots,
    )
