"""Seeded random states, perturbation vectors and bases.

Every generator is a ``numpy.random.Generator`` backed by Philox, a
counter-based bit generator, keyed from ``(seed, *stream)``. Two handles built
from the same key produce the same sequence on every platform, and distinct
stream ids give statistically independent streams, which is what lets trials
run in any order or process.
"""

import numpy as np

_PERTURBATION_SET = np.array([1 + 1j, 1 - 1j, -1 + 1j, -1 - 1j])


def make_rng(seed, *stream):
    """Return a reproducible generator for ``seed`` and an optional stream path.

    >>> a = make_rng(7, 3).standard_normal()
    >>> b = make_rng(7, 3).standard_normal()
    >>> a == b
    True
    """
    if seed < 0 or any(s < 0 for s in stream):
        raise ValueError("seed and stream ids must be non-negative")
    seq = np.random.SeedSequence(int(seed), spawn_key=tuple(int(s) for s in stream))
    return np.random.Generator(np.random.Philox(seq))


def complex_gaussian(rng, size):
    """I.i.d. complex normals with independent N(0, 1) real and imaginary parts."""
    return rng.standard_normal(size) + 1j * rng.standard_normal(size)


def _check_dim(d):
    if d < 2:
        raise ValueError(f"dimension must be >= 2, got {d}")


def ginibre_mixed_state(d, rank, rng):
    """Random density matrix G G^dag / tr(G G^dag) with G a d x rank Ginibre matrix.

    ``rank == d`` samples the Hilbert-Schmidt measure; ``rank == 1`` gives a
    Haar-random pure state.
    """
    _check_dim(d)
    if not 1 <= rank <= d:
        raise ValueError(f"rank must be in 1..{d}, got {rank}")
    g = complex_gaussian(rng, (d, rank))
    w = g @ g.conj().T
    w = 0.5 * (w + w.conj().T)
    return w / np.real(np.trace(w))


def haar_random_pure(d, rng):
    _check_dim(d)
    v = complex_gaussian(rng, d)
    return v / np.linalg.norm(v)


def perturbation_vector(d, rng):
    """Vector with entries drawn uniformly from {1+i, 1-i, -1+i, -1-i}."""
    _check_dim(d)
    return _PERTURBATION_SET[rng.integers(0, 4, size=d)]


def random_raw_vector(d, rng):
    _check_dim(d)
    return complex_gaussian(rng, d)


def haar_random_unitary(d, rng):
    """Haar unitary from the QR decomposition of a Ginibre matrix with the
    diagonal phases of R folded back in (Mezzadri's correction)."""
    _check_dim(d)
    q, r = np.linalg.qr(complex_gaussian(rng, (d, d)))
    diag = np.diag(r)
    return q * (diag / np.abs(diag))
