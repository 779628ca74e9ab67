"""Mutually unbiased bases and the argmax starting vector.

Prime dimensions get the complete Weyl-Heisenberg set of d + 1 bases. Other
dimensions get the exact MUBs available from tensor products of the prime
factors' sets, padded with Haar-random bases up to d + 1.
"""

from dataclasses import dataclass, field
from functools import reduce

import numpy as np

from .randgen import haar_random_unitary, make_rng

# fixed key for the padding bases so build_initializer_bases is a pure function of d
_PADDING_SEED = 0x5E6A_B45E


@dataclass(frozen=True)
class BasisSet:
    """``bases[i]`` is a d x d unitary whose columns are the i-th basis."""

    bases: tuple
    exact_count: int
    kind: str
    notes: dict = field(default_factory=dict)

    @property
    def count(self):
        return len(self.bases)

    @property
    def d(self):
        return self.bases[0].shape[0]

    def vectors(self):
        for i, b in enumerate(self.bases):
            for j in range(b.shape[1]):
                yield i, j, b[:, j]


def is_prime(n):
    if n < 2:
        return False
    f = 2
    while f * f <= n:
        if n % f == 0:
            return False
        f += 1
    return True


def prime_factors(n):
    out = []
    f = 2
    while n > 1:
        while n % f == 0:
            out.append(f)
            n //= f
        f += 1
    return out


def prime_mub(p):
    """Complete set of p + 1 MUBs for prime ``p``.

    Basis a (a = 0..p-1) has vectors v_b[x] = w^(a x^2 + b x) / sqrt(p) with
    w = exp(2 pi i / p); for p = 2 the quadratic phase becomes i^(a x).
    The computational basis comes first.
    """
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    x = np.arange(p)
    bases = [np.eye(p, dtype=complex)]
    for a in range(p):
        cols = []
        for b in range(p):
            if p == 2:
                v = (1j ** (a * x)) * (-1.0) ** (b * x)
            else:
                v = np.exp(2j * np.pi * ((a * x * x + b * x) % p) / p)
            cols.append(v / np.sqrt(p))
        bases.append(np.column_stack(cols))
    return bases


def build_initializer_bases(d, rng=None):
    if d < 2:
        raise ValueError(f"dimension must be >= 2, got {d}")
    if is_prime(d):
        return BasisSet(tuple(prime_mub(d)), d + 1, "complete-mub")

    factors = prime_factors(d)
    sets = [prime_mub(p) for p in factors]
    # index-matched tensor products of MUB sets stay mutually unbiased
    n_exact = min(len(s) for s in sets)
    bases = [reduce(np.kron, [s[k] for s in sets]) for k in range(n_exact)]
    if rng is None:
        rng = make_rng(_PADDING_SEED, d)
    while len(bases) < d + 1:
        bases.append(haar_random_unitary(d, rng))
    return BasisSet(
        tuple(bases),
        n_exact,
        "tensor-mub+haar-padding",
        {"factors": factors, "random_bases": d + 1 - n_exact},
    )


def select_initial_vector(dev, bases, shots=None, tie_tol=1e-12):
    """Measure every basis and return the basis vector with the largest
    estimated probability, together with the copies spent.

    Each basis is one d-outcome measurement costing ``shots`` copies, so the
    whole scan costs ``shots * (d + 1)``. Ties (within ``tie_tol``) go to the
    lowest (basis, vector) index.
    """
    if bases.d != dev.d:
        raise ValueError(f"basis dimension {bases.d} does not match device {dev.d}")
    before = dev.copies
    probs = np.array([dev.measure_basis(b, shots) for b in bases.bases])
    best = probs.max()
    flat = int(np.flatnonzero(probs.ravel() >= best - tie_tol)[0])
    i, j = divmod(flat, dev.d)
    return bases.bases[i][:, j].copy(), dev.copies - before
