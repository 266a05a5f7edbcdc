"""Dense-matrix helpers and the seeded random number generator.

Matrices are numpy ``float64`` arrays in C (row-major) order; every public
operation takes and returns fresh arrays, so they are safe to share between
threads.  Randomness comes from :class:`Rng`, a thin owner of numpy's PCG64
bit generator: one 64-bit PCG64 output is consumed per uniform draw, which
makes draw sequences reproducible across platforms for a given seed.  Child
generators are branched by deriving a new seed with SplitMix64 rather than
by sharing state.
"""

from __future__ import annotations

import numpy as np

from .errors import ConfigError, ShapeError

MASK64 = 0xFFFFFFFFFFFFFFFF

Matrix = np.ndarray  # 2-D float64, row-major


def as_matrix(data) -> Matrix:
    """Coerce nested sequences / arrays to a 2-D float64 matrix."""
    m = np.asarray(data, dtype=np.float64)
    if m.ndim != 2:
        raise ShapeError(f"expected a 2-D matrix, got ndim={m.ndim}")
    return np.ascontiguousarray(m)


def matmul(a: Matrix, b: Matrix) -> Matrix:
    """Standard matrix product with an explicit conformance check."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 2 or b.ndim != 2:
        raise ShapeError(f"matmul needs 2-D operands, got {a.shape} and {b.shape}")
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"matmul shape mismatch: {a.shape} x {b.shape}")
    return a @ b


def sigmoid(z):
    """Logistic function 1 / (1 + e^-z), overflow-safe for any finite z.

    Negative arguments are computed as e^z / (1 + e^z), which is the same
    function but never exponentiates a large positive number.
    """
    z_arr = np.asarray(z, dtype=np.float64)
    out = np.empty_like(z_arr)
    pos = z_arr >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z_arr[pos]))
    ez = np.exp(z_arr[~pos])
    out[~pos] = ez / (1.0 + ez)
    if np.isscalar(z) or z_arr.ndim == 0:
        return float(out)
    return out


def splitmix64(x: int) -> int:
    """One SplitMix64 step (Steele/Lea/Flood mixing constants)."""
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_seed(seed: int, *tags: int) -> int:
    """Deterministically derive a child seed from ``seed`` and integer tags.

    Each tag is folded in with one SplitMix64 step, so (seed, tags) pairs
    that differ anywhere produce unrelated child seeds.
    """
    s = splitmix64(seed & MASK64)
    for t in tags:
        s = splitmix64((s ^ (t & MASK64)) & MASK64)
    return s


class Rng:
    """Seeded PCG64 generator; the single owner of its mutable state.

    Never share one instance between concurrent tasks: branch with
    :meth:`derive` instead.
    """

    def __init__(self, seed: int):
        seed = int(seed)
        if seed < 0:
            raise ConfigError(f"seed must be a non-negative integer, got {seed}")
        self.seed = seed & MASK64
        self._gen = np.random.Generator(np.random.PCG64(self.seed))

    def random(self, size=None):
        """Uniform draws in [0, 1); one 64-bit state advance per draw."""
        return self._gen.random(size)

    def uniform(self, lo: float, hi: float, n: int) -> np.ndarray:
        """``n`` independent draws in [lo, hi)."""
        if not lo < hi:
            raise ConfigError(f"uniform bounds must satisfy lo < hi, got [{lo}, {hi})")
        return lo + (hi - lo) * self._gen.random(int(n))

    def integers(self, lo: int, hi: int, size=None):
        """Integer draws in [lo, hi)."""
        return self._gen.integers(lo, hi, size=size)

    def normal(self, size=None):
        """Standard normal draws (variable state consumption)."""
        return self._gen.standard_normal(size)

    def choice_without_replacement(self, n: int, k: int) -> np.ndarray:
        """k distinct indices from range(n)."""
        return self._gen.choice(n, size=k, replace=False)

    def permutation(self, n: int) -> np.ndarray:
        """A uniformly random permutation of range(n)."""
        return self._gen.permutation(int(n))

    def derive(self, tag: int) -> "Rng":
        """A fresh generator whose seed is derived from (self.seed, tag)."""
        return Rng(derive_seed(self.seed, tag))


def uniform_in(rng: Rng, lo: float, hi: float, n: int) -> np.ndarray:
    """Draw ``n`` independent uniforms in [lo, hi) from ``rng``."""
    return rng.uniform(lo, hi, n)
