"""Minimal numeric kernel: SPD factorization/solves and a portable PRNG.

The random generator is pinned so that datasets generated from a seed are
bit-identical across platforms and across independent implementations:

* u64 stream: SplitMix64 (Steele, Lea & Flood, "Fast splittable pseudorandom
  number generators", OOPSLA 2014; the java.util.SplittableRandom finalizer).
  state' = state + 0x9E3779B97F4A7C15;
  z = state'; z ^= z >> 30; z *= 0xBF58476D1CE4E5B9;
  z ^= z >> 27; z *= 0x94D049BB133111EB; z ^= z >> 31.
* uniforms use the top 53 bits: u1 = ((x >> 11) + 1) * 2^-53 in (0, 1],
  u2 = (x >> 11) * 2^-53 in [0, 1).
* one normal draw is the trigonometric Box-Muller transform
  z = sqrt(-2 ln u1) * cos(2 pi u2), always consuming exactly two u64 draws
  so downstream streams stay aligned no matter the sigma.
* bounded integers use rejection sampling (no modulo bias); shuffles are
  Fisher-Yates from the top index down.

All linear algebra is float64; 32-bit floats appear only at the file boundary.
The Cholesky factor is computed by numpy and the triangular solves by scipy;
the contracts (ridge policy, symmetry check, no explicit inverse anywhere)
live in this wrapper and are tested against explicit-inverse oracles.
"""

import numpy as np
from scipy.linalg import solve_triangular

from .errors import DimensionMismatch, NotPositiveDefinite

__all__ = [
    "Prng",
    "SpdFactor",
    "cholesky",
    "default_ridge",
    "gaussian",
    "quad_form",
    "spd_solve",
]

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
_TWO53 = float(1 << 53)


class Prng:
    """SplitMix64 generator. Single-owner: never share across threads."""

    def __init__(self, seed):
        self.state = int(seed) & _MASK64

    def next_u64(self):
        self.state = (self.state + _GOLDEN) & _MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * _MIX1) & _MASK64
        z = ((z ^ (z >> 27)) * _MIX2) & _MASK64
        return z ^ (z >> 31)

    def next_below(self, n):
        """Uniform integer in [0, n), rejection-sampled to avoid modulo bias."""
        if n <= 0:
            raise ValueError("n must be positive")
        limit = (_MASK64 + 1) - ((_MASK64 + 1) % n)
        while True:
            x = self.next_u64()
            if x < limit:
                return x % n

    def shuffle(self, items):
        """In-place Fisher-Yates shuffle of a list."""
        for i in range(len(items) - 1, 0, -1):
            j = self.next_below(i + 1)
            items[i], items[j] = items[j], items[i]


def gaussian(p, mu, sigma):
    """One N(mu, sigma^2) draw via Box-Muller. Consumes exactly two u64 draws.

    sigma = 0 returns mu exactly (the z factor is always finite).
    """
    if sigma < 0:
        raise ValueError("sigma must be >= 0")
    u1 = ((p.next_u64() >> 11) + 1) / _TWO53  # in (0, 1], so log is finite
    u2 = (p.next_u64() >> 11) / _TWO53  # in [0, 1)
    z = np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2)
    return mu + sigma * z


class SpdFactor:
    """Lower-triangular Cholesky factor L of (M + ridge * I)."""

    def __init__(self, lower, ridge):
        self.lower = lower
        self.ridge = ridge
        self.dim = lower.shape[0]


def default_ridge(m):
    """Scale-aware ridge: 1e-6 * mean diagonal, with a floor for zero trace.

    A zero-scatter matrix (one sample per class) carries no scale information,
    so the multiplicative rule would return 0 and fail to regularize; fall
    back to 1e-6 at unit scale in that case.
    """
    tr = float(np.trace(m))
    dim = m.shape[0]
    return 1e-6 * (tr / dim) if tr > 0 else 1e-6


def cholesky(m, ridge):
    """Factor (m + ridge * I). m must be square and symmetric within 1e-10."""
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise NotPositiveDefinite("matrix has non-finite entries")
    if np.max(np.abs(m - m.T), initial=0.0) > 1e-10:
        raise NotPositiveDefinite("matrix is not symmetric within 1e-10")
    if ridge < 0:
        raise ValueError("ridge must be >= 0")
    regularized = m + ridge * np.eye(m.shape[0])
    try:
        lower = np.linalg.cholesky(regularized)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(
            "factorization failed; covariance is degenerate even after ridge"
        ) from exc
    return SpdFactor(lower, ridge)


def _check_dim(f, v):
    v = np.asarray(v, dtype=np.float64)
    if v.shape != (f.dim,):
        raise DimensionMismatch(f"vector has shape {v.shape}, factor dim {f.dim}")
    return v


def quad_form(f, v):
    """v^T (M + ridge I)^-1 v via one forward triangular solve; always >= 0."""
    v = _check_dim(f, v)
    y = solve_triangular(f.lower, v, lower=True)
    return float(y @ y)


def spd_solve(f, v):
    """(M + ridge I)^-1 v via two triangular solves; no explicit inverse."""
    v = _check_dim(f, v)
    y = solve_triangular(f.lower, v, lower=True)
    return solve_triangular(f.lower.T, y, lower=False)
