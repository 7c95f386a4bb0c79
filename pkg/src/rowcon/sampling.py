"""Seeded point sets in the unit ball and random matrix helpers.

The ball sampler combines three pieces: the origin, scrambled Halton points
mapped uniformly in volume into the ball of radius ``ring_radius``, and a ring
of points on the sphere of that radius, where resolvents are worst
conditioned. The ring directions do not depend on the seed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import norm, qmc, unitary_group

__all__ = [
    "BallSampler",
    "as_ball_point",
    "random_unitary",
    "random_isometry",
    "random_strict_contraction",
    "random_matrix_ball_point",
]

DEFAULT_SEED = 20240611
DEFAULT_COUNT = 200
DEFAULT_RING_RADIUS = 0.9


def as_ball_point(z, d: int | None = None) -> np.ndarray:
    """Validate a point of the open unit ball and return it as a complex vector."""
    v = np.atleast_1d(np.asarray(z, dtype=complex)).ravel()
    if d is not None and v.size != d:
        raise ValueError(f"point has {v.size} coordinates, expected {d}")
    if not np.all(np.isfinite(v)) or np.vdot(v, v).real >= 1.0:
        raise ValueError("point is not in the open unit ball")
    return v


def _halton_to_sphere(u: np.ndarray, d: int) -> np.ndarray:
    """Map ``2d`` uniform coordinates to unit vectors of ``C^d``."""
    g = norm.ppf(np.clip(u[:, : 2 * d], 1e-12, 1 - 1e-12))
    z = g[:, :d] + 1j * g[:, d : 2 * d]
    return z / np.linalg.norm(z, axis=1, keepdims=True)


@dataclass(frozen=True)
class BallSampler:
    """Deterministic point set in ``B^d``.

    Parameters
    ----------
    d
        Number of variables.
    count
        Total number of points (at least 2).
    seed
        Scrambling seed for the interior points.
    ring_radius
        Radius of the boundary ring (must be below 1).
    include_origin
        Put ``0`` first.
    ring_fraction
        Share of the points placed on the ring.
    """

    d: int
    count: int = DEFAULT_COUNT
    seed: int = DEFAULT_SEED
    ring_radius: float = DEFAULT_RING_RADIUS
    include_origin: bool = True
    ring_fraction: float = 0.25

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("d must be positive")
        if self.count < 1:
            raise ValueError("count must be positive")
        if not 0.0 < self.ring_radius < 1.0:
            raise ValueError("ring radius must lie in (0, 1)")

    def with_count(self, count: int) -> "BallSampler":
        return BallSampler(
            self.d, count, self.seed, self.ring_radius, self.include_origin, self.ring_fraction
        )

    def points(self) -> np.ndarray:
        """Return a ``count x d`` complex array of points."""
        d = self.d
        n_origin = 1 if self.include_origin else 0
        n_rest = self.count - n_origin
        n_ring = int(round(self.ring_fraction * n_rest)) if n_rest > 1 else 0
        n_inner = n_rest - n_ring
        blocks = []
        if n_origin:
            blocks.append(np.zeros((1, d), dtype=complex))
        if n_inner:
            engine = qmc.Halton(2 * d + 1, scramble=True, seed=self.seed)
            u = engine.random(n_inner)
            radius = u[:, 2 * d] ** (1.0 / (2 * d))
            blocks.append(_halton_to_sphere(u, d) * radius[:, None] * self.ring_radius)
        if n_ring:
            engine = qmc.Halton(2 * d, scramble=False)
            u = engine.random(n_ring + 1)[1:]
            blocks.append(_halton_to_sphere(u, d) * self.ring_radius)
        return np.vstack(blocks)

    def __iter__(self):
        return iter(self.points())


def random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary; for ``n = 1`` a uniformly random phase."""
    if n == 1:
        return np.exp(2j * np.pi * rng.random()).reshape(1, 1)
    return unitary_group.rvs(n, random_state=rng)


def random_isometry(rows: int, cols: int, rng: np.random.Generator) -> np.ndarray:
    """``rows x cols`` matrix with orthonormal columns (``cols <= rows``)."""
    return random_unitary(rows, rng)[:, :cols]


def _ginibre(shape, rng: np.random.Generator) -> np.ndarray:
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def random_strict_contraction(
    rows: int, cols: int, rng: np.random.Generator, max_norm: float = 0.95
) -> np.ndarray:
    """Random matrix with spectral norm uniform in ``[0, max_norm)``."""
    A = _ginibre((rows, cols), rng)
    s = np.linalg.norm(A, 2) if A.size else 1.0
    return A / s * max_norm * rng.random()


def random_matrix_ball_point(
    d: int, m: int, rng: np.random.Generator, max_norm: float = 0.9
) -> np.ndarray:
    """Random ``(d, m, m)`` tuple whose block row has norm below ``max_norm``."""
    Z = _ginibre((d, m, m), rng)
    row = np.hstack(list(Z))
    return Z / np.linalg.norm(row, 2) * max_norm * (0.2 + 0.8 * rng.random())
