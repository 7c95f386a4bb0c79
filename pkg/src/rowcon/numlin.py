"""Tolerance-aware dense complex linear algebra.

All rank decisions in the package go through the singular values of a matrix
compared against ``rank_rel_tol`` times the largest singular value, so every
verdict is invariant under rescaling of the input.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as spla

from .errors import NotPSD, ShapeMismatch

__all__ = [
    "TolerancePolicy",
    "DEFAULT_TOL",
    "Subspace",
    "as_cmat",
    "range_basis",
    "null_basis",
    "herm_sqrt",
    "pinv",
    "procrustes_unitary",
    "spectral_norm",
]


@dataclass(frozen=True)
class TolerancePolicy:
    """Numerical thresholds used throughout the package.

    Parameters
    ----------
    rank_rel_tol
        Singular values below ``rank_rel_tol * sigma_max`` count as zero.
    residual_tol
        Absolute bound for identity residuals.
    psd_tol
        Largest negative eigenvalue tolerated in a positive semidefinite test.
    """

    rank_rel_tol: float = 1e-9
    residual_tol: float = 1e-8
    psd_tol: float = 1e-8

    def __post_init__(self):
        for name in ("rank_rel_tol", "residual_tol", "psd_tol"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be strictly positive, got {value!r}")

    def as_dict(self) -> dict:
        return {
            "rank_rel_tol": self.rank_rel_tol,
            "residual_tol": self.residual_tol,
            "psd_tol": self.psd_tol,
        }


DEFAULT_TOL = TolerancePolicy()


def as_cmat(M, rows: int | None = None, cols: int | None = None) -> np.ndarray:
    """Return ``M`` as a 2-D complex array, validating finiteness and shape.

    Scalars become ``1 x 1`` matrices and vectors become columns.
    """
    A = np.asarray(M, dtype=complex)
    if A.ndim == 0:
        A = A.reshape(1, 1)
    elif A.ndim == 1:
        A = A.reshape(-1, 1)
    if A.ndim != 2:
        raise ShapeMismatch(f"expected a matrix, got an array of shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    if rows is not None and A.shape[0] != rows:
        raise ShapeMismatch(f"expected {rows} rows, got {A.shape[0]}")
    if cols is not None and A.shape[1] != cols:
        raise ShapeMismatch(f"expected {cols} columns, got {A.shape[1]}")
    return A


def spectral_norm(M) -> float:
    """Largest singular value (0 for empty matrices)."""
    A = np.asarray(M)
    if A.size == 0:
        return 0.0
    return float(np.linalg.norm(A, 2))


def _svd(A: np.ndarray):
    try:
        return np.linalg.svd(A, full_matrices=True)
    except np.linalg.LinAlgError:
        return spla.svd(A, full_matrices=True, lapack_driver="gesvd")


def _numerical_rank(s: np.ndarray, tol: TolerancePolicy) -> int:
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.count_nonzero(s > tol.rank_rel_tol * s[0]))


@dataclass(frozen=True, eq=False)
class Subspace:
    """A linear subspace of ``C^ambient_dim`` held by an orthonormal basis.

    The basis is an ``ambient_dim x dim`` matrix with orthonormal columns.
    """

    ambient_dim: int
    basis: np.ndarray
    tol: TolerancePolicy = field(default=DEFAULT_TOL, compare=False)

    def __post_init__(self):
        B = np.asarray(self.basis, dtype=complex).reshape(self.ambient_dim, -1)
        B.setflags(write=False)
        object.__setattr__(self, "basis", B)

    @classmethod
    def zero(cls, ambient_dim: int, tol: TolerancePolicy = DEFAULT_TOL) -> "Subspace":
        return cls(ambient_dim, np.zeros((ambient_dim, 0), dtype=complex), tol)

    @classmethod
    def full(cls, ambient_dim: int, tol: TolerancePolicy = DEFAULT_TOL) -> "Subspace":
        return cls(ambient_dim, np.eye(ambient_dim, dtype=complex), tol)

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    @property
    def is_full(self) -> bool:
        return self.dim == self.ambient_dim

    def projector(self) -> np.ndarray:
        return self.basis @ self.basis.conj().T

    def residual(self, vectors) -> float:
        """Largest norm of ``(I - P) v`` over the columns ``v`` of ``vectors``."""
        X = as_cmat(vectors, rows=self.ambient_dim)
        if X.shape[1] == 0:
            return 0.0
        R = X - self.basis @ (self.basis.conj().T @ X)
        return float(np.max(np.linalg.norm(R, axis=0)))

    def contains(self, other: "Subspace | np.ndarray", atol: float | None = None) -> bool:
        """Containment test by projection residual of the other basis."""
        atol = self.tol.residual_tol if atol is None else atol
        X = other.basis if isinstance(other, Subspace) else other
        return self.residual(X) <= atol

    def complement(self) -> "Subspace":
        if self.dim == 0:
            return Subspace.full(self.ambient_dim, self.tol)
        U, _, _ = np.linalg.svd(self.basis, full_matrices=True)
        return Subspace(self.ambient_dim, U[:, self.dim:], self.tol)

    def join(self, other: "Subspace") -> "Subspace":
        """Smallest subspace containing both."""
        if other.ambient_dim != self.ambient_dim:
            raise ShapeMismatch("ambient dimensions differ")
        return range_basis(np.hstack([self.basis, other.basis]), self.tol)

    def meet(self, other: "Subspace") -> "Subspace":
        """Intersection, computed as the complement of the joined complements."""
        return self.complement().join(other.complement()).complement()

    def max_angle(self, other: "Subspace") -> float:
        """Largest principal angle; ``pi/2`` if the dimensions differ."""
        if self.dim != other.dim:
            return float(np.pi / 2)
        if self.dim == 0:
            return 0.0
        return float(np.max(spla.subspace_angles(self.basis, other.basis)))

    def equals(self, other: "Subspace", atol: float | None = None) -> bool:
        atol = self.tol.residual_tol if atol is None else atol
        return (
            self.dim == other.dim
            and self.contains(other, atol)
            and other.contains(self, atol)
        )


def range_basis(M, tol: TolerancePolicy = DEFAULT_TOL) -> Subspace:
    """Orthonormal basis of the numerical column space of ``M``."""
    A = as_cmat(M)
    m, k = A.shape
    if k == 0 or m == 0:
        return Subspace.zero(m, tol)
    U, s, _ = _svd(A)
    r = _numerical_rank(s, tol)
    return Subspace(m, U[:, :r], tol)


def null_basis(M, tol: TolerancePolicy = DEFAULT_TOL) -> Subspace:
    """Orthonormal basis of the numerical kernel of ``M``.

    ``range_basis(M).dim + null_basis(M).dim`` always equals ``M.shape[1]``.
    """
    A = as_cmat(M)
    m, k = A.shape
    if k == 0:
        return Subspace.zero(0, tol)
    if m == 0:
        return Subspace.full(k, tol)
    _, s, Vh = _svd(A)
    r = _numerical_rank(s, tol)
    return Subspace(k, Vh[r:, :].conj().T, tol)


def herm_sqrt(P, tol: TolerancePolicy = DEFAULT_TOL) -> np.ndarray:
    """Positive square root of a Hermitian positive semidefinite matrix.

    The input is symmetrized first; eigenvalues in ``[-psd_tol, 0)`` are
    clipped to zero and anything more negative raises :class:`NotPSD`.
    """
    A = as_cmat(P)
    if A.shape[0] != A.shape[1]:
        raise ShapeMismatch("herm_sqrt needs a square matrix")
    if A.size == 0:
        return A.copy()
    H = 0.5 * (A + A.conj().T)
    w, U = np.linalg.eigh(H)
    if w[0] < -tol.psd_tol:
        raise NotPSD(
            f"minimum eigenvalue {w[0]:.3e} is below -psd_tol={tol.psd_tol:.1e}",
            min_eig=float(w[0]),
        )
    root = np.sqrt(np.clip(w, 0.0, None))
    return (U * root) @ U.conj().T


def pinv(M, tol: TolerancePolicy = DEFAULT_TOL) -> np.ndarray:
    """Moore-Penrose pseudoinverse with the relative rank cutoff."""
    A = as_cmat(M)
    m, k = A.shape
    if A.size == 0:
        return np.zeros((k, m), dtype=complex)
    U, s, Vh = np.linalg.svd(A, full_matrices=False)
    r = _numerical_rank(s, tol)
    return (Vh[:r].conj().T / s[:r]) @ U[:, :r].conj().T


def procrustes_unitary(A, B) -> tuple[np.ndarray, float]:
    """Unitary ``U`` minimizing ``||U A - B||_F``.

    The minimizer is the unitary polar factor of ``B A^*``.

    Returns
    -------
    U : ndarray
        Square unitary of size ``A.shape[0]``.
    residual : float
        The achieved Frobenius residual.
    """
    A = as_cmat(A)
    B = as_cmat(B)
    if A.shape != B.shape:
        raise ShapeMismatch(f"shapes {A.shape} and {B.shape} differ")
    W, _, Zh = np.linalg.svd(B @ A.conj().T)
    U = W @ Zh
    return U, float(np.linalg.norm(U @ A - B))
