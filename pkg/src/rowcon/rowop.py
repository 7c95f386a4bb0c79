"""Row contractions, their defect operators and point actions.

A row contraction ``T = (T_1, ..., T_d)`` on ``C^n`` is stored as a
``(d, n, n)`` array of blocks and viewed as the ``n x nd`` block row
``[T_1 ... T_d]`` mapping ``C^n (x) C^d`` (block-major layout) into ``C^n``.

Conjugation conventions
-----------------------
For a ball point ``z`` the map ``z^*`` sends ``h`` to the column of blocks
``(conj(z_1) h, ..., conj(z_d) h)``, hence ``T z^* = sum_k conj(z_k) T_k``.
Acting as a row, ``z`` sends ``(h_1, ..., h_d)`` to ``sum_k z_k h_k`` without
conjugation, hence ``z T^* = sum_k z_k T_k^*``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import NotPartialIsometry, ShapeMismatch, Singular
from .numlin import (
    DEFAULT_TOL,
    Subspace,
    TolerancePolicy,
    as_cmat,
    herm_sqrt,
    null_basis,
    range_basis,
    spectral_norm,
)
from .sampling import as_ball_point

__all__ = [
    "RowContraction",
    "IsoPureParts",
    "row_norm",
    "defect",
    "defect_adj",
    "defect_range",
    "defect_adj_range",
    "resolvent",
    "resolvents",
    "apply_point_adjoint",
    "point_row",
    "point_adjoint",
    "pairing",
    "word_apply",
    "sym_monomial",
    "iso_pure_decompose",
    "is_partial_isometry",
    "is_commuting",
    "restricted_range_space",
]


class RowContraction:
    """Immutable ``d``-tuple of ``n x n`` complex matrices with row norm at most one.

    Parameters
    ----------
    blocks
        Sequence of ``d`` square matrices of equal size, or a ``(d, n, n)`` array.
    tol
        Tolerance policy; contractivity is checked against ``1 + residual_tol``.
    check
        Validate contractivity (disable only for intermediate objects whose
        contractivity is guaranteed by construction).
    """

    __slots__ = ("_blocks", "tol", "_row")

    def __init__(self, blocks, tol: TolerancePolicy = DEFAULT_TOL, check: bool = True):
        arr = np.asarray(blocks, dtype=complex)
        if arr.ndim == 2:
            arr = arr[None, :, :]
        if arr.ndim != 3 or arr.shape[1] != arr.shape[2]:
            raise ShapeMismatch(f"blocks must be d square matrices, got shape {arr.shape}")
        if arr.shape[0] < 1:
            raise ShapeMismatch("at least one block is required")
        if not np.all(np.isfinite(arr)):
            raise ValueError("blocks contain non-finite entries")
        arr = arr.copy()
        arr.setflags(write=False)
        self._blocks = arr
        self.tol = tol
        row = np.hstack(list(arr))
        row.setflags(write=False)
        self._row = row
        if check:
            norm = spectral_norm(row)
            if norm > 1.0 + tol.residual_tol:
                raise ValueError(f"not a row contraction: row norm {norm:.12g} exceeds 1")

    @classmethod
    def from_row(cls, row, d: int, tol: TolerancePolicy = DEFAULT_TOL, check: bool = True):
        """Build from an ``n x nd`` block row."""
        R = as_cmat(row)
        n = R.shape[0]
        if R.shape[1] != n * d:
            raise ShapeMismatch(f"row of shape {R.shape} is not n x nd with d={d}")
        return cls([R[:, k * n : (k + 1) * n] for k in range(d)], tol, check)

    @property
    def blocks(self) -> np.ndarray:
        return self._blocks

    @property
    def d(self) -> int:
        return self._blocks.shape[0]

    @property
    def n(self) -> int:
        return self._blocks.shape[1]

    @property
    def row(self) -> np.ndarray:
        """The ``n x nd`` block row ``[T_1 ... T_d]``."""
        return self._row

    @property
    def column_adjoint(self) -> np.ndarray:
        """The ``nd x n`` column ``T^*`` with blocks ``T_k^*``."""
        return self._row.conj().T

    def __getitem__(self, k: int) -> np.ndarray:
        return self._blocks[k]

    def __len__(self) -> int:
        return self.d

    def conjugate_by(self, U) -> "RowContraction":
        """Return ``(U T_1 U^*, ..., U T_d U^*)``."""
        U = as_cmat(U, rows=self.n, cols=self.n)
        return RowContraction([U @ B @ U.conj().T for B in self._blocks], self.tol, check=False)

    def with_tol(self, tol: TolerancePolicy) -> "RowContraction":
        return RowContraction(self._blocks, tol, check=False)

    def __repr__(self) -> str:
        return f"RowContraction(n={self.n}, d={self.d}, row_norm={row_norm(self):.6g})"


@dataclass(frozen=True, eq=False)
class IsoPureParts:
    """The decomposition ``T = V - C`` into a row partial isometry and a pure part.

    ``initial_space`` is the kernel of ``D_T`` inside ``C^{nd}`` and
    ``final_space`` is ``ran V``.
    """

    V: RowContraction
    C: RowContraction
    initial_space: Subspace
    final_space: Subspace


def row_norm(T: RowContraction) -> float:
    """Largest singular value of the block row."""
    return spectral_norm(T.row)


def _tol(T: RowContraction, tol: TolerancePolicy | None) -> TolerancePolicy:
    return T.tol if tol is None else tol


def defect(T: RowContraction, tol: TolerancePolicy | None = None) -> np.ndarray:
    """``D_T = sqrt(I_{nd} - T^* T)``."""
    R = T.row
    return herm_sqrt(np.eye(R.shape[1]) - R.conj().T @ R, _tol(T, tol))


def defect_adj(T: RowContraction, tol: TolerancePolicy | None = None) -> np.ndarray:
    """``D_{T^*} = sqrt(I_n - T T^*)``."""
    R = T.row
    return herm_sqrt(np.eye(R.shape[0]) - R @ R.conj().T, _tol(T, tol))


def defect_range(T: RowContraction, tol: TolerancePolicy | None = None) -> Subspace:
    """``ran D_T``, decided on ``D_T^2`` so round-off is not amplified by the root."""
    R = T.row
    return range_basis(np.eye(R.shape[1]) - R.conj().T @ R, _tol(T, tol))


def defect_adj_range(T: RowContraction, tol: TolerancePolicy | None = None) -> Subspace:
    """``ran D_{T^*}``, decided on ``D_{T^*}^2``."""
    R = T.row
    return range_basis(np.eye(R.shape[0]) - R @ R.conj().T, _tol(T, tol))


def pairing(z, w) -> complex:
    """``z w^* = sum_k z_k conj(w_k)``."""
    return complex(np.sum(np.asarray(z) * np.conj(np.asarray(w))))


def point_adjoint(z, n: int) -> np.ndarray:
    """Matrix of ``z^* : C^n -> C^n (x) C^d`` (shape ``nd x n``)."""
    z = np.asarray(z, dtype=complex).ravel()
    return np.kron(np.conj(z)[:, None], np.eye(n))


def point_row(z, n: int) -> np.ndarray:
    """Matrix of ``z : C^n (x) C^d -> C^n`` (shape ``n x nd``), no conjugation."""
    z = np.asarray(z, dtype=complex).ravel()
    return np.kron(z[None, :], np.eye(n))


def apply_point_adjoint(z, M) -> np.ndarray:
    """Stack ``conj(z_k) M`` vertically for ``k = 1..d``."""
    z = np.asarray(z, dtype=complex).ravel()
    M = as_cmat(M)
    return np.vstack([np.conj(zk) * M for zk in z])


def _tz_star(T: RowContraction, z: np.ndarray) -> np.ndarray:
    return np.tensordot(np.conj(z), T.blocks, axes=(0, 0))


def resolvent(T: RowContraction, z) -> np.ndarray:
    """``(I - T z^*)^{-1}`` with ``T z^* = sum_k conj(z_k) T_k``."""
    z = as_ball_point(z, T.d)
    A = np.eye(T.n) - _tz_star(T, z)
    try:
        Rz = np.linalg.solve(A, np.eye(T.n))
    except np.linalg.LinAlgError as exc:
        raise Singular("I - T z^* is singular", point=z.tolist()) from exc
    if not np.all(np.isfinite(Rz)):
        raise Singular("I - T z^* is numerically singular", point=z.tolist())
    return Rz


def resolvents(T: RowContraction, points) -> np.ndarray:
    """Batched :func:`resolvent` over a ``N x d`` array; returns ``(N, n, n)``."""
    Z = np.asarray(points, dtype=complex).reshape(-1, T.d)
    A = np.eye(T.n)[None] - np.einsum("pk,kij->pij", np.conj(Z), T.blocks)
    try:
        Rz = np.linalg.solve(A, np.broadcast_to(np.eye(T.n), A.shape))
    except np.linalg.LinAlgError as exc:
        raise Singular("I - T z^* is singular at a sample point") from exc
    if not np.all(np.isfinite(Rz)):
        raise Singular("I - T z^* is numerically singular at a sample point")
    return Rz


def word_apply(T: RowContraction, word: Iterable[int]) -> np.ndarray:
    """``T^alpha = T_{a_1} ... T_{a_k}`` for a word of 1-based letters."""
    out = np.eye(T.n, dtype=complex)
    for letter in word:
        k = int(letter)
        if not 1 <= k <= T.d:
            raise ValueError(f"letter {letter!r} out of range 1..{T.d}")
        out = out @ T.blocks[k - 1]
    return out


def sym_monomial(T: RowContraction, nvec: Sequence[int], cache: dict | None = None) -> np.ndarray:
    """Symmetrized monomial ``T^n``: the sum of ``T^alpha`` over all words with
    letter counts ``n``.

    Uses ``T^n = sum_{k : n_k > 0} T_k T^{n - e_k}`` with ``T^0 = I``. Pass a
    dictionary as ``cache`` to share intermediate results between calls.
    """
    key = tuple(int(v) for v in nvec)
    if len(key) != T.d or any(v < 0 for v in key):
        raise ValueError(f"multi-index {key} invalid for d={T.d}")
    memo = {} if cache is None else cache

    def rec(m: tuple) -> np.ndarray:
        if m in memo:
            return memo[m]
        if sum(m) == 0:
            val = np.eye(T.n, dtype=complex)
        else:
            val = np.zeros((T.n, T.n), dtype=complex)
            for k, mk in enumerate(m):
                if mk > 0:
                    prev = m[:k] + (mk - 1,) + m[k + 1 :]
                    val = val + T.blocks[k] @ rec(prev)
        memo[m] = val
        return val

    return rec(key)


def iso_pure_decompose(T: RowContraction, tol: TolerancePolicy | None = None) -> IsoPureParts:
    """Split ``T = V - C`` with ``V = T P_{H_0}``, ``H_0 = ker D_T``.

    ``V`` is a row partial isometry with initial space ``H_0`` and ``C``
    vanishes on ``H_0`` and is strictly contractive on its complement.
    """
    tol = _tol(T, tol)
    R = T.row
    H0 = null_basis(np.eye(R.shape[1]) - R.conj().T @ R, tol)
    Vrow = R @ H0.projector()
    V = RowContraction.from_row(Vrow, T.d, tol, check=False)
    C = RowContraction.from_row(Vrow - R, T.d, tol, check=False)
    return IsoPureParts(V=V, C=C, initial_space=H0, final_space=range_basis(Vrow, tol))


def is_partial_isometry(T: RowContraction, tol: TolerancePolicy | None = None) -> bool:
    """``||T T^* T - T|| <= residual_tol``."""
    R = T.row
    return spectral_norm(R @ R.conj().T @ R - R) <= _tol(T, tol).residual_tol


def is_commuting(T: RowContraction, tol: TolerancePolicy | None = None) -> bool:
    """All pairwise commutators vanish within ``residual_tol``."""
    eps = _tol(T, tol).residual_tol
    B = T.blocks
    for j in range(T.d):
        for k in range(j + 1, T.d):
            if spectral_norm(B[j] @ B[k] - B[k] @ B[j]) > eps:
                return False
    return True


def _matrix_point(Z, d: int) -> np.ndarray:
    Z = np.asarray(Z, dtype=complex)
    if Z.ndim == 1:
        Z = Z.reshape(d, 1, 1)
    if Z.ndim != 3 or Z.shape[0] != d or Z.shape[1] != Z.shape[2]:
        raise ShapeMismatch(f"matrix ball point must have shape (d, m, m), got {Z.shape}")
    if spectral_norm(np.hstack(list(Z))) >= 1.0:
        raise ValueError("matrix point is not in the open non-commutative ball")
    return Z


def restricted_range_space(V: RowContraction, Z, tol: TolerancePolicy | None = None) -> Subspace:
    """``ra(V - Z) = (I - Z V^*)(ran V (x) C^m)`` inside ``C^n (x) C^m``.

    Here ``Z V^* = sum_k V_k^* (x) Z_k``. A scalar point ``z`` is the case
    ``m = 1``, giving ``(I - z V^*) ran V`` with ``z V^* = sum_k z_k V_k^*``.
    """
    tol = _tol(V, tol)
    if not is_partial_isometry(V, tol):
        raise NotPartialIsometry("restricted range spaces need a row partial isometry")
    Z = _matrix_point(Z, V.d)
    m = Z.shape[1]
    ZV = sum(np.kron(V.blocks[k].conj().T, Z[k]) for k in range(V.d))
    ran = range_basis(V.row, tol)
    M = (np.eye(V.n * m) - ZV) @ np.kron(ran.basis, np.eye(m))
    return range_basis(M, tol)
