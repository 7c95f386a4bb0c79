"""Schur-class functions on the unit ball, their kernels and coincidence tests.

A Schur function ``b`` maps the ball ``B^d`` into contractions from ``C^q`` to
``C^p``. Its de Branges-Rovnyak kernel is

    k^b(z, w) = (I - b(z) b(w)^*) / (1 - z w^*),    z w^* = sum_k z_k conj(w_k),

and ``b`` is Schur class exactly when this kernel is positive.

Coincidence
-----------
``b_1`` and ``b_2`` coincide if ``R b_1(z) = b_2(z) Q`` for fixed unitaries and
coincide weakly if ``W b_1(z) b_1(w)^* W^* = b_2(z) b_2(w)^*`` for a fixed
unitary ``W``. Both tests here first solve the linear equations
``W b_1(z_i) b_1(z_j)^* = b_2(z_i) b_2(z_j)^* W`` over all sample pairs. The
family of products is closed under adjoints, so the unitary polar factor of
any invertible solution is again a solution; the input-side unitary then
follows from one Procrustes step on the supports.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import IllConditioned, ShapeMismatch, Unital
from .numlin import (
    DEFAULT_TOL,
    Subspace,
    TolerancePolicy,
    as_cmat,
    procrustes_unitary,
    range_basis,
)
from .rowop import pairing
from .sampling import as_ball_point

__all__ = [
    "SchurFunction",
    "ConstantSchur",
    "Realization",
    "FunctionSchur",
    "SampledTable",
    "KernelGram",
    "Coincidence",
    "WeakCoincidence",
    "evaluate",
    "evaluate_many",
    "szego_dbr_kernel",
    "kernel_gram",
    "is_schur_class",
    "support",
    "coincide",
    "coincide_weakly",
    "herglotz_data",
]

COND_CAP = 1e12


class SchurFunction:
    """Evaluable ``p x q`` matrix function of ``d`` variables.

    Subclasses implement :meth:`_value`; callers use ``b(z)``.
    """

    p: int
    q: int
    d: int

    def __call__(self, z) -> np.ndarray:
        return self._value(as_ball_point(z, self.d))

    def _value(self, z: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def describe(self) -> dict:
        return {"kind": type(self).__name__, "p": self.p, "q": self.q, "d": self.d}


class ConstantSchur(SchurFunction):
    """The constant function ``z -> value``."""

    def __init__(self, value, d: int):
        self.value = as_cmat(value)
        self.p, self.q = self.value.shape
        self.d = d

    def _value(self, z):
        return self.value.copy()


class Realization(SchurFunction):
    """Transfer function ``b(z) = D + C (I - zA)^{-1} zB`` of a colligation.

    ``A`` maps the state space ``C^n`` into ``C^n (x) C^d`` and is stored as
    ``d`` blocks ``A_k``; ``B`` is ``nd x q`` with row blocks ``B_k``. The row
    action of ``z`` carries no conjugation: ``zA = sum_k z_k A_k`` and
    ``zB = sum_k z_k B_k``.
    """

    def __init__(self, A, B, C, D):
        A = np.asarray(A, dtype=complex)
        if A.ndim == 2:
            A = A[None]
        self.A = A
        self.d, n, n2 = A.shape
        if n != n2:
            raise ShapeMismatch("state blocks must be square")
        self.B = as_cmat(B, rows=n * self.d)
        self.C = as_cmat(C, cols=n)
        self.D = as_cmat(D, rows=self.C.shape[0], cols=self.B.shape[1])
        self.p, self.q = self.D.shape
        self.n = n

    def _value(self, z):
        n = self.n
        zA = np.tensordot(z, self.A, axes=(0, 0))
        zB = np.tensordot(z, self.B.reshape(self.d, n, self.q), axes=(0, 0))
        M = np.eye(n) - zA
        if np.linalg.cond(M) > COND_CAP:
            raise IllConditioned("I - zA is ill conditioned", point=z.tolist())
        return self.D + self.C @ np.linalg.solve(M, zB)

    def describe(self) -> dict:
        out = super().describe()
        out["state_dim"] = self.n
        return out


class FunctionSchur(SchurFunction):
    """Wrap a Python callable returning ``p x q`` arrays."""

    def __init__(self, func: Callable[[np.ndarray], np.ndarray], p: int, q: int, d: int,
                 name: str = "function"):
        self.func = func
        self.p, self.q, self.d = p, q, d
        self.name = name

    def _value(self, z):
        return as_cmat(self.func(z), rows=self.p, cols=self.q)

    def describe(self) -> dict:
        out = super().describe()
        out["name"] = self.name
        return out


class SampledTable(SchurFunction):
    """Values of a function on a fixed point set; evaluation elsewhere is an error."""

    def __init__(self, points, values, provenance: dict | None = None):
        P = np.asarray(points, dtype=complex)
        if P.ndim == 1:
            P = P[:, None]
        Vals = np.asarray(values, dtype=complex)
        if Vals.ndim != 3 or Vals.shape[0] != P.shape[0]:
            raise ShapeMismatch("values must be an array of shape (N, p, q) matching the points")
        self.points = P
        self.values = Vals
        self.d = P.shape[1]
        self.p, self.q = Vals.shape[1:]
        self.provenance = dict(provenance or {})

    @classmethod
    def from_function(cls, b: SchurFunction, points, provenance: dict | None = None):
        P = np.asarray(points, dtype=complex).reshape(-1, b.d)
        prov = {"source": b.describe()}
        prov.update(provenance or {})
        return cls(P, evaluate_many(b, P), prov)

    def _value(self, z):
        dist = np.linalg.norm(self.points - z[None, :], axis=1)
        i = int(np.argmin(dist))
        if dist[i] > 1e-12:
            raise KeyError("point is not in the sampled table")
        return self.values[i].copy()


def evaluate(b: SchurFunction, z) -> np.ndarray:
    """Value ``b(z)`` as a ``p x q`` matrix."""
    return b(z)


def evaluate_many(b: SchurFunction, points) -> np.ndarray:
    """Values at every row of ``points``; returns ``(N, p, q)``."""
    P = np.asarray(points, dtype=complex).reshape(-1, b.d)
    if len(P) == 0:
        return np.zeros((0, b.p, b.q), dtype=complex)
    return np.stack([b(z) for z in P])


def szego_dbr_kernel(b: SchurFunction | None, z, w) -> np.ndarray:
    """``k^b(z, w) = (I - b(z) b(w)^*)/(1 - z w^*)``; ``b=None`` gives the Szegő kernel."""
    s = 1.0 / (1.0 - pairing(z, w))
    if b is None:
        return np.array([[s]])
    bz, bw = b(z), b(w)
    return (np.eye(b.p) - bz @ bw.conj().T) * s


@dataclass(frozen=True, eq=False)
class KernelGram:
    points: np.ndarray
    gram: np.ndarray
    min_eig: float


def _gram_from_values(points: np.ndarray, values: np.ndarray) -> np.ndarray:
    N, p, _ = values.shape
    S = 1.0 / (1.0 - points @ points.conj().T)
    BB = np.einsum("iab,jcb->iajc", values, values.conj())
    eye = np.eye(p)[None, :, None, :]
    G = (eye - BB) * S[:, None, :, None]
    return G.reshape(N * p, N * p)


def kernel_gram(b: SchurFunction, points) -> KernelGram:
    """Block Gram matrix ``[k^b(z_i, z_j)]`` and its smallest eigenvalue."""
    P = np.asarray(points, dtype=complex).reshape(-1, b.d)
    G = _gram_from_values(P, evaluate_many(b, P))
    G = 0.5 * (G + G.conj().T)
    return KernelGram(P, G, float(np.linalg.eigvalsh(G)[0]))


def is_schur_class(b: SchurFunction, points, tol: TolerancePolicy = DEFAULT_TOL) -> bool:
    """Positivity of the de Branges-Rovnyak kernel on the given points."""
    return kernel_gram(b, points).min_eig >= -tol.psd_tol


def _support_from_values(values: np.ndarray, q: int, tol: TolerancePolicy) -> Subspace:
    if values.size == 0:
        return Subspace.zero(q, tol)
    return range_basis(np.concatenate([v.conj().T for v in values], axis=1), tol)


def support(b: SchurFunction, points, tol: TolerancePolicy = DEFAULT_TOL) -> Subspace:
    """Span of ``ran b(z)^*`` over the points (a subspace of ``C^q``)."""
    return _support_from_values(evaluate_many(b, points), b.q, tol)


@dataclass(frozen=True, eq=False)
class WeakCoincidence:
    W: np.ndarray
    residual: float


@dataclass(frozen=True, eq=False)
class Coincidence:
    R: np.ndarray
    Q: np.ndarray
    residual: float


def _values(b, points) -> np.ndarray:
    if isinstance(b, np.ndarray):
        return np.asarray(b, dtype=complex)
    return evaluate_many(b, points)


def _kernel_products(F: np.ndarray) -> np.ndarray:
    """All products ``F_i F_j^*`` as an ``(N, N, p, p)`` array."""
    return np.einsum("iab,jcb->ijac", F, F.conj())


def _intertwiner(K1: np.ndarray, K2: np.ndarray) -> np.ndarray:
    """A unitary ``W`` nearly solving ``W K1[i,j] = K2[i,j] W`` for all pairs."""
    p = K1.shape[-1]
    A = K1.reshape(-1, p, p)
    B = K2.reshape(-1, p, p)
    eye = np.eye(p)
    # row-major vec: vec(W A) = (I (x) A^T) vec(W), vec(B W) = (B (x) I) vec(W)
    L = np.concatenate([np.kron(eye, a.T) - np.kron(b, eye) for a, b in zip(A, B)], axis=0)
    _, s, Vh = np.linalg.svd(L, full_matrices=False)
    # rows of Vh are conjugated right singular vectors
    null = Vh.conj()[s <= 1e-7 * s[0]] if s[0] > 0 else Vh.conj()
    if null.shape[0] == 0:
        null = Vh.conj()[-1:]
    rng = np.random.default_rng(12345)
    best = None
    for _ in range(5):
        coef = rng.standard_normal(null.shape[0]) + 1j * rng.standard_normal(null.shape[0])
        W = (coef @ null).reshape(p, p)
        U, sv, Zh = np.linalg.svd(W)
        polar = U @ Zh
        if sv[-1] > 1e-10 * sv[0]:
            return polar
        best = polar if best is None else best
    return best


def _weak(F1: np.ndarray, F2: np.ndarray, tol: TolerancePolicy):
    """Shared core: supports, intertwiner and residual."""
    N, p, q1 = F1.shape
    q2 = F2.shape[2]
    S1 = _support_from_values(F1, q1, tol)
    S2 = _support_from_values(F2, q2, tol)
    K1 = _kernel_products(F1)
    K2 = _kernel_products(F2)
    if S1.dim != S2.dim:
        return None, S1, S2, np.inf
    W = _intertwiner(K1, K2)
    res = float(np.max(np.abs(np.einsum("ab,ijbc,dc->ijad", W, K1, W.conj()) - K2)))
    return W, S1, S2, res


def coincide_weakly(b1, b2, points, tol: TolerancePolicy = DEFAULT_TOL) -> WeakCoincidence | None:
    """Search for a unitary ``W`` with ``W b1(z) b1(w)^* W^* = b2(z) b2(w)^*``.

    ``b1`` and ``b2`` are Schur functions (or precomputed ``(N, p, q)`` value
    arrays on ``points``). Returns ``None`` when the residual exceeds
    ``10 * residual_tol``. The verdict is evidence on the grid, not a proof.
    """
    F1, F2 = _values(b1, points), _values(b2, points)
    if F1.shape[1] != F2.shape[1]:
        raise ShapeMismatch(f"output dimensions {F1.shape[1]} and {F2.shape[1]} differ")
    if F1.shape[0] != F2.shape[0]:
        raise ShapeMismatch("value arrays are sampled on different point sets")
    W, _, _, res = _weak(F1, F2, tol)
    if W is None or res > 10 * tol.residual_tol:
        return None
    return WeakCoincidence(W, res)


def coincide(b1, b2, points, tol: TolerancePolicy = DEFAULT_TOL) -> Coincidence | None:
    """Search for unitaries with ``R b1(z) = b2(z) Q`` on the points."""
    F1, F2 = _values(b1, points), _values(b2, points)
    if F1.shape[1:] != F2.shape[1:]:
        raise ShapeMismatch(f"shapes {F1.shape[1:]} and {F2.shape[1:]} differ")
    W, S1, S2, res = _weak(F1, F2, tol)
    if W is None:
        return None
    N, p, q = F1.shape
    X = np.concatenate(list(W @ F1 @ S1.basis), axis=0)   # (N p) x s
    Y = np.concatenate(list(F2 @ S2.basis), axis=0)
    if S1.dim:
        Qh, _ = procrustes_unitary(Y.conj().T, X.conj().T)
        Qs = Qh.conj().T
    else:
        Qs = np.zeros((0, 0), dtype=complex)
    N1, N2 = S1.complement().basis, S2.complement().basis
    Q = S2.basis @ Qs @ S1.basis.conj().T + N2 @ N1.conj().T
    res = float(np.max(np.abs(W @ F1 - F2 @ Q))) if F1.size else 0.0
    if res > 10 * tol.residual_tol:
        return None
    return Coincidence(W, Q, res)


def herglotz_data(b: SchurFunction, z, w):
    """Herglotz transform ``H_b(z)``, Herglotz kernel ``K^b(z, w)`` and ``U_b(z)``.

    ``H_b = (I - b)^{-1}(I + b)``,
    ``K^b(z, w) = (I - b(z))^{-1} k^b(z, w) (I - b(w)^*)^{-1}`` and
    ``U_b(z) = (I - b(z))^{-1}``.
    """
    if b.p != b.q:
        raise ShapeMismatch("the Herglotz transform needs a square function")
    bz, bw = b(z), b(w)
    I = np.eye(b.p)
    for val, pt in ((bz, z), (bw, w)):
        if np.linalg.cond(I - val) > COND_CAP:
            raise Unital("I - b(z) is singular", point=np.asarray(pt).tolist())
    Uz = np.linalg.inv(I - bz)
    Uw = np.linalg.inv(I - bw)
    H = Uz @ (I + bz)
    k = (I - bz @ bw.conj().T) / (1.0 - pairing(z, w))
    K = Uz @ k @ Uw.conj().T
    return H, K, Uz
