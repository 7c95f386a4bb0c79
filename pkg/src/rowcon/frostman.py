"""Automorphisms of the operator unit ball and Frostman shifts.

For a strict contraction ``alpha : C^q -> C^p`` with defects
``D_alpha = sqrt(I - alpha^* alpha)`` and ``D_{alpha^*} = sqrt(I - alpha alpha^*)``:

    Phi_alpha(beta)      = D_{alpha^*} (I - beta alpha^*)^{-1} (beta - alpha) D_alpha^{-1}
    Phi_alpha^{-1}(beta) = D_{alpha^*}^{-1} (beta + alpha) (I + alpha^* beta)^{-1} D_alpha

These are mutually inverse bijections of the closed unit ball, and
``Phi_alpha(alpha) = 0``. Applied pointwise to a Schur function ``b`` they give
the zero shift ``b^<0> = Phi_{b(0)} o b`` and the ``alpha``-shift
``b^<alpha> = Phi_alpha^{-1} o b^<0>``; the Crofoot multiplier
``M(z) = D_{alpha^*} (I + b^<0>(z) alpha^*)^{-1}`` intertwines their kernels.

In finite dimensions a pure contraction is strict, so strictness is the
only gate used here.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import AlphaNotStrict, IllConditioned, ShapeMismatch, SingularDenominator
from .numlin import DEFAULT_TOL, TolerancePolicy, as_cmat, herm_sqrt, pinv, spectral_norm
from .schur import COND_CAP, SchurFunction, szego_dbr_kernel

__all__ = [
    "ContractionClass",
    "classify_contraction",
    "defects",
    "phi",
    "phi_inv",
    "frostman_identity_residual",
    "frostman_inverse_identity_residual",
    "FrostmanWrapped",
    "zero_shift",
    "frostman_shift",
    "crofoot_multiplier",
    "crofoot_kernel_residual",
    "SquareExtension",
    "square_extension",
]


@dataclass(frozen=True)
class ContractionClass:
    kind: str  # "strict", "boundary" or "not_contraction"
    norm: float

    @property
    def is_strict(self) -> bool:
        return self.kind == "strict"


def classify_contraction(A, tol: TolerancePolicy = DEFAULT_TOL) -> ContractionClass:
    """Compare the spectral norm with one.

    ``strict`` means ``norm < 1 - rank_rel_tol``; ``boundary`` means the norm
    is within tolerance of one. The separate ``pure`` class coincides with
    ``strict`` in finite dimensions and is not reported.
    """
    s = spectral_norm(as_cmat(A))
    if s < 1.0 - tol.rank_rel_tol:
        kind = "strict"
    elif s <= 1.0 + tol.residual_tol:
        kind = "boundary"
    else:
        kind = "not_contraction"
    return ContractionClass(kind, s)


def defects(alpha, tol: TolerancePolicy = DEFAULT_TOL) -> tuple[np.ndarray, np.ndarray]:
    """``(D_alpha, D_{alpha^*})``."""
    a = as_cmat(alpha)
    p, q = a.shape
    return (
        herm_sqrt(np.eye(q) - a.conj().T @ a, tol),
        herm_sqrt(np.eye(p) - a @ a.conj().T, tol),
    )


def _strict(alpha, tol: TolerancePolicy) -> np.ndarray:
    a = as_cmat(alpha)
    cls = classify_contraction(a, tol)
    if not cls.is_strict:
        raise AlphaNotStrict(f"alpha has norm {cls.norm:.12g}; a strict contraction is required")
    return a


def _solve_right(X: np.ndarray, M: np.ndarray, err) -> np.ndarray:
    """``X M^{-1}`` with a conditioning gate."""
    if M.size and np.linalg.cond(M) > COND_CAP:
        raise err("denominator is numerically singular")
    return np.linalg.solve(M.T, X.T).T


def phi(alpha, beta, tol: TolerancePolicy = DEFAULT_TOL) -> np.ndarray:
    """``Phi_alpha(beta)``."""
    a = _strict(alpha, tol)
    b = as_cmat(beta)
    if a.shape != b.shape:
        raise ShapeMismatch(f"alpha {a.shape} and beta {b.shape} differ in shape")
    Da, Das = defects(a, tol)
    return _phi_core(a, pinv(Da, tol), Das, b)


def _phi_core(a, Da_inv, Das, b) -> np.ndarray:
    den = np.eye(a.shape[0]) - b @ a.conj().T
    if np.linalg.cond(den) > COND_CAP:
        raise SingularDenominator("I - beta alpha^* is numerically singular")
    return Das @ np.linalg.solve(den, b - a) @ Da_inv


def phi_inv(alpha, beta, tol: TolerancePolicy = DEFAULT_TOL) -> np.ndarray:
    """``Phi_alpha^{-1}(beta)``."""
    a = _strict(alpha, tol)
    b = as_cmat(beta)
    if a.shape != b.shape:
        raise ShapeMismatch(f"alpha {a.shape} and beta {b.shape} differ in shape")
    Da, Das = defects(a, tol)
    return _phi_inv_core(a, Da, pinv(Das, tol), b)


def _phi_inv_core(a, Da, Das_inv, b) -> np.ndarray:
    den = np.eye(a.shape[1]) + a.conj().T @ b
    return Das_inv @ _solve_right(b + a, den, SingularDenominator) @ Da


def frostman_identity_residual(alpha, beta, gamma, tol: TolerancePolicy = DEFAULT_TOL) -> float:
    """Spectral norm of
    ``(I - Phi(beta) Phi(gamma)^*)
    - D_{a^*} (I - beta a^*)^{-1} (I - beta gamma^*) (I - a gamma^*)^{-1} D_{a^*}``.
    """
    a = _strict(alpha, tol)
    b, g = as_cmat(beta), as_cmat(gamma)
    _, Das = defects(a, tol)
    I = np.eye(a.shape[0])
    lhs = I - phi(a, b, tol) @ phi(a, g, tol).conj().T
    mid = np.linalg.solve(I - b @ a.conj().T, I - b @ g.conj().T)
    rhs = Das @ _solve_right(mid, I - a @ g.conj().T, SingularDenominator) @ Das
    return spectral_norm(lhs - rhs)


def frostman_inverse_identity_residual(alpha, beta, gamma, tol: TolerancePolicy = DEFAULT_TOL) -> float:
    """Residual of the companion identity for ``Phi_alpha^{-1}``:
    ``I - Phi^{-1}(beta) Phi^{-1}(gamma)^*
    = D_{a^*} (I + beta a^*)^{-1} (I - beta gamma^*) (I + a gamma^*)^{-1} D_{a^*}``.
    """
    a = _strict(alpha, tol)
    b, g = as_cmat(beta), as_cmat(gamma)
    _, Das = defects(a, tol)
    I = np.eye(a.shape[0])
    lhs = I - phi_inv(a, b, tol) @ phi_inv(a, g, tol).conj().T
    mid = np.linalg.solve(I + b @ a.conj().T, I - b @ g.conj().T)
    rhs = Das @ _solve_right(mid, I + a @ g.conj().T, SingularDenominator) @ Das
    return spectral_norm(lhs - rhs)


class FrostmanWrapped(SchurFunction):
    """Lazy composite ``Phi_alpha^{-1} o Phi_{b(0)} o b``.

    With ``alpha=None`` the outer inverse is skipped, giving the zero shift.
    """

    def __init__(self, inner: SchurFunction, alpha=None, tol: TolerancePolicy = DEFAULT_TOL):
        self.inner = inner
        self.p, self.q, self.d = inner.p, inner.q, inner.d
        self.tol = tol
        self.base0 = _strict(inner(np.zeros(inner.d)), tol)
        self.alpha = None if alpha is None else _strict(alpha, tol)
        if self.alpha is not None and self.alpha.shape != (self.p, self.q):
            raise ShapeMismatch("alpha must have the shape of the function values")
        # defects are fixed, so compute them once
        Da, Das = defects(self.base0, tol)
        self._base = (self.base0, pinv(Da, tol), Das)
        if self.alpha is not None:
            Da, Das = defects(self.alpha, tol)
            self._outer = (self.alpha, Da, pinv(Das, tol))

    def zero_shifted(self, z) -> np.ndarray:
        v = self.inner(z)
        if v.shape != (self.p, self.q):
            raise ShapeMismatch("inner function returned a value of the wrong shape")
        return _phi_core(*self._base, v)

    def _value(self, z):
        v = self.zero_shifted(z)
        return v if self.alpha is None else _phi_inv_core(*self._outer, v)

    def describe(self) -> dict:
        out = super().describe()
        out["inner"] = self.inner.describe()
        out["shift"] = "zero" if self.alpha is None else "alpha"
        return out


def zero_shift(b: SchurFunction, tol: TolerancePolicy = DEFAULT_TOL) -> FrostmanWrapped:
    """``b^<0> = Phi_{b(0)} o b``, which vanishes at the origin."""
    return FrostmanWrapped(b, None, tol)


def frostman_shift(b: SchurFunction, alpha, tol: TolerancePolicy = DEFAULT_TOL) -> FrostmanWrapped:
    """``b^<alpha> = Phi_alpha^{-1} o Phi_{b(0)} o b``, with value ``alpha`` at 0."""
    return FrostmanWrapped(b, alpha, tol)


def crofoot_multiplier(b: SchurFunction, alpha, z, tol: TolerancePolicy = DEFAULT_TOL) -> np.ndarray:
    """``M(z) = (I - b^<alpha>(z) alpha^*) D_{alpha^*}^{-1} = D_{alpha^*} (I + b^<0>(z) alpha^*)^{-1}``.

    Both forms are evaluated and must agree to ``residual_tol`` (relative to
    the size of ``M``); the second is returned.
    """
    a = _strict(alpha, tol)
    _, Das = defects(a, tol)
    b0 = phi(_strict(b(np.zeros(b.d)), tol), b(z), tol)
    ba = phi_inv(a, b0, tol)
    I = np.eye(a.shape[0])
    first = (I - ba @ a.conj().T) @ pinv(Das, tol)
    second = _solve_right(Das, I + b0 @ a.conj().T, SingularDenominator)
    gap = spectral_norm(first - second)
    if gap > tol.residual_tol * max(1.0, spectral_norm(second)):
        raise IllConditioned(f"Crofoot forms disagree by {gap:.3e}")
    return second


def crofoot_kernel_residual(b: SchurFunction, alpha, z, w, tol: TolerancePolicy = DEFAULT_TOL) -> float:
    """``|| k^{b<alpha>}(z,w) - M(z) k^{b<0>}(z,w) M(w)^* ||``."""
    ba = frostman_shift(b, alpha, tol)
    b0 = zero_shift(b, tol)
    lhs = szego_dbr_kernel(ba, z, w)
    rhs = crofoot_multiplier(b, alpha, z, tol) @ szego_dbr_kernel(b0, z, w) @ crofoot_multiplier(
        b, alpha, w, tol
    ).conj().T
    return spectral_norm(lhs - rhs)


class SquareExtension(SchurFunction):
    """Zero padding of ``b`` to a square function.

    A wide ``b`` (``p < q``) gets extra zero rows, a tall one extra zero columns.
    """

    def __init__(self, inner: SchurFunction):
        self.inner = inner
        self.d = inner.d
        self.p = self.q = max(inner.p, inner.q)

    def _value(self, z):
        v = self.inner._value(z)
        out = np.zeros((self.p, self.q), dtype=complex)
        out[: v.shape[0], : v.shape[1]] = v
        return out

    def describe(self) -> dict:
        out = super().describe()
        out["inner"] = self.inner.describe()
        return out


def square_extension(b: SchurFunction) -> SchurFunction:
    """``[b]``: ``b`` itself when square, otherwise its zero padding."""
    return b if b.p == b.q else SquareExtension(b)
