"""Characteristic functions of CCNC row contractions and their model identities.

Pipeline
--------
1. Split ``T = V - C`` (:func:`rowcon.rowop.iso_pure_decompose`).
2. Frame ``(ran V)^perp`` by an isometry ``gamma0`` (``n x p``) and ``ker V`` by
   an isometry ``gammaInf`` (``nd x q``).
3. With ``Gamma(z) = (I - T z^*)^{-1} gamma0`` put

       D(z) = Gamma(z)^* gamma0,        N(z) = (I_d (x) Gamma(z)^*) gammaInf,
       b_V(z) = D(z)^{-1} z N(z),

   where ``z N(z) = sum_k z_k N_k(z)`` contracts the ``d`` row blocks of ``N``.
4. The zero-point contraction ``delta = -gamma0^* T gammaInf`` is strict, and
   ``b_T`` is the Frostman shift of ``b_V`` to the value ``delta`` at 0.

The model identity ties everything together: with
``kappa(z) = Gamma(z) D(z)^{-*} M(z)^*`` (``M`` the Crofoot multiplier),
``kappa(z)^* kappa(w)`` is the de Branges-Rovnyak kernel of ``b_T`` and
``T^*`` acts on the functions ``kappa(.)^* h`` as the extremal Gleason
operator ``X^* k_w = w^* k_w - b b_T(w)^*``. :func:`verify_model` measures every
one of these identities on a sample grid.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .classify import is_ccnc
from .errors import DegenerateTriple, IllConditioned, NotCCNC, NotExtension
from .frostman import crofoot_multiplier, defects, frostman_shift
from .numlin import DEFAULT_TOL, TolerancePolicy, as_cmat, null_basis, range_basis, spectral_norm
from .rowop import (
    IsoPureParts,
    RowContraction,
    apply_point_adjoint,
    defect,
    defect_adj,
    defect_adj_range,
    defect_range,
    iso_pure_decompose,
    point_row,
    resolvent,
    resolvents,
)
from .sampling import BallSampler, as_ball_point
from .schur import (
    COND_CAP,
    Realization,
    SchurFunction,
    coincide_weakly,
    _gram_from_values,
    evaluate_many,
)

__all__ = [
    "ModelTriple",
    "CharacteristicData",
    "ModelReport",
    "model_triple",
    "gamma_eval",
    "D_eval",
    "N_eval",
    "PartialIsometryCharFun",
    "charfun_partial_isometry",
    "colligation",
    "colligation_defect",
    "colligation_transfer",
    "zero_point_contraction",
    "characteristic_function",
    "kernel_pullback",
    "gleason_solution",
    "gleason_coordinates",
    "gleason_X_action",
    "NagyFoiasTheta",
    "nagy_foias_theta",
    "kernel_factorization_residual",
    "verify_model",
    "qe_membership_margin",
    "qe_membership_test",
]


@dataclass(frozen=True, eq=False)
class ModelTriple:
    """Framing isometries for ``(ran V)^perp`` and ``ker V`` plus an extension of ``V``."""

    gamma0: np.ndarray
    gammaInf: np.ndarray
    extension: RowContraction
    V: RowContraction

    @property
    def p(self) -> int:
        return self.gamma0.shape[1]

    @property
    def q(self) -> int:
        return self.gammaInf.shape[1]

    @property
    def n(self) -> int:
        return self.extension.n

    @property
    def d(self) -> int:
        return self.extension.d


@dataclass(frozen=True, eq=False)
class CharacteristicData:
    """Everything the model identities need, computed once per tuple."""

    T: RowContraction
    parts: IsoPureParts
    triple: ModelTriple
    delta: np.ndarray
    bV: SchurFunction
    bT: SchurFunction
    kappa0: np.ndarray
    tol: TolerancePolicy = field(default=DEFAULT_TOL)

    @property
    def p(self) -> int:
        return self.triple.p

    @property
    def q(self) -> int:
        return self.triple.q


def model_triple(parts: IsoPureParts, T: RowContraction, frame0=None, frameInf=None,
                 tol: TolerancePolicy | None = None) -> ModelTriple:
    """Framing isometries for ``parts.V`` with ``T`` as the extension.

    ``frame0`` (``p x p``) and ``frameInf`` (``q x q``) optionally rotate the
    default orthonormal bases; the characteristic function only changes by
    the corresponding constant unitaries.
    """
    V = parts.V
    tol = V.tol if tol is None else tol
    if T.n != V.n or T.d != V.d:
        raise NotExtension("T and V act on different spaces")
    VV = V.row.conj().T @ V.row
    gap = spectral_norm(T.row @ VV - V.row)
    if gap > tol.residual_tol:
        raise NotExtension(f"T V^*V differs from V by {gap:.3e}", residual=gap)
    gamma0 = range_basis(V.row, tol).complement().basis
    gammaInf = null_basis(V.row, tol).basis
    if frame0 is not None:
        gamma0 = gamma0 @ as_cmat(frame0, rows=gamma0.shape[1], cols=gamma0.shape[1])
    if frameInf is not None:
        gammaInf = gammaInf @ as_cmat(frameInf, rows=gammaInf.shape[1], cols=gammaInf.shape[1])
    return ModelTriple(gamma0=gamma0, gammaInf=gammaInf, extension=T, V=V)


def _require_nondegenerate(triple: ModelTriple) -> None:
    if triple.p == 0:
        raise DegenerateTriple("(ran V)^perp is zero, so the model maps are empty")


def gamma_eval(triple: ModelTriple, z) -> np.ndarray:
    """``Gamma(z) = (I - T z^*)^{-1} gamma0`` (``n x p``)."""
    _require_nondegenerate(triple)
    return resolvent(triple.extension, z) @ triple.gamma0


def D_eval(triple: ModelTriple, z) -> np.ndarray:
    """``D(z) = Gamma(z)^* gamma0`` (``p x p``)."""
    return gamma_eval(triple, z).conj().T @ triple.gamma0


def N_eval(triple: ModelTriple, z) -> np.ndarray:
    """``N(z) = (I_d (x) Gamma(z)^*) gammaInf`` (``pd x q``)."""
    G = gamma_eval(triple, z)
    return np.kron(np.eye(triple.d), G.conj().T) @ triple.gammaInf


def _checked_inverse(M: np.ndarray, z) -> np.ndarray:
    if np.linalg.cond(M) > COND_CAP:
        raise IllConditioned("D(z) is ill conditioned", point=np.asarray(z).tolist())
    return np.linalg.inv(M)


class PartialIsometryCharFun(SchurFunction):
    """``b_V(z) = D(z)^{-1} z N(z)`` for a model triple."""

    def __init__(self, triple: ModelTriple):
        _require_nondegenerate(triple)
        self.triple = triple
        self.p, self.q, self.d = triple.p, triple.q, triple.d

    def _value(self, z):
        t = self.triple
        G = resolvent(t.extension, z) @ t.gamma0
        D = G.conj().T @ t.gamma0
        # z N(z) = Gamma(z)^* (sum_k z_k gammaInf_k)
        zN = G.conj().T @ point_row(z, t.n) @ t.gammaInf
        return _checked_inverse(D, z) @ zN


def charfun_partial_isometry(triple: ModelTriple) -> SchurFunction:
    """The characteristic function ``b_V`` of the triple's partial isometry."""
    return PartialIsometryCharFun(triple)


def colligation(triple: ModelTriple) -> np.ndarray:
    """``Xi = [[V^*, gammaInf], [gamma0^*, 0]]`` from ``C^n (+) C^q`` to ``C^{nd} (+) C^p``."""
    V = triple.V
    top = np.hstack([V.column_adjoint, triple.gammaInf])
    bottom = np.hstack([triple.gamma0.conj().T, np.zeros((triple.p, triple.q), dtype=complex)])
    return np.vstack([top, bottom])


def colligation_defect(triple: ModelTriple) -> float:
    """``max(||Xi^* Xi - I||, ||Xi Xi^* - I||)``; zero for a unitary colligation."""
    X = colligation(triple)
    return max(
        spectral_norm(X.conj().T @ X - np.eye(X.shape[1])),
        spectral_norm(X @ X.conj().T - np.eye(X.shape[0])),
    )


def _colligation_realization(triple: ModelTriple) -> Realization:
    A = np.stack([Vk.conj().T for Vk in triple.V.blocks])
    return Realization(A, triple.gammaInf, triple.gamma0.conj().T,
                       np.zeros((triple.p, triple.q), dtype=complex))


def colligation_transfer(triple: ModelTriple, z) -> np.ndarray:
    """``gamma0^* (I - z V^*)^{-1} z gammaInf`` with ``z V^* = sum_k z_k V_k^*``."""
    _require_nondegenerate(triple)
    return _colligation_realization(triple)(z)


def zero_point_contraction(parts: IsoPureParts, triple: ModelTriple) -> np.ndarray:
    """``delta = -gamma0^* T gammaInf`` (``p x q``)."""
    return -triple.gamma0.conj().T @ triple.extension.row @ triple.gammaInf


def characteristic_function(T: RowContraction, sampler: BallSampler | None = None,
                            tol: TolerancePolicy | None = None) -> CharacteristicData:
    """Run the full pipeline for a CCNC tuple."""
    tol = T.tol if tol is None else tol
    if not is_ccnc(T, sampler, tol):
        raise NotCCNC("the tuple is not CCNC, so it has no characteristic function model")
    parts = iso_pure_decompose(T, tol)
    triple = model_triple(parts, T, tol=tol)
    _require_nondegenerate(triple)
    delta = zero_point_contraction(parts, triple)
    bV = charfun_partial_isometry(triple)
    bT = frostman_shift(bV, delta, tol)
    _, D_delta_adj = defects(delta, tol)
    return CharacteristicData(
        T=T, parts=parts, triple=triple, delta=delta, bV=bV, bT=bT,
        kappa0=triple.gamma0 @ D_delta_adj, tol=tol,
    )


def _crofoot(data: CharacteristicData, z) -> np.ndarray:
    return crofoot_multiplier(data.bV, data.delta, z, data.tol)


def kernel_pullback(data: CharacteristicData, z) -> np.ndarray:
    """``kappa(z) = Gamma(z) D(z)^{-*} M(z)^*`` (``n x p``)."""
    z = as_ball_point(z, data.triple.d)
    G = gamma_eval(data.triple, z)
    Dinv = _checked_inverse(G.conj().T @ data.triple.gamma0, z)
    return G @ Dinv.conj().T @ _crofoot(data, z).conj().T


def gleason_coordinates(data: CharacteristicData) -> np.ndarray:
    """``gammaInf D_delta`` (``nd x q``), the Gleason solution in state coordinates."""
    D_delta, _ = defects(data.delta, data.tol)
    return data.triple.gammaInf @ D_delta


def gleason_solution(data: CharacteristicData, z) -> np.ndarray:
    """Extremal Gleason solution ``b_T(z)`` (``pd x q``).

    ``b_V(z) = (I_d (x) D(z)^{-1}) N(z)`` and
    ``b_T(z) = (I_d (x) M(z)) b_V(z) D_delta``.
    """
    z = as_ball_point(z, data.triple.d)
    t = data.triple
    G = gamma_eval(t, z)
    Dinv = _checked_inverse(G.conj().T @ t.gamma0, z)
    eye = np.eye(t.d)
    bold_V = np.kron(eye, Dinv @ G.conj().T) @ t.gammaInf
    D_delta, _ = defects(data.delta, data.tol)
    return np.kron(eye, _crofoot(data, z)) @ bold_V @ D_delta


def gleason_X_action(data: CharacteristicData, w, e) -> np.ndarray:
    """``X^*`` on ``kappa(w) e`` in state coordinates.

    Returns ``w^* kappa(w) e - (gammaInf D_delta) b_T(w)^* e``. The model
    identity says this equals ``T^* kappa(w) e``.
    """
    w = as_ball_point(w, data.triple.d)
    e = np.asarray(e, dtype=complex).reshape(data.p, -1)
    lifted = apply_point_adjoint(w, kernel_pullback(data, w) @ e)
    return lifted - gleason_coordinates(data) @ data.bT(w).conj().T @ e


class NagyFoiasTheta(SchurFunction):
    """``Theta_T(z) = (-T + D_{T^*} (I - z T^*)^{-1} z D_T)`` restricted to ``ran D_T``.

    Rows are expressed in an orthonormal basis of ``ran D_{T^*}`` and columns
    in one of ``ran D_T``; ``z T^* = sum_k z_k T_k^*`` and ``z`` contracts the
    ``d`` blocks of ``C^{nd}`` without conjugation.
    """

    def __init__(self, T: RowContraction, tol: TolerancePolicy | None = None):
        tol = T.tol if tol is None else tol
        self.T = T
        self.B0 = defect_range(T, tol).basis
        self.B1 = defect_adj_range(T, tol).basis
        self.DT = defect(T, tol)
        self.DTs = defect_adj(T, tol)
        self.p, self.q, self.d = self.B1.shape[1], self.B0.shape[1], T.d

    def _value(self, z):
        T = self.T
        zTs = np.tensordot(z, np.conj(np.transpose(T.blocks, (0, 2, 1))), axes=(0, 0))
        inner = np.linalg.solve(np.eye(T.n) - zTs, point_row(z, T.n) @ self.DT @ self.B0)
        full = -T.row @ self.B0 + self.DTs @ inner
        return self.B1.conj().T @ full


def nagy_foias_theta(T: RowContraction, z, tol: TolerancePolicy | None = None) -> np.ndarray:
    """Value ``Theta_T(z)`` (``dim ran D_{T^*} x dim ran D_T``)."""
    return NagyFoiasTheta(T, tol)(z)


def kernel_factorization_residual(triple: ModelTriple, points) -> float:
    """``max ||Gamma(z)^* Gamma(w) - D(z) k^{b_V}(z, w) D(w)^*||`` over point pairs."""
    bV = charfun_partial_isometry(triple)
    P = np.asarray(points, dtype=complex).reshape(-1, triple.d)
    G = [gamma_eval(triple, z) for z in P]
    D = [g.conj().T @ triple.gamma0 for g in G]
    kb = _gram_from_values(P, evaluate_many(bV, P)).reshape(len(P), triple.p, len(P), triple.p)
    worst = 0.0
    for i in range(len(P)):
        for j in range(len(P)):
            rhs = D[i] @ kb[i, :, j, :] @ D[j].conj().T
            worst = max(worst, spectral_norm(G[i].conj().T @ G[j] - rhs))
    return worst


@dataclass(frozen=True)
class ModelReport:
    """Per-check residuals, thresholds and verdicts of :func:`verify_model`."""

    checks: dict
    passed: bool
    reason: str | None = None

    def as_dict(self) -> dict:
        return {"passed": self.passed, "reason": self.reason, "checks": self.checks}


VERIFY_THRESHOLDS = {
    "resolvent_identity": 1e-7,
    "kernel_gram": 1e-7,
    "kernel_factorization": 1e-7,
    "kappa_span_rank": 0.0,
    "gleason_identity": 1e-8,
    "extremality": 1e-10,
    "colligation_agreement": 1e-8,
    "colligation_unitary": 1e-8,
    "model_identity": 1e-8,
    "theta_weak_coincidence": 1e-6,
}


def verify_model(T: RowContraction, sampler: BallSampler | None = None,
                 tol: TolerancePolicy | None = None) -> ModelReport:
    """Measure every model identity on the sampler's points.

    Non-CCNC tuples give a failed report with ``reason="not_ccnc"``.
    """
    tol = T.tol if tol is None else tol
    sampler = BallSampler(T.d, count=15) if sampler is None else sampler
    try:
        data = characteristic_function(T, None, tol)
    except NotCCNC:
        return ModelReport({}, False, "not_ccnc")
    P = sampler.points()
    t = data.triple
    K = [kernel_pullback(data, z) for z in P]
    Gam = resolvents(T, P)
    res = {}
    res["resolvent_identity"] = max(spectral_norm(R @ data.kappa0 - k) for R, k in zip(Gam, K))
    BT = evaluate_many(data.bT, P)
    Kst = np.concatenate(K, axis=1)
    res["kernel_gram"] = spectral_norm(Kst.conj().T @ Kst - _gram_from_values(P, BT))
    res["kernel_factorization"] = kernel_factorization_residual(t, P)
    rank = range_basis(np.hstack(K), tol).dim
    res["kappa_span_rank"] = float(T.n - rank)
    b0 = data.bT(np.zeros(T.d))
    res["gleason_identity"] = max(
        spectral_norm(point_row(z, data.p) @ gleason_solution(data, z) - (bz - b0))
        for z, bz in zip(P, BT)
    )
    H = gleason_coordinates(data)
    res["extremality"] = spectral_norm(H.conj().T @ H - (np.eye(data.q) - data.delta.conj().T @ data.delta))
    res["colligation_agreement"] = max(
        spectral_norm(data.bV(z) - colligation_transfer(t, z)) for z in P
    )
    res["colligation_unitary"] = colligation_defect(t)
    Tadj = T.column_adjoint
    res["model_identity"] = max(
        spectral_norm(apply_point_adjoint(z, k) - H @ bz.conj().T - Tadj @ k)
        for z, k, bz in zip(P, K, BT)
    )
    wc = coincide_weakly(BT, evaluate_many(NagyFoiasTheta(T, tol), P), P, tol)
    res["theta_weak_coincidence"] = float("inf") if wc is None else wc.residual
    checks = {
        name: {"residual": float(val), "threshold": VERIFY_THRESHOLDS[name],
               "passed": bool(val <= VERIFY_THRESHOLDS[name])}
        for name, val in res.items()
    }
    failed = [k for k, v in checks.items() if not v["passed"]]
    return ModelReport(checks, not failed, failed[0] if failed else None)


def qe_membership_margin(data: CharacteristicData, points) -> float:
    """Smallest residual of ``b_T(z_i) g = kappa(z_i)^* h`` over unit ``g`` in the support.

    The stacked values ``b_T(z_i)`` restricted to the support of ``b_T`` are
    projected off the span of the stacked ``kappa(z_i)^*``; the answer is the
    smallest singular value of what remains.
    """
    P = np.asarray(points, dtype=complex).reshape(-1, data.triple.d)
    B = evaluate_many(data.bT, P)
    S = range_basis(np.concatenate([v.conj().T for v in B], axis=1), data.tol)
    if S.dim == 0:
        return float("inf")
    Bs = np.concatenate(list(B @ S.basis), axis=0)
    Ks = np.concatenate([kernel_pullback(data, z).conj().T for z in P], axis=0)
    Q = range_basis(Ks, data.tol).basis
    resid = Bs - Q @ (Q.conj().T @ Bs)
    return float(np.linalg.svd(resid, compute_uv=False)[-1])


def qe_membership_test(data: CharacteristicData, points) -> bool:
    """No nonzero ``g`` in the support has ``b_T g`` in ``H(b_T)`` on the points."""
    return qe_membership_margin(data, points) > 10 * data.tol.residual_tol
