"""CNC, CCNC and quasi-extreme classification of row contractions.

Three spans drive everything here, all seeded by ``ran D_{T^*}``:

* the free Krylov span, closed under every ``T_k`` (CNC test);
* the resolvent span of ``(I - T z^*)^{-1} ran D_{T^*}`` over sampled ball
  points ``z`` (CCNC test);
* the span of ``z^* (I - T z^*)^{-1} ran D_{T^*}`` inside ``C^{nd}`` (QE test).

The sampled spans have brute-force oracles built from symmetrized monomials:
expanding ``(I - T z^*)^{-1} = sum_k (T z^*)^k`` shows that the resolvent span
equals the span of ``T^n ran D_{T^*}`` over multi-indices ``n``, and a degree
count shows ``|n| <= n_dim`` suffices.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import NotPartialIsometry, SamplerExhausted
from .numlin import Subspace, TolerancePolicy, range_basis
from .rowop import (
    RowContraction,
    defect_adj_range,
    is_commuting,
    is_partial_isometry,
    resolvents,
    restricted_range_space,
    sym_monomial,
)
from .sampling import BallSampler

__all__ = [
    "ClassificationReport",
    "free_krylov_closure",
    "cnc_span",
    "is_cnc",
    "ccnc_span",
    "ccnc_span_oracle",
    "is_ccnc",
    "qe_span",
    "qe_span_oracle",
    "qe_condition",
    "qe_residual",
    "is_qe",
    "max_isometric_coinvariant",
    "coinvariant_by_intersection",
    "multi_indices",
    "classify",
]


@dataclass(frozen=True, eq=False)
class ClassificationReport:
    is_cnc: bool
    is_ccnc: bool
    is_qe: bool
    is_commuting: bool
    cnc_span: Subspace
    ccnc_span: Subspace
    qe_span: Subspace
    hprime: Subspace

    def as_dict(self) -> dict:
        return {
            "is_cnc": self.is_cnc,
            "is_ccnc": self.is_ccnc,
            "is_qe": self.is_qe,
            "is_commuting": self.is_commuting,
            "cnc_span_dim": self.cnc_span.dim,
            "ccnc_span_dim": self.ccnc_span.dim,
            "qe_span_dim": self.qe_span.dim,
            "hprime_dim": self.hprime.dim,
        }


def _tol(T: RowContraction, tol: TolerancePolicy | None) -> TolerancePolicy:
    return T.tol if tol is None else tol


def _sampler(T: RowContraction, sampler: BallSampler | None) -> BallSampler:
    return BallSampler(T.d) if sampler is None else sampler


def free_krylov_closure(
    T: RowContraction, seed: Subspace, tol: TolerancePolicy | None = None
) -> Subspace:
    """Smallest subspace containing ``seed`` and invariant under every ``T_k``."""
    tol = _tol(T, tol)
    S = seed
    for _ in range(T.n + 1):
        if S.dim == 0 or S.dim == T.n:
            return S
        grown = range_basis(np.hstack([S.basis] + [B @ S.basis for B in T.blocks]), tol)
        if grown.dim == S.dim:
            return S
        S = grown
    return S


def cnc_span(T: RowContraction, tol: TolerancePolicy | None = None) -> Subspace:
    """Free Krylov closure of ``ran D_{T^*}``."""
    return free_krylov_closure(T, defect_adj_range(T, tol), tol)


def is_cnc(T: RowContraction, tol: TolerancePolicy | None = None) -> bool:
    return cnc_span(T, tol).is_full


def _saturated_span(columns: np.ndarray, per_point: int, ambient: int, tol) -> Subspace:
    """Span of sampled columns, checking that the rank stopped growing.

    The rank of the first half of the samples is compared with the rank of
    all of them; growth in the second half without reaching the ambient
    dimension means the budget was too small.
    """
    full = range_basis(columns, tol)
    if full.dim == ambient:
        return full
    npts = columns.shape[1] // max(per_point, 1)
    half = range_basis(columns[:, : (npts // 2) * per_point], tol)
    if half.dim < full.dim:
        raise SamplerExhausted(
            f"sampled span still growing ({half.dim} -> {full.dim}) at {npts} points",
            first_half=half.dim,
            total=full.dim,
        )
    return full


def ccnc_span(
    T: RowContraction, sampler: BallSampler | None = None, tol: TolerancePolicy | None = None
) -> Subspace:
    """Span of ``(I - T z^*)^{-1} ran D_{T^*}`` over the sampler's points."""
    tol = _tol(T, tol)
    seed = defect_adj_range(T, tol)
    if seed.dim == 0:
        return Subspace.zero(T.n, tol)
    R = resolvents(T, _sampler(T, sampler).points())
    cols = np.concatenate(list(R @ seed.basis), axis=1)
    return _saturated_span(cols, seed.dim, T.n, tol)


def multi_indices(d: int, max_degree: int):
    """All multi-indices in ``N^d`` with total degree at most ``max_degree``."""
    for total in range(max_degree + 1):
        for cut in itertools.combinations(range(total + d - 1), d - 1):
            bounds = (-1,) + cut + (total + d - 1,)
            yield tuple(bounds[i + 1] - bounds[i] - 1 for i in range(d))


def ccnc_span_oracle(T: RowContraction, tol: TolerancePolicy | None = None) -> Subspace:
    """Span of ``T^n ran D_{T^*}`` over symmetrized monomials with ``|n| <= n_dim``."""
    tol = _tol(T, tol)
    seed = defect_adj_range(T, tol)
    if seed.dim == 0:
        return Subspace.zero(T.n, tol)
    cache: dict = {}
    cols = [sym_monomial(T, m, cache) @ seed.basis for m in multi_indices(T.d, T.n)]
    return range_basis(np.hstack(cols), tol)


def is_ccnc(
    T: RowContraction, sampler: BallSampler | None = None, tol: TolerancePolicy | None = None
) -> bool:
    return ccnc_span(T, sampler, tol).is_full


def qe_span(
    T: RowContraction, sampler: BallSampler | None = None, tol: TolerancePolicy | None = None
) -> Subspace:
    """Span of ``z^* (I - T z^*)^{-1} ran D_{T^*}`` inside ``C^{nd}``."""
    tol = _tol(T, tol)
    seed = defect_adj_range(T, tol)
    nd = T.n * T.d
    if seed.dim == 0:
        return Subspace.zero(nd, tol)
    pts = _sampler(T, sampler).points()
    R = resolvents(T, pts) @ seed.basis
    # stack conj(z_k) * R(z) B over k for every point
    lifted = np.conj(pts)[:, :, None, None] * R[:, None, :, :]
    cols = np.concatenate(list(lifted.reshape(len(pts), nd, seed.dim)), axis=1)
    return _saturated_span(cols, seed.dim, nd, tol)


def qe_span_oracle(T: RowContraction, tol: TolerancePolicy | None = None) -> Subspace:
    """Coefficient span of ``z^* (I - T z^*)^{-1} ran D_{T^*}``.

    The coefficient of ``conj(z)^m`` is ``sum_{k : m_k > 0} e_k (x) T^{m - e_k} B``.
    """
    tol = _tol(T, tol)
    seed = defect_adj_range(T, tol)
    n, d = T.n, T.d
    if seed.dim == 0:
        return Subspace.zero(n * d, tol)
    cache: dict = {}
    cols = []
    for m in multi_indices(d, n + 1):
        if sum(m) == 0:
            continue
        blocks = []
        for k in range(d):
            if m[k] > 0:
                prev = m[:k] + (m[k] - 1,) + m[k + 1 :]
                blocks.append(sym_monomial(T, prev, cache) @ seed.basis)
            else:
                blocks.append(np.zeros((n, seed.dim), dtype=complex))
        cols.append(np.vstack(blocks))
    return range_basis(np.hstack(cols), tol)


def qe_residual(
    T: RowContraction, sampler: BallSampler | None = None, tol: TolerancePolicy | None = None
) -> float:
    """Largest distance from an orthonormal basis vector of ``(ker T)^perp`` to the QE span."""
    tol = _tol(T, tol)
    ker_perp = range_basis(T.column_adjoint, tol)
    return qe_span(T, sampler, tol).residual(ker_perp.basis)


def qe_condition(
    T: RowContraction, sampler: BallSampler | None = None, tol: TolerancePolicy | None = None
) -> bool:
    """``(ker T)^perp`` is contained in the QE span."""
    tol = _tol(T, tol)
    return qe_residual(T, sampler, tol) <= tol.residual_tol


def is_qe(
    T: RowContraction, sampler: BallSampler | None = None, tol: TolerancePolicy | None = None
) -> bool:
    return is_ccnc(T, sampler, tol) and qe_condition(T, sampler, tol)


def max_isometric_coinvariant(V: RowContraction, tol: TolerancePolicy | None = None) -> Subspace:
    """Largest co-invariant subspace on which ``V^*`` acts isometrically.

    For a row partial isometry this is the orthogonal complement of the free
    Krylov closure of ``(ran V)^perp``.
    """
    tol = _tol(V, tol)
    if not is_partial_isometry(V, tol):
        raise NotPartialIsometry("the largest isometric co-invariant subspace needs a partial isometry")
    seed = range_basis(V.row, tol).complement()
    return free_krylov_closure(V, seed, tol).complement()


def coinvariant_by_intersection(
    V: RowContraction, points, tol: TolerancePolicy | None = None
) -> Subspace:
    """Intersection of the restricted range spaces ``ra(V - z)`` over scalar points."""
    tol = _tol(V, tol)
    perps = [restricted_range_space(V, z, tol).complement().basis for z in np.asarray(points)]
    return range_basis(np.hstack(perps), tol).complement()


def classify(
    T: RowContraction, sampler: BallSampler | None = None, tol: TolerancePolicy | None = None
) -> ClassificationReport:
    """Run all classification tests and collect the spans."""
    tol = _tol(T, tol)
    cnc = cnc_span(T, tol)
    ccnc = ccnc_span(T, sampler, tol)
    q = qe_span(T, sampler, tol)
    ker_perp = range_basis(T.column_adjoint, tol)
    is_ccnc_ = ccnc.is_full
    return ClassificationReport(
        is_cnc=cnc.is_full,
        is_ccnc=is_ccnc_,
        is_qe=is_ccnc_ and q.contains(ker_perp, tol.residual_tol),
        is_commuting=is_commuting(T, tol),
        cnc_span=cnc,
        ccnc_span=ccnc,
        qe_span=q,
        hprime=cnc.complement(),
    )
