"""Finite-grid surrogates of the Herglotz space of a square Schur function.

For a square Schur function ``b`` the Herglotz kernel

    K^b(z, w) = (I - b(z))^{-1} k^b(z, w) (I - b(w)^*)^{-1}

satisfies ``K(z, w) - K(z, 0) - K(0, w) + K(0, 0) = z w^* K(z, w)``. On a grid
``z_1 = 0, z_2, ..., z_N`` the block Gram matrix ``[K(z_i, z_j)]`` is factored
as ``F^* F``; the columns of ``F_z`` (``r x p``) are the coordinates of the
kernel vectors ``K_z h``. The identity above makes

    z^* K_z h  ->  (K_z - K_0) h

an exact isometry between the represented spans, so its least-squares
realization ``V`` is a row partial isometry on ``C^r``. Every statement in
this module concerns the represented finite span only.

Contractive extensions ``D`` of ``V`` give Gleason solutions for ``b``:
multiplication by ``I - b`` carries the Herglotz space onto ``H(b)`` and

    bb[D](z) = (I_d (x) (I - b(z))) (I_d (x) F_z^*) D^* F_0 (I - b(0)).

Co-isometric extensions give extremal solutions. :func:`nonequivalence_probe`
builds two of them with orthogonal ``D^* K_0`` parts and compares the
characteristic functions of the resulting Gleason operators.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    NotCCNC,
    NotExtension,
    PreconditionUnmet,
    RankDeficientGrid,
    ShapeMismatch,
    Unital,
)
from .numlin import (
    DEFAULT_TOL,
    Subspace,
    TolerancePolicy,
    pinv,
    range_basis,
    spectral_norm,
)
from .rowop import RowContraction
from .sampling import BallSampler, random_unitary
from .schur import COND_CAP, SchurFunction, coincide_weakly, evaluate_many

__all__ = [
    "GridSpace",
    "VbData",
    "GleasonData",
    "ProbeReport",
    "grid_space",
    "herglotz_gram",
    "vb_action",
    "coisometric_extension",
    "gleason_from_extension",
    "gleason_operator",
    "nonequivalence_probe",
    "probe_fixture",
]


@dataclass(frozen=True, eq=False)
class GridSpace:
    """Herglotz-kernel Gram on a grid and its factor ``F`` (``N`` blocks ``r x p``)."""

    b: SchurFunction
    points: np.ndarray
    values: np.ndarray
    gram: np.ndarray
    coords: np.ndarray
    tol: TolerancePolicy = field(default=DEFAULT_TOL)

    @property
    def rank(self) -> int:
        return self.coords.shape[1]

    @property
    def p(self) -> int:
        return self.b.p

    @property
    def d(self) -> int:
        return self.b.d

    def gram_residual(self) -> float:
        """``||F^* F - gram||``, the loss from the rank cutoff."""
        F = np.concatenate(list(self.coords), axis=1)
        return spectral_norm(F.conj().T @ F - self.gram)

    def describe(self) -> dict:
        return {"grid_points": len(self.points), "rank": self.rank, "p": self.p, "d": self.d}


def herglotz_gram(points: np.ndarray, values: np.ndarray) -> np.ndarray:
    """Block Gram ``[K^b(z_i, z_j)]`` from the values ``b(z_i)`` (``(N, p, p)``)."""
    N, p, _ = values.shape
    I = np.eye(p)
    U = np.stack([np.linalg.inv(I - v) for v in values])
    S = 1.0 / (1.0 - points @ points.conj().T)
    BB = np.einsum("iab,jcb->iajc", values, values.conj())
    k = (I[None, :, None, :] - BB) * S[:, None, :, None]
    K = np.einsum("iab,ibjc,jdc->iajd", U, k, U.conj())
    G = K.reshape(N * p, N * p)
    return 0.5 * (G + G.conj().T)


def grid_space(b: SchurFunction, points, tol: TolerancePolicy = DEFAULT_TOL) -> GridSpace:
    """Sample ``b`` on the grid, check it is non-unital there and factor the Gram.

    The origin is prepended when the grid does not already start with it.
    """
    if b.p != b.q:
        raise ShapeMismatch("the Herglotz space needs a square Schur function")
    P = np.asarray(points, dtype=complex).reshape(-1, b.d)
    if len(P) == 0 or np.linalg.norm(P[0]) > 0:
        P = np.vstack([np.zeros((1, b.d), dtype=complex), P])
    values = evaluate_many(b, P)
    I = np.eye(b.p)
    for v, z in zip(values, P):
        if np.linalg.cond(I - v) > COND_CAP:
            raise Unital("I - b(z) is singular on the grid", point=z.tolist())
    G = herglotz_gram(P, values)
    w, U = np.linalg.eigh(G)
    if w[-1] <= 0:
        raise RankDeficientGrid("the Herglotz Gram vanishes on the grid")
    keep = w > tol.rank_rel_tol * w[-1]
    F = (U[:, keep] * np.sqrt(w[keep])).conj().T  # r x Np with F^* F = G
    coords = np.stack([F[:, i * b.p : (i + 1) * b.p] for i in range(len(P))])
    return GridSpace(b=b, points=P, values=values, gram=G, coords=coords, tol=tol)


@dataclass(frozen=True, eq=False)
class VbData:
    """Least-squares realization of ``V^b`` on the represented span."""

    V: np.ndarray              # r x rd
    domain: Subspace           # span of the z^* K_z h inside C^{rd}
    final: Subspace            # span of the (K_z - K_0) h inside C^r
    isometry_residual: float   # ||V z^*K_z - (K_z - K_0)|| over the grid
    partial_isometry_defect: float  # ||V V^*V - V||

    @property
    def kernel(self) -> Subspace:
        return self.domain.complement()

    @property
    def cokernel(self) -> Subspace:
        return self.final.complement()


def _domain_and_range(space: GridSpace) -> tuple[np.ndarray, np.ndarray]:
    F = space.coords
    r = space.rank
    dom = np.concatenate(
        [np.kron(np.conj(z)[:, None], np.eye(r)) @ Fz for z, Fz in zip(space.points, F)], axis=1
    )
    ran = np.concatenate([Fz - F[0] for Fz in F], axis=1)
    return dom, ran


def vb_action(space: GridSpace) -> VbData:
    """Realize ``z^* K_z h -> (K_z - K_0) h`` as an ``r x rd`` matrix."""
    tol = space.tol
    dom, ran = _domain_and_range(space)
    V = ran @ pinv(dom, tol)
    domain = range_basis(dom, tol) if dom.size else Subspace.zero(dom.shape[0], tol)
    final = range_basis(V, tol)
    iso = spectral_norm(V @ dom - ran) if dom.size else 0.0
    pdef = spectral_norm(V @ V.conj().T @ V - V)
    return VbData(V=V, domain=domain, final=final, isometry_residual=iso, partial_isometry_defect=pdef)


def coisometric_extension(vb: VbData, Y) -> np.ndarray:
    """``V + P_0 Y^* K^*``: ``P_0`` frames ``(ran V)^perp``, ``K`` frames ``ker V``.

    ``Y`` must be an isometry from ``C^{dim (ran V)^perp}`` into ``C^{dim ker V}``.
    """
    P0 = vb.cokernel.basis
    Kb = vb.kernel.basis
    Y = np.asarray(Y, dtype=complex).reshape(Kb.shape[1], P0.shape[1])
    return vb.V + P0 @ Y.conj().T @ Kb.conj().T


@dataclass(frozen=True, eq=False)
class GleasonData:
    """Grid representation of the Gleason solution ``bb[D]``."""

    extension: np.ndarray
    coords: np.ndarray          # D^* F_0 (I - b(0)), rd x p
    values: np.ndarray          # bb[D](z_i), (N, pd, p)
    identity_residual: float    # max ||z bb(z) - (b(z) - b(0))|| over the grid
    extremality_defect: float   # ||bb^* bb - (I - b(0)^* b(0))||


def gleason_from_extension(space: GridSpace, Dext, vb: VbData | None = None) -> GleasonData:
    """Gleason solution ``bb[D]`` of a contractive extension ``D`` of ``V^b``."""
    tol = space.tol
    vb = vb_action(space) if vb is None else vb
    D = np.asarray(Dext, dtype=complex)
    if D.shape != vb.V.shape:
        raise ShapeMismatch(f"extension has shape {D.shape}, expected {vb.V.shape}")
    VV = vb.V.conj().T @ vb.V
    gap = spectral_norm(D @ VV - vb.V)
    if gap > tol.residual_tol:
        raise NotExtension(f"D V^*V differs from V by {gap:.3e}", residual=gap)
    if spectral_norm(D) > 1.0 + tol.residual_tol:
        raise NotExtension("the extension is not contractive", norm=spectral_norm(D))
    p, d = space.p, space.d
    I = np.eye(p)
    b0 = space.values[0]
    coords = D.conj().T @ space.coords[0] @ (I - b0)
    vals = []
    worst = 0.0
    for z, Fz, bz in zip(space.points, space.coords, space.values):
        v = np.kron(np.eye(d), (I - bz) @ Fz.conj().T) @ coords
        vals.append(v)
        zb = sum(z[k] * v[k * p : (k + 1) * p] for k in range(d))
        worst = max(worst, spectral_norm(zb - (bz - b0)))
    extremal = spectral_norm(coords.conj().T @ coords - (I - b0.conj().T @ b0))
    return GleasonData(D, coords, np.stack(vals), worst, extremal)


def gleason_operator(space: GridSpace, gdata: GleasonData) -> RowContraction:
    """Row operator ``X`` on ``C^r`` with ``X^* k_w = w^* k_w - bb b(w)^*`` on the grid.

    In Herglotz coordinates ``k_w e`` is ``F_w (I - b(w)^*) e``; the defining
    relation is solved by least squares over all grid points.
    """
    r, d, p = space.rank, space.d, space.p
    I = np.eye(p)
    Z, Y = [], []
    for w, Fw, bw in zip(space.points, space.coords, space.values):
        kw = Fw @ (I - bw.conj().T)
        Z.append(kw)
        Y.append(np.kron(np.conj(w)[:, None], np.eye(r)) @ kw - gdata.coords @ bw.conj().T)
    Xadj = np.concatenate(Y, axis=1) @ pinv(np.concatenate(Z, axis=1), space.tol)
    return RowContraction.from_row(Xadj.conj().T, d, space.tol, check=False)


@dataclass(frozen=True)
class ProbeReport:
    """Outcome of :func:`nonequivalence_probe`; ``witness`` is the verdict."""

    precondition_met: bool
    reason: str | None
    grid: dict
    kernel_dim: int = 0
    cokernel_dim: int = 0
    solution_gap: float = 0.0
    invariant_gap: float = 0.0
    identity_residuals: tuple = ()
    extremality_defects: tuple = ()
    contraction_defects: tuple = ()
    weak_residual_pair: float = float("inf")
    weak_residuals_to_b: tuple = ()
    witness: bool = False

    def as_dict(self) -> dict:
        return {
            "precondition_met": self.precondition_met,
            "reason": self.reason,
            "grid": self.grid,
            "kernel_dim": self.kernel_dim,
            "cokernel_dim": self.cokernel_dim,
            "solution_gap": self.solution_gap,
            "invariant_gap": self.invariant_gap,
            "identity_residuals": list(self.identity_residuals),
            "extremality_defects": list(self.extremality_defects),
            "contraction_defects": list(self.contraction_defects),
            "weak_residual_pair": self.weak_residual_pair,
            "weak_residuals_to_b": list(self.weak_residuals_to_b),
            "witness": self.witness,
        }


def _isometry_pair(k: int, m: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Two isometries ``C^m -> C^k`` with different ranges.

    Their ranges are orthogonal when ``k >= 2m``; otherwise they share all but
    one direction.
    """
    U = random_unitary(k, rng)
    Y1 = U[:, :m]
    if k >= 2 * m:
        return Y1, U[:, m : 2 * m]
    Y2 = U[:, :m].copy()
    Y2[:, 0] = U[:, m]
    return Y1, Y2


def _singular_value_gap(X1: RowContraction, X2: RowContraction) -> float:
    """Largest difference of sorted singular values of matching components.

    Unitarily equivalent tuples have identical component singular values, so
    a positive gap certifies inequivalence.
    """
    return max(
        float(np.max(np.abs(np.linalg.svd(a, compute_uv=False) - np.linalg.svd(b, compute_uv=False))))
        for a, b in zip(X1.blocks, X2.blocks)
    )


def nonequivalence_probe(space: GridSpace, seed: int = 20240611,
                         thresholds: tuple[float, float] = (1e-4, 1e-6),
                         strict: bool = False) -> ProbeReport:
    """Two extremal Gleason solutions whose operators share a characteristic function.

    The report carries ``||bb[D] - bb[d]||`` and a unitary-invariant gap
    between the two Gleason operators (both expected above ``thresholds[0]``) and the weak-coincidence residuals of the characteristic
    functions of the two grid Gleason operators with each other and with
    ``b`` on the grid (expected below ``thresholds[1]``). A grid where
    ``dim ker V > dim (ran V)^perp >= 1`` fails is reported with
    ``precondition_met=False`` rather than raised.
    """
    tol = space.tol
    grid = space.describe()
    vb = vb_action(space)
    kd, cd = vb.kernel.dim, vb.cokernel.dim
    if not (kd > cd >= 1):
        reason = f"need dim ker V > dim (ran V)^perp >= 1, got {kd} and {cd}"
        if strict:
            raise PreconditionUnmet(reason, kernel_dim=kd, cokernel_dim=cd)
        return ProbeReport(False, reason, grid, kd, cd)
    rng = np.random.default_rng(seed)
    # the extension only matters through Y^* P_0^* K_0, so align Y with that image
    Y1, Y2 = _isometry_pair(kd, cd, rng)
    sols, ops = [], []
    for Y in (Y1, Y2):
        D = coisometric_extension(vb, Y)
        g = gleason_from_extension(space, D, vb)
        sols.append(g)
        ops.append(gleason_operator(space, g))
    gap = spectral_norm(sols[0].coords - sols[1].coords)
    cdefs = []
    for X in ops:
        k0 = space.coords[0] @ (np.eye(space.p) - space.values[0].conj().T)
        cdefs.append(spectral_norm(X.row @ X.row.conj().T + k0 @ k0.conj().T - np.eye(space.rank)))
    report = dict(
        grid=grid, kernel_dim=kd, cokernel_dim=cd, solution_gap=gap,
        invariant_gap=_singular_value_gap(*ops),
        identity_residuals=tuple(g.identity_residual for g in sols),
        extremality_defects=tuple(g.extremality_defect for g in sols),
        contraction_defects=tuple(cdefs),
    )
    # local import: model depends on classify, which is heavier than this module
    from .model import characteristic_function

    try:
        chars = [characteristic_function(X, BallSampler(space.d), tol) for X in ops]
    except NotCCNC:
        return ProbeReport(False, "a grid Gleason operator is not CCNC", **report)
    vals = [evaluate_many(c.bT, space.points) for c in chars]
    pair = coincide_weakly(vals[0], vals[1], space.points, tol)
    to_b = [coincide_weakly(space.values, v, space.points, tol) for v in vals]
    pair_res = float("inf") if pair is None else pair.residual
    to_b_res = tuple(float("inf") if w is None else w.residual for w in to_b)
    witness = gap > thresholds[0] and report["invariant_gap"] > thresholds[0] and max((pair_res,) + to_b_res) <= thresholds[1]
    return ProbeReport(True, None, weak_residual_pair=pair_res, weak_residuals_to_b=to_b_res,
                       witness=witness, **report)


class _ScaledCoordinate(SchurFunction):
    """``z -> r z_1`` as a ``1 x 1`` Schur function of ``d`` variables."""

    def __init__(self, r: float, d: int):
        self.r, self.p, self.q, self.d = r, 1, 1, d

    def _value(self, z):
        return np.array([[self.r * z[0]]], dtype=complex)

    def describe(self) -> dict:
        out = super().describe()
        out["name"] = f"{self.r} * z_1"
        return out


def probe_fixture(r: float = 0.5, d: int = 2, count: int = 12, seed: int = 20240611,
                  tol: TolerancePolicy = DEFAULT_TOL) -> GridSpace:
    """Shipped non-quasi-extreme instance: ``b(z) = r z_1`` on a small ball grid."""
    return grid_space(_ScaledCoordinate(r, d), BallSampler(d, count=count, seed=seed).points(), tol)
