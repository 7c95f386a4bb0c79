"""Seeded random and structured row contractions for test batteries.

Kinds
-----
``generic``
    Ginibre blocks scaled to row norm 0.9.
``partial_isometry``
    Polar projection of a Ginibre row onto a random rank ``r < n``.
``coisometry_free``
    A random partial isometry ``V`` of rank ``r < n`` minus a random strict
    contraction from ``ker V`` into ``(ran V)^perp``; rank ``D_{T^*} >= 1`` by
    construction and the draw is rejected otherwise.
``commuting``
    Commuting tuples from three families: scalar multiples of one matrix,
    unitarily rotated diagonal tuples, and compressed commuting shifts plus
    an isometric diagonal part.

Structured members
------------------
:func:`free_shift_compression` is the free shift compressed to short words,
a CNC tuple that is not CCNC once words of length two are kept.
:func:`shift_compression` is the commuting shift on ``C[z_1..z_d]`` compressed
to polynomials of degree at most ``N`` (a commuting CNC row partial isometry).
:func:`non_qe_instance` perturbs its degree-one case by a pure part along the
antisymmetric direction ``e_1 (x) z_2 - e_2 (x) z_1``; the result is CCNC but
fails the QE condition.
"""

from __future__ import annotations

from math import comb

import numpy as np

from .classify import is_cnc, multi_indices
from .numlin import DEFAULT_TOL, TolerancePolicy, null_basis, range_basis
from .rowop import RowContraction
from .sampling import _ginibre, random_strict_contraction, random_unitary

__all__ = [
    "KINDS",
    "gen_ensemble",
    "random_row_contraction",
    "random_partial_isometry",
    "random_coisometry_free",
    "random_commuting",
    "shift_compression",
    "free_shift_compression",
    "random_free_shift",
    "non_qe_instance",
    "random_non_qe",
    "block_diagonal",
    "row_coisometry",
    "split_partial_isometry",
    "commuting_split_partial_isometry",
]

KINDS = ("generic", "partial_isometry", "coisometry_free", "commuting")


def _rank_range(n: int, rng: np.random.Generator) -> int:
    return int(rng.integers(0, n)) if n > 1 else 0


def random_row_contraction(
    n: int, d: int, rng: np.random.Generator, norm: float = 0.9, tol: TolerancePolicy = DEFAULT_TOL
) -> RowContraction:
    row = _ginibre((n, n * d), rng)
    row *= norm / np.linalg.norm(row, 2)
    return RowContraction.from_row(row, d, tol)


def random_partial_isometry(
    n: int, d: int, rng: np.random.Generator, rank: int | None = None,
    tol: TolerancePolicy = DEFAULT_TOL,
) -> RowContraction:
    r = _rank_range(n, rng) if rank is None else rank
    U, _, Wh = np.linalg.svd(_ginibre((n, n * d), rng), full_matrices=False)
    return RowContraction.from_row(U[:, :r] @ Wh[:r], d, tol)


def random_coisometry_free(
    n: int, d: int, rng: np.random.Generator, tol: TolerancePolicy = DEFAULT_TOL,
    max_tries: int = 100,
) -> RowContraction:
    for _ in range(max_tries):
        V = random_partial_isometry(n, d, rng, tol=tol)
        gamma0 = range_basis(V.row, tol).complement().basis
        gamma_inf = null_basis(V.row, tol).basis
        delta = random_strict_contraction(gamma0.shape[1], gamma_inf.shape[1], rng)
        row = V.row - gamma0 @ delta @ gamma_inf.conj().T
        T = RowContraction.from_row(row, d, tol)
        defect = np.eye(n) - T.row @ T.row.conj().T
        if range_basis(defect, tol).dim >= 1:
            return T
    raise RuntimeError("rejection sampling for a coisometry-free tuple failed")


def shift_compression(degree: int, d: int, tol: TolerancePolicy = DEFAULT_TOL) -> RowContraction:
    """The commuting shift compressed to polynomials of degree ``<= degree``.

    Monomials ``z^a`` are normalized in the symmetric Fock space norm, where
    ``z_k`` maps ``e_a`` to ``sqrt((a_k + 1)/(|a| + 1)) e_{a + e_k}``.
    """
    idx = list(multi_indices(d, degree))
    pos = {a: i for i, a in enumerate(idx)}
    n = len(idx)
    blocks = np.zeros((d, n, n), dtype=complex)
    for a in idx:
        if sum(a) == degree:
            continue
        for k in range(d):
            b = a[:k] + (a[k] + 1,) + a[k + 1 :]
            blocks[k, pos[b], pos[a]] = np.sqrt((a[k] + 1) / (sum(a) + 1))
    return RowContraction(blocks, tol)


def free_shift_compression(degree: int, d: int, tol: TolerancePolicy = DEFAULT_TOL) -> RowContraction:
    """The free shift ``e_w -> e_{kw}`` compressed to words of length ``<= degree``.

    It is CNC, but for ``degree >= 2`` and ``d >= 2`` its symmetric resolvent
    orbit misses the antisymmetric words, so it is not CCNC.
    """
    words = [()]
    layer = [()]
    for _ in range(degree):
        layer = [(k,) + w for w in layer for k in range(d)]
        words += layer
    pos = {w: i for i, w in enumerate(words)}
    n = len(words)
    blocks = np.zeros((d, n, n), dtype=complex)
    for w in words:
        if len(w) == degree:
            continue
        for k in range(d):
            blocks[k, pos[(k,) + w], pos[w]] = 1.0
    return RowContraction(blocks, tol)


def random_free_shift(rng: np.random.Generator, tol: TolerancePolicy = DEFAULT_TOL) -> RowContraction:
    """Unitary conjugate of a degree-2 free shift compression with ``d = 2``."""
    T = free_shift_compression(2, 2, tol)
    return T.conjugate_by(random_unitary(T.n, rng))


def non_qe_instance(r: float = 0.5, tol: TolerancePolicy = DEFAULT_TOL) -> RowContraction:
    """A CCNC tuple on ``C^3`` (``d = 2``) that violates the QE condition.

    Start from the degree-one shift compression ``V`` (basis ``1, z_1, z_2``)
    and subtract ``r`` times the rank-one map sending the unit vector
    ``x = (e_1 (x) z_2 - e_2 (x) z_1)/sqrt(2)`` of ``ker V`` to the constant
    ``1``. The resolvent orbit of ``1`` is unchanged, so its ``z^*``-lift never
    reaches ``x``, while ``x`` lies in ``ran T^*``.
    """
    V = shift_compression(1, 2, tol)
    pos = {a: i for i, a in enumerate(multi_indices(2, 1))}
    x = np.zeros(6, dtype=complex)
    x[0 * 3 + pos[(0, 1)]] = 1 / np.sqrt(2)   # e_1 (x) z_2
    x[1 * 3 + pos[(1, 0)]] = -1 / np.sqrt(2)  # e_2 (x) z_1
    one = np.zeros(3, dtype=complex)
    one[pos[(0, 0)]] = 1.0
    return RowContraction.from_row(V.row - r * np.outer(one, x.conj()), 2, tol)


def random_non_qe(rng: np.random.Generator, tol: TolerancePolicy = DEFAULT_TOL) -> RowContraction:
    """Unitary conjugate of :func:`non_qe_instance` with a random strength."""
    T = non_qe_instance(r=0.1 + 0.8 * rng.random(), tol=tol)
    return T.conjugate_by(random_unitary(3, rng))


def row_coisometry(m: int, d: int, rng: np.random.Generator) -> np.ndarray:
    """Blocks of a random row co-isometry on ``C^m`` (orthonormal rows)."""
    row = random_unitary(m * d, rng)[:m]
    return np.stack([row[:, k * m : (k + 1) * m] for k in range(d)])


def block_diagonal(*tuples) -> np.ndarray:
    """Direct sum of several ``(d, n_i, n_i)`` block arrays."""
    d = tuples[0].shape[0]
    n = sum(t.shape[1] for t in tuples)
    out = np.zeros((d, n, n), dtype=complex)
    at = 0
    for t in tuples:
        m = t.shape[1]
        out[:, at : at + m, at : at + m] = t
        at += m
    return out


def _conjugated_split(iso: np.ndarray, cnc: np.ndarray, rng: np.random.Generator,
                      tol: TolerancePolicy) -> tuple[RowContraction, np.ndarray]:
    blocks = block_diagonal(iso, cnc)
    n, m = blocks.shape[1], iso.shape[1]
    U = random_unitary(n, rng)
    V = RowContraction(np.stack([U @ B @ U.conj().T for B in blocks]), tol)
    return V, U[:, :m]


def split_partial_isometry(m: int, n_cnc: int, d: int, rng: np.random.Generator,
                           tol: TolerancePolicy = DEFAULT_TOL) -> tuple[RowContraction, np.ndarray]:
    """``V = V_iso (+) V_cnc`` in a random orthonormal frame.

    ``V_iso`` is a row co-isometry on ``C^m``; ``V_cnc`` is a random partial
    isometry of rank below ``n_cnc``, redrawn until it is CNC. Returns ``V``
    and an orthonormal basis of the ``V_iso`` summand.
    """
    for _ in range(100):
        C = random_partial_isometry(n_cnc, d, rng, tol=tol)
        if is_cnc(C, tol):
            return _conjugated_split(row_coisometry(m, d, rng), C.blocks, rng, tol)
    raise RuntimeError("could not draw a CNC partial isometry")


def commuting_split_partial_isometry(
    rng: np.random.Generator, d: int | None = None, tol: TolerancePolicy = DEFAULT_TOL
) -> tuple[RowContraction, np.ndarray]:
    """Commuting version of :func:`split_partial_isometry`.

    The CNC summand is a compressed commuting shift and the co-isometric
    summand is diagonal with unit rows, so the components commute.
    """
    d = int(rng.integers(1, 4)) if d is None else d
    S = shift_compression(int(rng.integers(0, 3)), d, tol).blocks
    m = int(rng.integers(1, 3))
    rows = _ginibre((m, d), rng)
    rows /= np.linalg.norm(rows, axis=1, keepdims=True)
    iso = np.stack([np.diag(rows[:, k]) for k in range(d)])
    return _conjugated_split(iso, S, rng, tol)


def random_commuting(n: int, d: int, rng: np.random.Generator, tol: TolerancePolicy = DEFAULT_TOL,
                     family: int | None = None) -> RowContraction:
    family = int(rng.integers(0, 3)) if family is None else family
    if family == 0:
        # T_k = c_k A; an optional unitary block in A makes the tuple non-CNC
        c = _ginibre(d, rng)
        c /= np.linalg.norm(c)
        k = int(rng.integers(0, n + 1))
        diag = np.concatenate([np.exp(2j * np.pi * rng.random(k)), 0.95 * rng.random(n - k)])
        if rng.random() < 0.5:
            c *= 0.5 + 0.5 * rng.random()
        U = random_unitary(n, rng)
        A = U @ np.diag(diag) @ U.conj().T
        blocks = np.stack([ck * A for ck in c])
    elif family == 1:
        # diagonal tuple: each coordinate carries a vector of C^d of norm <= 1
        rows = _ginibre((n, d), rng)
        rows /= np.linalg.norm(rows, axis=1, keepdims=True)
        scale = np.where(rng.random(n) < 0.4, 1.0, rng.random(n))
        rows *= scale[:, None]
        blocks = np.stack([np.diag(rows[:, k]) for k in range(d)])
        U = random_unitary(n, rng)
        blocks = np.stack([U @ B @ U.conj().T for B in blocks])
    else:
        # compressed commuting shift plus an isometric diagonal part
        degree = 1 if comb(1 + d, d) <= n else 0
        S = shift_compression(degree, d, tol).blocks
        m = n - S.shape[1]
        if m > 0:
            rows = _ginibre((m, d), rng)
            rows /= np.linalg.norm(rows, axis=1, keepdims=True)
            iso = np.stack([np.diag(rows[:, k]) for k in range(d)])
            blocks = block_diagonal(S, iso)
        else:
            blocks = S[:, :n, :n]
        U = random_unitary(n, rng)
        blocks = np.stack([U @ B @ U.conj().T for B in blocks])
    row = np.hstack(list(blocks))
    norm = np.linalg.norm(row, 2)
    if norm > 1.0:
        blocks = blocks / norm
    return RowContraction(blocks, tol)


def gen_ensemble(n: int, d: int, count: int, seed: int, kind: str = "generic",
                 tol: TolerancePolicy = DEFAULT_TOL) -> list[RowContraction]:
    """Deterministic list of ``count`` tuples of the given kind."""
    if min(n, d, count) < 1:
        raise ValueError("n, d and count must be at least 1")
    rng = np.random.default_rng(seed)
    makers = {
        "generic": lambda: random_row_contraction(n, d, rng, tol=tol),
        "partial_isometry": lambda: random_partial_isometry(n, d, rng, tol=tol),
        "coisometry_free": lambda: random_coisometry_free(n, d, rng, tol=tol),
        "commuting": lambda: random_commuting(n, d, rng, tol=tol),
    }
    if kind not in makers:
        raise ValueError(f"unknown ensemble kind {kind!r}; expected one of {KINDS}")
    return [makers[kind]() for _ in range(count)]
