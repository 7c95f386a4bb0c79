import numpy as np
import pytest
from hypothesis import given, strategies as st

from rowcon.errors import ShapeMismatch
from rowcon.numlin import (
    DEFAULT_TOL,
    Subspace,
    TolerancePolicy,
    as_cmat,
    herm_sqrt,
    null_basis,
    pinv,
    procrustes_unitary,
    range_basis,
    spectral_norm,
)

from oracles import msqrt

seeds = st.integers(0, 2**32 - 1)


def ginibre(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def test_tolerance_policy_rejects_nonpositive_values():
    with pytest.raises(ValueError):
        TolerancePolicy(rank_rel_tol=0.0)
    with pytest.raises(ValueError):
        TolerancePolicy(psd_tol=float("nan"))
    assert DEFAULT_TOL.as_dict() == {"rank_rel_tol": 1e-9, "residual_tol": 1e-8, "psd_tol": 1e-8}


def test_as_cmat_validates_shape_and_finiteness():
    assert as_cmat([1, 2]).shape == (2, 1)
    with pytest.raises(ShapeMismatch):
        as_cmat(np.zeros((2, 2)), rows=3)
    with pytest.raises(ValueError):
        as_cmat([[np.inf]])
    with pytest.raises(ShapeMismatch):
        as_cmat(np.zeros((2, 2, 2)))


def test_spectral_norm_of_empty_matrix_is_zero():
    assert spectral_norm(np.zeros((0, 3))) == 0.0
    assert spectral_norm(np.diag([3.0, -4.0])) == pytest.approx(4.0)


@given(seeds)
def test_range_and_null_are_orthogonal_complements(seed):
    rng = np.random.default_rng(seed)
    m, k = rng.integers(1, 6, size=2)
    r = int(rng.integers(0, min(m, k) + 1))
    M = ginibre(rng, m, r) @ ginibre(rng, r, k)
    ran, ker = range_basis(M), null_basis(M)
    assert ran.dim == r
    assert ker.dim == k - r
    assert spectral_norm(M @ ker.basis) < 1e-10 * max(1.0, spectral_norm(M))
    assert np.allclose(ran.basis.conj().T @ ran.basis, np.eye(r))
    assert ran.complement().join(ran).is_full


def test_subspace_lattice_operations():
    e = np.eye(3)
    a = range_basis(e[:, :2])
    b = range_basis(e[:, 1:])
    assert a.meet(b).dim == 1
    assert a.meet(b).equals(range_basis(e[:, [1]]))
    assert a.join(b).is_full
    assert a.contains(range_basis(e[:, [0]]))
    assert not a.contains(b)
    assert Subspace.zero(3).dim == 0 and Subspace.full(3).dim == 3
    assert a.max_angle(a) == pytest.approx(0.0, abs=1e-12)
    assert a.residual(e[:, [2]]) == pytest.approx(1.0)


@given(seeds)
def test_herm_sqrt_matches_scipy_sqrtm(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 6))
    A = ginibre(rng, n, n)
    P = A @ A.conj().T
    S = herm_sqrt(P)
    assert np.allclose(S, S.conj().T)
    assert np.allclose(S, msqrt(P), atol=1e-8)


def test_herm_sqrt_clips_roundoff_negatives():
    P = np.diag([1.0, -1e-14])
    assert np.allclose(herm_sqrt(P), np.diag([1.0, 0.0]))


@given(seeds)
def test_pinv_matches_numpy(seed):
    rng = np.random.default_rng(seed)
    m, k = rng.integers(1, 6, size=2)
    M = ginibre(rng, m, k)
    assert np.allclose(pinv(M), np.linalg.pinv(M), atol=1e-10)


@given(seeds)
def test_procrustes_recovers_planted_unitary(seed):
    rng = np.random.default_rng(seed)
    n, k = int(rng.integers(1, 5)), int(rng.integers(1, 6))
    Q, _ = np.linalg.qr(ginibre(rng, n, n))
    A = ginibre(rng, n, k)
    U, res = procrustes_unitary(A, Q @ A)
    assert res < 1e-10
    assert np.allclose(U.conj().T @ U, np.eye(n))
