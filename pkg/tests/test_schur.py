import numpy as np
import pytest
from hypothesis import given, strategies as st

from rowcon.errors import ShapeMismatch, Unital
from rowcon.sampling import BallSampler, random_unitary
from rowcon.schur import (
    ConstantSchur,
    FunctionSchur,
    Realization,
    SampledTable,
    coincide,
    coincide_weakly,
    evaluate,
    evaluate_many,
    herglotz_data,
    is_schur_class,
    kernel_gram,
    support,
    szego_dbr_kernel,
)

seeds = st.integers(0, 2**32 - 1)


def unitary_colligation(rng, n=2, d=2, p=1, q=3):
    """Transfer function of a random unitary ``C^n + C^q -> C^{nd} + C^p``."""
    assert n + q == n * d + p
    U = random_unitary(n + q, rng)
    A = U[: n * d, :n].reshape(d, n, n)
    B = U[: n * d, n:]
    C = U[n * d :, :n]
    D = U[n * d :, n:]
    return Realization(A, B, C, D)


def test_scalar_realization_closed_form():
    a, b, c, dd = 0.5, 0.4, 0.3, 0.1
    f = Realization([[[a]]], [[b]], [[c]], [[dd]])
    for z in [0.0, 0.3, -0.2 + 0.5j]:
        assert f(z)[0, 0] == pytest.approx(dd + c * b * z / (1 - a * z))


def test_constant_and_function_wrappers():
    c = ConstantSchur([[0.1, 0.2]], 3)
    assert (c.p, c.q, c.d) == (1, 2, 3)
    assert np.allclose(evaluate(c, np.zeros(3)), [[0.1, 0.2]])
    f = FunctionSchur(lambda z: z[None, :], 1, 2, 2, "coordinates")
    assert f.describe()["name"] == "coordinates"
    with pytest.raises(ShapeMismatch):
        FunctionSchur(lambda z: np.zeros((2, 2)), 1, 2, 2)(np.zeros(2))


@given(seeds)
def test_unitary_colligations_give_positive_kernels(seed):
    rng = np.random.default_rng(seed)
    b = unitary_colligation(rng)
    P = BallSampler(2, count=20, seed=seed % 1000).points()
    g = kernel_gram(b, P)
    assert g.min_eig > -1e-9
    assert is_schur_class(b, P)
    assert np.all(np.linalg.norm(evaluate_many(b, P), ord=2, axis=(1, 2)) <= 1 + 1e-10)


def test_szego_kernel_and_non_schur_detection():
    z, w = np.array([0.3, 0.1]), np.array([0.2j, -0.4])
    assert szego_dbr_kernel(None, z, w)[0, 0] == pytest.approx(1 / (1 - np.vdot(w, z)))
    big = ConstantSchur([[1.5]], 2)
    assert not is_schur_class(big, BallSampler(2, count=5).points())


def test_sampled_table_lookup_and_support():
    P = np.array([[0.0], [0.5]])
    t = SampledTable(P, np.array([[[0.0, 0.0]], [[0.5, 0.0]]]))
    assert np.allclose(t(0.5), [[0.5, 0.0]])
    with pytest.raises(KeyError):
        t(0.25)
    assert support(t, P).dim == 1


@given(seeds)
def test_coincide_recovers_planted_unitaries(seed):
    rng = np.random.default_rng(seed)
    b = unitary_colligation(rng)
    R, Q = random_unitary(1, rng), random_unitary(3, rng)
    c = FunctionSchur(lambda z: R @ b(z) @ Q.conj().T, 1, 3, 2)
    P = BallSampler(2, count=15).points()
    hit = coincide(b, c, P)
    assert hit is not None
    assert np.allclose(hit.R @ evaluate_many(b, P), evaluate_many(c, P) @ hit.Q, atol=1e-8)
    assert coincide_weakly(b, c, P) is not None


def test_coincide_with_matrix_valued_outputs(rng):
    # two-dimensional output: p = 2, q = 2, n = 2, d = 2 so n + q = nd + p
    b = unitary_colligation(rng, n=2, d=2, p=2, q=4)
    R, Q = random_unitary(2, rng), random_unitary(4, rng)
    c = FunctionSchur(lambda z: R @ b(z) @ Q.conj().T, 2, 4, 2)
    P = BallSampler(2, count=15).points()
    hit = coincide(b, c, P)
    assert hit is not None
    assert np.allclose(hit.R.conj().T @ hit.R, np.eye(2))
    assert np.allclose(hit.Q.conj().T @ hit.Q, np.eye(4))


def test_different_functions_do_not_coincide():
    P = BallSampler(1, count=10).points()
    f = FunctionSchur(lambda z: np.array([[0.5 * z[0]]]), 1, 1, 1)
    g = FunctionSchur(lambda z: np.array([[0.5 * z[0] ** 2]]), 1, 1, 1)
    assert coincide(f, g, P) is None
    assert coincide_weakly(f, g, P) is None
    with pytest.raises(ShapeMismatch):
        coincide(f, ConstantSchur([[0.0, 0.0]], 1), P)


def test_herglotz_kernel_identities(rng):
    b = unitary_colligation(rng, n=1, d=2, p=1, q=2)
    sq = FunctionSchur(lambda z: 0.8 * b(z)[:, :1], 1, 1, 2)
    z, w, o = np.array([0.3, 0.2j]), np.array([-0.1, 0.4]), np.zeros(2)
    Hz, K, _ = herglotz_data(sq, z, w)
    Hw, _, _ = herglotz_data(sq, w, w)
    assert np.allclose(Hz + Hw.conj().T, 2 * (1 - np.vdot(w, z)) * K)
    K_z0 = herglotz_data(sq, z, o)[1]
    K_0w = herglotz_data(sq, o, w)[1]
    K_00 = herglotz_data(sq, o, o)[1]
    assert np.allclose(K - K_z0 - K_0w + K_00, np.vdot(w, z) * K)
    with pytest.raises(Unital):
        herglotz_data(ConstantSchur([[1.0]], 2), z, w)
