import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rowcon.classify import is_ccnc, is_qe
from rowcon.ensembles import (
    non_qe_instance,
    random_coisometry_free,
    random_partial_isometry,
    shift_compression,
)
from rowcon.errors import DegenerateTriple, NotCCNC, NotExtension
from rowcon.model import (
    NagyFoiasTheta,
    charfun_partial_isometry,
    characteristic_function,
    colligation_defect,
    colligation_transfer,
    gamma_eval,
    gleason_X_action,
    gleason_coordinates,
    gleason_solution,
    kernel_factorization_residual,
    kernel_pullback,
    model_triple,
    nagy_foias_theta,
    qe_membership_margin,
    qe_membership_test,
    verify_model,
)
from rowcon.numlin import range_basis
from rowcon.rowop import RowContraction, iso_pure_decompose, point_row, resolvent
from rowcon.sampling import BallSampler, random_unitary
from rowcon.schur import coincide, coincide_weakly, evaluate_many, kernel_gram

import oracles

seeds = st.integers(0, 2**32 - 1)


def ccnc_instance(seed):
    rng = np.random.default_rng(seed)
    while True:
        n, d = int(rng.integers(1, 5)), int(rng.integers(1, 4))
        T = random_coisometry_free(n, d, rng)
        if is_ccnc(T):
            return T, rng


# --- exact rational instance (see tests/oracle_exact.py) -------------------

def exact_instance():
    u = np.array([0.6, 0, 0, 0.8])
    w = np.array([0.8, 0, 0, -0.6])
    ginf = np.column_stack([[0, 1, 0, 0], [0, 0, 1, 0], w])
    row = np.outer([0, 1], u) - np.outer([1, 0], np.array([0.5, 0, 1 / 3]) @ ginf.T)
    return RowContraction.from_row(row.astype(complex), 2)


EXACT_POINTS = np.array([[0, 0], [1 / 3, 1 / 4], [-1 / 2, 1j / 3], [1j / 5, 2 / 5]])
# b_T(z_i) b_T(z_j)^* from the sympy oracle, frozen
EXACT_GRAM = np.array([
    [0.3611111111111111, 0.42857142857142855,
     0.31538204484508037 - 0.027440615756812513j, 0.3506688517547663 - 0.025921403123562226j],
    [0.42857142857142855, 0.5512422360248447,
     0.3390272453215194 - 0.08738411062412488j, 0.47622551791190737 - 0.036592080836137145j],
    [0.31538204484508037 + 0.027440615756812513j, 0.3390272453215194 + 0.08738411062412488j,
     0.49109938293596545, 0.3042475621988303 + 0.1261374452675618j],
    [0.3506688517547663 + 0.025921403123562226j, 0.47622551791190737 + 0.036592080836137145j,
     0.3042475621988303 - 0.1261374452675618j, 0.45473566135377347],
])


def test_exact_instance_matches_frozen_oracle():
    data = characteristic_function(exact_instance())
    assert (data.p, data.q) == (1, 3)
    V = evaluate_many(data.bT, EXACT_POINTS)
    G = np.einsum("aij,bkj->ab", V, V.conj())
    assert np.allclose(G, EXACT_GRAM, atol=1e-13)
    # |b_T(0)|^2 = |delta|^2 = 1/4 + 1/9
    assert np.linalg.norm(data.bT(np.zeros(2))) ** 2 == pytest.approx(13 / 36)


def test_exact_oracle_reproduces_frozen_values():
    sp = pytest.importorskip("sympy")
    import oracle_exact

    vals = [oracle_exact.b_T(z) for z in oracle_exact.POINTS]
    G = np.array([[complex(sp.N((a * b.H)[0, 0], 20)) for b in vals] for a in vals])
    assert np.allclose(G, EXACT_GRAM, atol=1e-15)


# --- scalar closed forms ----------------------------------------------------

@pytest.mark.parametrize("t", [0.5, 0.3 - 0.4j, -0.9j])
def test_scalar_characteristic_function_is_a_disc_automorphism(t):
    data = characteristic_function(RowContraction([[t]]))
    P = np.array([[0.0], [0.4], [-0.2 + 0.6j], [0.85j]])
    vals = evaluate_many(data.bT, P)[:, 0, 0]
    ref = oracles.mobius(t, P[:, 0])
    # p = q = 1, so frames only contribute one constant phase
    assert np.allclose(np.outer(vals, vals.conj()), np.outer(ref, ref.conj()), atol=1e-12)
    theta = np.array([nagy_foias_theta(RowContraction([[t]]), z)[0, 0] for z in P])
    assert np.allclose(np.abs(theta), np.abs(ref), atol=1e-12)


def test_scalar_kernel_pullback_closed_form():
    data = characteristic_function(RowContraction([[0.5]]))
    for z in [0.0, 0.3, -0.5j]:
        expected = (np.sqrt(3) / 2) / (1 - np.conj(z) / 2)
        assert abs(kernel_pullback(data, z)[0, 0]) == pytest.approx(abs(expected))
        ratio = kernel_pullback(data, z)[0, 0] / data.kappa0[0, 0]
        assert ratio == pytest.approx(1 / (1 - np.conj(z) / 2))


@pytest.mark.parametrize("d", [1, 2, 3])
def test_zero_tuple_gives_the_coordinate_row(d):
    T = RowContraction(np.zeros((d, 1, 1)))
    data = characteristic_function(T)
    assert np.allclose(data.delta, 0)
    P = BallSampler(d, count=8).points()
    vals = evaluate_many(data.bV, P)
    # b_V(z) = [z_1 ... z_d] up to a unitary on the right
    assert np.allclose(np.einsum("aij,bkj->ab", vals, vals.conj()), P @ P.conj().T, atol=1e-12)
    assert coincide(data.bV, np.stack([z[None, :] for z in P]), P) is not None


# --- independence of choices -------------------------------------------------

@given(seeds)
def test_frame_rotation_changes_bV_by_constant_unitaries(seed):
    T, rng = ccnc_instance(seed)
    parts = iso_pure_decompose(T)
    t1 = model_triple(parts, T)
    F0, Finf = random_unitary(t1.p, rng), random_unitary(t1.q, rng)
    t2 = model_triple(parts, T, F0, Finf)
    P = BallSampler(T.d, count=10).points()
    b1 = evaluate_many(charfun_partial_isometry(t1), P)
    b2 = evaluate_many(charfun_partial_isometry(t2), P)
    assert np.allclose(b2, F0.conj().T @ b1 @ Finf, atol=1e-10)


@given(seeds)
def test_bV_does_not_depend_on_the_extension(seed):
    T, _ = ccnc_instance(seed)
    parts = iso_pure_decompose(T)
    P = BallSampler(T.d, count=10).points()
    b_T_ext = charfun_partial_isometry(model_triple(parts, T))
    b_V_ext = charfun_partial_isometry(model_triple(parts, parts.V))
    assert np.allclose(evaluate_many(b_T_ext, P), evaluate_many(b_V_ext, P), atol=1e-9)


@given(seeds)
def test_unitary_conjugation_leaves_bT_unchanged_up_to_coincidence(seed):
    T, rng = ccnc_instance(seed)
    S = T.conjugate_by(random_unitary(T.n, rng))
    P = BallSampler(T.d, count=12).points()
    assert coincide(characteristic_function(T).bT, characteristic_function(S).bT, P) is not None


# --- model identities ---------------------------------------------------------

@settings(max_examples=15)
@given(seeds)
def test_verify_model_passes_on_ccnc_tuples(seed):
    T, _ = ccnc_instance(seed)
    report = verify_model(T)
    assert report.passed, report.as_dict()


@given(seeds)
def test_model_identities_directly(seed):
    T, rng = ccnc_instance(seed)
    data = characteristic_function(T)
    P = BallSampler(T.d, count=10).points()
    b0 = data.bT(np.zeros(T.d))
    assert np.allclose(b0, data.delta, atol=1e-10)
    for z in P:
        k = kernel_pullback(data, z)
        assert np.allclose(resolvent(T, z) @ data.kappa0, k, atol=1e-9)
        bz = data.bT(z)
        assert np.allclose(point_row(z, data.p) @ gleason_solution(data, z), bz - b0, atol=1e-9)
        e = rng.standard_normal((data.p, 1))
        assert np.allclose(gleason_X_action(data, z, e), T.column_adjoint @ k @ e, atol=1e-9)
        assert np.allclose(data.bV(z), colligation_transfer(data.triple, z), atol=1e-9)
    H = gleason_coordinates(data)
    assert np.allclose(H.conj().T @ H, np.eye(data.q) - data.delta.conj().T @ data.delta, atol=1e-10)
    assert colligation_defect(data.triple) < 1e-10
    assert kernel_factorization_residual(data.triple, P) < 1e-9
    assert kernel_gram(data.bT, P).min_eig > -1e-9


@given(seeds)
def test_theta_agrees_with_direct_formula_and_bT(seed):
    T, _ = ccnc_instance(seed)
    theta = NagyFoiasTheta(T)
    P = BallSampler(T.d, count=10).points()
    for z in P[:4]:
        full = oracles.theta(T.blocks, z)
        assert np.allclose(theta(z), theta.B1.conj().T @ full @ theta.B0, atol=1e-9)
    bT = characteristic_function(T).bT
    assert coincide_weakly(bT, theta, P) is not None


def test_error_paths(rng):
    V = RowContraction(np.array([[[0.6]], [[0.8]]]))
    with pytest.raises(NotCCNC):
        characteristic_function(V)
    assert verify_model(V).reason == "not_ccnc"
    parts = iso_pure_decompose(V)
    triple = model_triple(parts, V)
    with pytest.raises(DegenerateTriple):
        gamma_eval(triple, np.zeros(2))
    W = random_partial_isometry(3, 2, rng)
    while range_basis(W.row).dim == 0:
        W = random_partial_isometry(3, 2, rng)
    with pytest.raises(NotExtension):
        model_triple(iso_pure_decompose(W), RowContraction(np.zeros((2, 3, 3))))


def test_qe_membership_agrees_with_classification():
    P = BallSampler(2, count=60).points()
    for T, expected in [(non_qe_instance(), False), (shift_compression(1, 2), True),
                        (shift_compression(2, 2), True)]:
        assert is_qe(T) is expected
        data = characteristic_function(T)
        assert qe_membership_test(data, P) is expected
    assert qe_membership_margin(characteristic_function(non_qe_instance()), P) < 1e-9
