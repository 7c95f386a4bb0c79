import numpy as np
import pytest
from hypothesis import given, strategies as st

from rowcon.errors import AlphaNotStrict, ShapeMismatch
from rowcon.frostman import (
    classify_contraction,
    crofoot_kernel_residual,
    crofoot_multiplier,
    defects,
    frostman_identity_residual,
    frostman_inverse_identity_residual,
    frostman_shift,
    phi,
    phi_inv,
    square_extension,
    zero_shift,
)
from rowcon.sampling import random_strict_contraction
from rowcon.schur import FunctionSchur, Realization

import oracles

seeds = st.integers(0, 2**32 - 1)

ALPHA = np.array([[0.3, 0.1j], [0.2, -0.25]])
BETA = np.array([[0.1, 0.4], [-0.3j, 0.2]])
# values of the scipy.linalg.sqrtm oracle, frozen
PHI_FROZEN = np.array([
    [-0.1931002770638056 + 0.03196414363198609j, 0.360031218006125 - 0.10794198625638055j],
    [-0.21074783217973006 - 0.261868280723095j, 0.4025589572619271 - 0.05939713045552495j],
])
PHI_INV_FROZEN = np.array([
    [0.40062926683043754 - 0.00170296137832717j, 0.3636209343609117 + 0.1175250840715569j],
    [0.2196924315191364 - 0.2637927608246958j, -0.07986416369958158 + 0.04074092435212239j],
])


def pair(seed):
    rng = np.random.default_rng(seed)
    p, q = int(rng.integers(1, 4)), int(rng.integers(1, 4))
    return [random_strict_contraction(p, q, rng, 0.9) for _ in range(3)]


def test_scalar_values():
    assert phi(0.5, 0.25)[0, 0] == pytest.approx(-2 / 7)
    assert phi_inv(0.5, -2 / 7)[0, 0] == pytest.approx(0.25)
    assert phi(0.3j, 0.3j)[0, 0] == pytest.approx(0)
    assert phi_inv(0.3j, 0.0)[0, 0] == pytest.approx(0.3j)


def test_frozen_matrix_values():
    assert np.allclose(phi(ALPHA, BETA), PHI_FROZEN, atol=1e-14)
    assert np.allclose(phi_inv(ALPHA, BETA), PHI_INV_FROZEN, atol=1e-14)
    assert np.allclose(oracles.phi(ALPHA, BETA), PHI_FROZEN, atol=1e-12)
    assert np.allclose(oracles.phi_inv(ALPHA, BETA), PHI_INV_FROZEN, atol=1e-12)


@given(seeds)
def test_matches_sqrtm_oracle(seed):
    a, b, _ = pair(seed)
    assert np.allclose(phi(a, b), oracles.phi(a, b), atol=1e-10)
    assert np.allclose(phi_inv(a, b), oracles.phi_inv(a, b), atol=1e-10)


@given(seeds)
def test_round_trip_and_identities(seed):
    a, b, c = pair(seed)
    assert np.allclose(phi_inv(a, phi(a, b)), b, atol=1e-10)
    assert np.allclose(phi(a, phi_inv(a, b)), b, atol=1e-10)
    assert frostman_identity_residual(a, b, c) < 1e-10
    assert frostman_inverse_identity_residual(a, b, c) < 1e-10


@given(seeds)
def test_image_is_contractive(seed):
    a, b, _ = pair(seed)
    assert np.linalg.norm(phi(a, b), 2) < 1
    assert np.linalg.norm(phi_inv(a, b), 2) < 1


def test_contraction_classes():
    assert classify_contraction([[0.5]]).kind == "strict"
    assert classify_contraction([[1.0]]).kind == "boundary"
    assert classify_contraction([[1.5]]).kind == "not_contraction"
    with pytest.raises(AlphaNotStrict):
        phi([[1.0]], [[0.0]])
    with pytest.raises(ShapeMismatch):
        phi(np.zeros((1, 2)), np.zeros((2, 1)))
    Da, Das = defects(np.array([[0.6, 0.0]]))
    assert np.allclose(Das, [[0.8]])
    assert np.allclose(Da, np.diag([0.8, 1.0]))


def scalar_function(c):
    return FunctionSchur(lambda z: np.array([[c + 0.5 * z[0]]]), 1, 1, 1, "affine")


def test_shifts_have_the_requested_value_at_origin():
    b = scalar_function(0.3)
    assert zero_shift(b)(0.0)[0, 0] == pytest.approx(0)
    assert frostman_shift(b, 0.2j)(0.0)[0, 0] == pytest.approx(0.2j)
    z = 0.4
    expected = oracles.phi_inv(np.array([[0.2j]]), oracles.phi(np.array([[0.3]]), np.array([[0.3 + 0.5 * z]])))
    assert np.allclose(frostman_shift(b, 0.2j)(z), expected)


def test_crofoot_multiplier_transports_kernels(rng):
    b = Realization(0.5 * rng.standard_normal((2, 2, 2)) / 3, rng.standard_normal((4, 2)) / 4,
                    rng.standard_normal((2, 2)) / 4, 0.1 * np.eye(2))
    alpha = random_strict_contraction(2, 2, rng, 0.8)
    z, w = np.array([0.2, 0.1j]), np.array([-0.3, 0.4])
    assert crofoot_multiplier(b, alpha, z).shape == (2, 2)
    assert crofoot_kernel_residual(b, alpha, z, w) < 1e-10


def test_square_extension_pads_with_zeros():
    b = FunctionSchur(lambda z: np.array([[z[0], 0.5 * z[1]]]), 1, 2, 2)
    s = square_extension(b)
    assert (s.p, s.q) == (2, 2)
    v = s(np.array([0.1, 0.2]))
    assert np.allclose(v, [[0.1, 0.1], [0, 0]])
    assert square_extension(s) is s
