import numpy as np
import pytest

from rowcon.sampling import (
    BallSampler,
    as_ball_point,
    random_isometry,
    random_matrix_ball_point,
    random_strict_contraction,
    random_unitary,
)


def test_sampler_is_deterministic_and_inside_ball():
    P1 = BallSampler(3, count=25, seed=4).points()
    P2 = BallSampler(3, count=25, seed=4).points()
    assert np.array_equal(P1, P2)
    assert P1.shape == (25, 3)
    assert np.all(np.linalg.norm(P1, axis=1) <= 0.9 + 1e-12)
    assert np.allclose(P1[0], 0)


def test_sampler_ring_points_sit_on_ring():
    s = BallSampler(2, count=41, ring_radius=0.7)
    radii = np.linalg.norm(s.points(), axis=1)
    assert np.sum(np.isclose(radii, 0.7)) == 10


def test_sampler_rejects_bad_parameters():
    with pytest.raises(ValueError):
        BallSampler(2, ring_radius=1.0)
    with pytest.raises(ValueError):
        BallSampler(0)
    assert BallSampler(2, count=5).with_count(9).points().shape == (9, 2)


def test_as_ball_point_checks_norm_and_dimension():
    assert as_ball_point(0.5, 1).shape == (1,)
    with pytest.raises(ValueError):
        as_ball_point([0.8, 0.8])
    with pytest.raises(ValueError):
        as_ball_point([0.1, 0.1], 3)


def test_random_matrices_have_the_promised_structure(rng):
    U = random_unitary(4, rng)
    assert np.allclose(U.conj().T @ U, np.eye(4))
    assert abs(abs(random_unitary(1, rng)[0, 0]) - 1) < 1e-12
    Y = random_isometry(5, 2, rng)
    assert np.allclose(Y.conj().T @ Y, np.eye(2))
    A = random_strict_contraction(3, 4, rng)
    assert np.linalg.norm(A, 2) < 0.95
    Z = random_matrix_ball_point(2, 3, rng)
    assert Z.shape == (2, 3, 3)
    assert np.linalg.norm(np.hstack(list(Z)), 2) < 0.9 + 1e-12
