import numpy as np
import pytest
from hypothesis import given, strategies as st

from rowcon.errors import ShapeMismatch
from rowcon.numlin import spectral_norm
from rowcon.rowop import (
    RowContraction,
    apply_point_adjoint,
    defect,
    defect_adj,
    defect_adj_range,
    defect_range,
    is_commuting,
    is_partial_isometry,
    iso_pure_decompose,
    pairing,
    point_adjoint,
    point_row,
    resolvent,
    resolvents,
    restricted_range_space,
    row_norm,
    sym_monomial,
    word_apply,
)
from rowcon.ensembles import random_row_contraction, random_partial_isometry, shift_compression

from oracles import resolvent_series, sym_monomial_by_words

seeds = st.integers(0, 2**32 - 1)


def draw(seed, norm=0.9):
    rng = np.random.default_rng(seed)
    n, d = int(rng.integers(1, 5)), int(rng.integers(1, 4))
    return random_row_contraction(n, d, rng, norm=norm), rng


def test_constructor_validates_input():
    with pytest.raises(ShapeMismatch):
        RowContraction(np.zeros((2, 2, 3)))
    with pytest.raises(ValueError):
        RowContraction([[2.0]])
    with pytest.raises(ShapeMismatch):
        RowContraction.from_row(np.zeros((2, 5)), 2)
    T = RowContraction([[0.5]])
    assert (T.n, T.d) == (1, 1)
    assert not T.blocks.flags.writeable


def test_row_layout_and_point_maps():
    T = RowContraction(np.stack([np.eye(2) * 0.3, np.eye(2) * 0.4j]))
    assert T.row.shape == (2, 4)
    assert np.allclose(T.column_adjoint, T.row.conj().T)
    z = np.array([0.1 + 0.2j, -0.3])
    assert point_adjoint(z, 2).shape == (4, 2)
    assert np.allclose(point_row(z, 2), point_adjoint(z, 2).conj().T)
    assert np.allclose(apply_point_adjoint(z, np.eye(2)), point_adjoint(z, 2))
    assert pairing(z, z) == pytest.approx(np.vdot(z, z))
    assert row_norm(T) == pytest.approx(0.5)


@given(seeds)
def test_defect_identities(seed):
    T, _ = draw(seed)
    R = T.row
    DT, DTs = defect(T), defect_adj(T)
    assert np.allclose(DT @ DT, np.eye(R.shape[1]) - R.conj().T @ R, atol=1e-10)
    assert np.allclose(DTs @ DTs, np.eye(R.shape[0]) - R @ R.conj().T, atol=1e-10)
    # intertwining T D_T = D_{T^*} T
    assert np.allclose(R @ DT, DTs @ R, atol=1e-8)
    assert defect_range(T).dim == np.linalg.matrix_rank(DT)
    assert defect_adj_range(T).dim == np.linalg.matrix_rank(DTs)


@given(seeds)
def test_resolvent_matches_power_series(seed):
    T, rng = draw(seed, norm=0.8)
    z = rng.standard_normal(T.d) + 1j * rng.standard_normal(T.d)
    z *= 0.7 / np.linalg.norm(z)
    assert np.allclose(resolvent(T, z), resolvent_series(T.blocks, z), atol=1e-10)
    P = np.vstack([z, 0.5 * z])
    assert np.allclose(resolvents(T, P)[1], resolvent(T, 0.5 * z))


def test_word_and_symmetrized_monomials(rng):
    T = random_row_contraction(3, 3, rng)
    assert np.allclose(word_apply(T, [1, 3]), T[0] @ T[2])
    with pytest.raises(ValueError):
        word_apply(T, [4])
    cache = {}
    for nvec in [(0, 0, 0), (1, 0, 2), (2, 1, 1), (0, 3, 0)]:
        assert np.allclose(sym_monomial(T, nvec, cache), sym_monomial_by_words(T.blocks, nvec))


@given(seeds)
def test_iso_pure_decomposition(seed):
    T, rng = draw(seed)
    V0 = random_partial_isometry(T.n, T.d, rng)
    # mix an isometric direction into a random contraction
    T = RowContraction.from_row(0.5 * (V0.row + T.row), T.d) if rng.random() < 0.5 else V0
    parts = iso_pure_decompose(T)
    assert is_partial_isometry(parts.V)
    assert np.allclose(parts.V.row - parts.C.row, T.row)
    P = parts.initial_space.projector()
    assert spectral_norm(parts.C.row @ P) < 1e-8
    assert parts.final_space.dim == parts.initial_space.dim


def test_commuting_test():
    assert is_commuting(shift_compression(2, 2))
    A = np.array([[0, 1], [0, 0]]) * 0.5
    assert not is_commuting(RowContraction(np.stack([A, A.T])))


def test_restricted_range_space_at_zero_is_range():
    V = shift_compression(1, 2)
    S = restricted_range_space(V, np.zeros(2))
    assert S.dim == np.linalg.matrix_rank(V.row)
