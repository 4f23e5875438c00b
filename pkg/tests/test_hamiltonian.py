import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wstate_polaron.hamiltonian import (
    KBlockOperator,
    apply_k_block,
    bloch_state,
    build_real_space,
    heb_residual_on_bare,
)
from wstate_polaron.hilbert import DimensionError, translation_operator
from wstate_polaron.model import ModelParams


def test_two_site_ring_without_bosons():
    op = build_real_space(ModelParams(1.0, 1.0, 0.0, 2, 0))
    # both bonds of a two-site ring connect the same pair of sites
    assert np.allclose(op.matrix.toarray(), [[0, -2], [-2, 0]])


def test_three_site_ring_spectrum():
    op = build_real_space(ModelParams(1.0, 1.0, 0.0, 3, 0))
    assert np.allclose(np.linalg.eigvalsh(op.matrix.toarray()), [-2, 1, 1])


def test_free_ring_with_bosons_is_shifted_band():
    params = ModelParams(1.0, 0.5, 0.0, 4, 1)
    spectrum = np.linalg.eigvalsh(build_real_space(params).matrix.toarray())
    band = np.array([-2.0, 0.0, 0.0, 2.0])
    expected = np.sort(np.concatenate([band] + [band + 0.5] * 4))
    assert np.allclose(spectrum, expected, atol=1e-13)


@settings(max_examples=15, deadline=None)
@given(g=st.floats(0, 2), w=st.floats(0.1, 3), k=st.integers(0, 3), seed=st.integers(0, 2**31))
def test_k_block_hermitian(g, w, k, seed):
    op = KBlockOperator.build(ModelParams(1.0, w, g, 4, 2), k)
    rng = np.random.default_rng(seed)
    u = rng.standard_normal(op.shape[0]) + 1j * rng.standard_normal(op.shape[0])
    v = rng.standard_normal(op.shape[0]) + 1j * rng.standard_normal(op.shape[0])
    h_norm = np.abs(op.to_dense()).sum(axis=1).max()
    lhs = np.vdot(u, op.matvec(v))
    rhs = np.vdot(op.matvec(u), v)
    assert abs(lhs - rhs) < 1e-12 * np.linalg.norm(u) * np.linalg.norm(v) * h_norm


def test_real_space_symmetric():
    m = build_real_space(ModelParams(1.0, 2.0, 0.7, 4, 3)).matrix
    assert abs(m - m.T).max() == 0


def test_translation_commutes():
    op = build_real_space(ModelParams(1.0, 2.0, 0.5, 4, 2))
    t = translation_operator(op.basis)
    h = op.matrix
    assert abs(h @ t - t @ h).max() < 1e-12 * abs(h).max()


@pytest.mark.parametrize("n, m", [(2, 1), (3, 2), (4, 2), (5, 2)])
def test_block_union_matches_real_space(n, m):
    params = ModelParams(1.0, 1.3, 0.8, n, m)
    full = np.linalg.eigvalsh(build_real_space(params).matrix.toarray())
    blocks = [np.linalg.eigvalsh(KBlockOperator.build(params, k).to_dense()) for k in range(n)]
    assert np.allclose(np.sort(np.concatenate(blocks)), full, atol=1e-10, rtol=0)


def test_k_block_is_the_projection_of_real_space():
    params = ModelParams(1.0, 1.3, 0.8, 4, 2)
    h = build_real_space(params).matrix
    for k in range(4):
        op = KBlockOperator.build(params, k)
        basis = op.basis
        cols = np.column_stack([basis.to_real_space(e) for e in np.eye(basis.dimension)])
        projected = cols.conj().T @ (h @ cols)
        assert np.allclose(projected, op.to_dense(), atol=1e-13)


def test_matvec_equals_materialized():
    op = KBlockOperator.build(ModelParams(1.0, 1.0, 1.1, 6, 3), 2)
    v = np.random.default_rng(3).standard_normal(op.shape[0]).astype(complex)
    assert np.allclose(apply_k_block(op, v), op.to_dense() @ v, atol=1e-13)
    assert np.allclose(op.as_linear_operator() @ v, op.sparse() @ v)


def test_apply_rejects_wrong_length():
    op = KBlockOperator.build(ModelParams(1.0, 1.0, 1.0, 4, 2), 0)
    with pytest.raises(ValueError):
        apply_k_block(op, np.ones(op.shape[0] + 1))


def test_materialization_threshold():
    op = KBlockOperator.build(ModelParams(1.0, 1.0, 1.0, 8, 4), 0)
    with pytest.raises(DimensionError):
        op.to_dense(threshold=100)


def test_basis_param_mismatch():
    op = KBlockOperator.build(ModelParams(1.0, 1.0, 1.0, 4, 2), 0)
    with pytest.raises(ValueError):
        KBlockOperator(op.basis, ModelParams(1.0, 1.0, 1.0, 4, 3))


def test_bare_state_residual():
    assert heb_residual_on_bare(ModelParams(1.0, 1.0, 0.0, 8, 4)) == 0.0
    params = ModelParams(1.0, 1.0, 2.0, 8, 4)
    assert heb_residual_on_bare(params) < 1e-12
    assert heb_residual_on_bare(params, k=1) > 1.0


def test_bare_k0_state_is_eigenvector_of_block():
    params = ModelParams(1.0, 1.0, 1.5, 6, 3)
    op = KBlockOperator.build(params, 0)
    e = np.zeros(op.shape[0], dtype=complex)
    e[op.basis.bare_index()] = 1.0
    assert np.allclose(op.matvec(e), -2.0 * e, atol=1e-14)


def test_bloch_state_normalised_and_translated():
    op = build_real_space(ModelParams(1.0, 1.0, 0.0, 5, 1))
    t = translation_operator(op.basis)
    for k in range(5):
        psi = bloch_state(op.basis, k)
        assert np.linalg.norm(psi) == pytest.approx(1.0)
        # T|n> = |n+1>, so T |psi_k> = exp(+ik) |psi_k>
        assert np.allclose(t @ psi, np.exp(2j * math.pi * k / 5) * psi)
