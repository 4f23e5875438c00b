import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from wstate_polaron.circuit import CircuitParams, model_at_lambda
from wstate_polaron.hamiltonian import KBlockOperator, build_real_space
from wstate_polaron.model import ModelParams
from wstate_polaron.solver import (
    ConvergenceError,
    LanczosConfig,
    dense_ground_state,
    krylov_expm,
    lanczos_extremal,
)


def test_one_by_one():
    res = lanczos_extremal(np.array([[2.5]]))
    assert res.eigenvalues.tolist() == [2.5]


def test_diagonal():
    res = lanczos_extremal(np.diag([3.0, 1.0, 2.0]))
    assert res.ground_energy == pytest.approx(1.0, abs=1e-14)
    assert abs(abs(res.ground_state[1]) - 1.0) < 1e-12


def test_degenerate_levels_have_multiplicity():
    res = lanczos_extremal(np.diag([1.0, 0.0, 0.0, 2.0, 0.0]), LanczosConfig(n_eigenpairs=4))
    assert np.allclose(res.eigenvalues, [0, 0, 0, 1], atol=1e-12)


def test_k0_block_against_dense():
    params = model_at_lambda(CircuitParams(), 0.3, 6, 3)
    op = KBlockOperator.build(params, 0)
    exact = np.linalg.eigvalsh(op.to_dense())
    assert lanczos_extremal(op).ground_energy == pytest.approx(exact[0], abs=1e-10)


@pytest.mark.parametrize("k", range(6))
def test_three_lowest_against_dense(k):
    op = KBlockOperator.build(ModelParams(1.0, 1.0, 1.2, 6, 3), k)
    exact = np.linalg.eigvalsh(op.to_dense())[:3]
    res = lanczos_extremal(op, LanczosConfig(n_eigenpairs=3))
    assert np.max(np.abs(res.eigenvalues - exact)) < 1e-10
    assert np.all(res.residuals <= 1e-10 * np.maximum(1, np.abs(res.eigenvalues)))
    assert np.allclose(np.linalg.norm(res.eigenvectors, axis=0), 1.0, atol=1e-12)


@settings(max_examples=20, deadline=None)
@given(n=st.integers(2, 40), seed=st.integers(0, 2**31))
def test_random_hermitian(n, seed):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    h = a + a.conj().T
    pairs = min(3, n)
    res = lanczos_extremal(h, LanczosConfig(n_eigenpairs=pairs))
    assert np.allclose(res.eigenvalues, np.linalg.eigvalsh(h)[:pairs], atol=1e-9)


def test_ritz_values_non_increasing():
    op = KBlockOperator.build(ModelParams(1.0, 1.0, 1.0, 8, 4), 1)
    res = lanczos_extremal(op)
    history = np.array(res.ritz_history[0])
    assert np.all(np.diff(history) <= 1e-13)


def test_deterministic():
    op = KBlockOperator.build(ModelParams(1.0, 1.0, 1.0, 8, 3), 2)
    a = lanczos_extremal(op, LanczosConfig(seed=7, n_eigenpairs=2))
    b = lanczos_extremal(op, LanczosConfig(seed=7, n_eigenpairs=2))
    assert np.array_equal(a.eigenvalues, b.eigenvalues)


def test_without_reorthogonalization_still_finds_ground():
    op = KBlockOperator.build(ModelParams(1.0, 1.0, 0.6, 6, 3), 0)
    exact = np.linalg.eigvalsh(op.to_dense())[0]
    res = lanczos_extremal(op, LanczosConfig(reorthogonalization="none"))
    assert res.ground_energy == pytest.approx(exact, abs=1e-9)


def test_reports_non_convergence():
    op = KBlockOperator.build(ModelParams(1.0, 1.0, 1.0, 8, 4), 1)
    with pytest.raises(ConvergenceError) as err:
        lanczos_extremal(op, LanczosConfig(max_iterations=3))
    assert err.value.result is not None
    assert len(err.value.result.residuals) == 1


@pytest.mark.parametrize(
    "kwargs",
    [dict(tolerance=0.0), dict(n_eigenpairs=0), dict(max_iterations=1, n_eigenpairs=2), dict(reorthogonalization="partial")],
)
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        LanczosConfig(**kwargs)


def test_too_many_pairs():
    with pytest.raises(ValueError):
        lanczos_extremal(np.eye(2), LanczosConfig(n_eigenpairs=3))


def test_dense_examples():
    assert np.allclose(dense_ground_state(np.array([[0.0, 1.0], [1.0, 0.0]])).eigenvalues, [-1, 1])
    ring = build_real_space(ModelParams(1.0, 1.0, 0.0, 4, 0)).matrix
    assert np.allclose(dense_ground_state(ring).eigenvalues, [-2, 0, 0, 2], atol=1e-14)


def test_dense_two_site_matches_blocks():
    params = ModelParams(1.0, 1.0, 1.0, 2, 1)
    full = dense_ground_state(build_real_space(params).matrix).eigenvalues
    blocks = np.concatenate([dense_ground_state(KBlockOperator.build(params, k).to_dense()).eigenvalues for k in range(2)])
    assert np.allclose(np.sort(blocks), full, atol=1e-12)


def test_dense_bound():
    with pytest.raises(ValueError):
        dense_ground_state(np.eye(10), bound=5)


@pytest.mark.parametrize("tau", [-0.3j, -2.0j, 0.5])
def test_krylov_expm_against_scipy(tau):
    rng = np.random.default_rng(1)
    a = rng.standard_normal((50, 50))
    h = (a + a.T) / 4
    v = rng.standard_normal(50) + 0j
    got = krylov_expm(lambda x: h @ x, v, tau)
    assert np.allclose(got, scipy.linalg.expm(tau * h) @ v, atol=1e-10)
