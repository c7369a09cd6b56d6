import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ctsumproduct.errors import (
    ColumnSumNonzero,
    EmptyObservableSet,
    FullObservableSet,
    NegativeOffDiagonal,
    NonFinite,
    NonIrreducible,
)
from ctsumproduct.markov import (
    eigendecompose,
    matrix_exponential,
    stationary_distribution,
    truncate,
    validate_generator,
)
from ctsumproduct.models import CFTR_RATES

from conftest import random_generator


def taylor_expm(M, t, order=12, squarings=6):
    # independent oracle: truncated Taylor series with scaling and squaring
    A = np.asarray(M, float) * t / 2 ** squarings
    E = np.eye(A.shape[0])
    term = np.eye(A.shape[0])
    for k in range(1, order + 1):
        term = term @ A / k
        E = E + term
    for _ in range(squarings):
        E = E @ E
    return E


def test_cftr_is_valid(cftr_model):
    assert cftr_model.n == 7
    assert cftr_model.observable_set == (3, 4)
    assert cftr_model.W[0, 0] + cftr_model.W[1, 0] == 0.0
    assert np.allclose(cftr_model.W.sum(axis=0), 0, atol=1e-12)


def test_two_state_symmetric():
    m = validate_generator([[-1, 1], [1, -1]], [0])
    np.testing.assert_allclose(m.pi, [0.5, 0.5], atol=1e-15)


def test_column_sum_violation():
    with pytest.raises(ColumnSumNonzero) as exc:
        validate_generator([[-1, 1], [2, -1]], [0])
    assert exc.value.column == 0
    assert exc.value.residual == pytest.approx(1.0)


@pytest.mark.parametrize("raw, obs, err", [
    ([[-1, -1], [1, 1]], [0], NegativeOffDiagonal),
    ([[-1, 1], [1, -1]], [], EmptyObservableSet),
    ([[-1, 1], [1, -1]], [0, 1], FullObservableSet),
    ([[0, 0], [0, 0]], [0], NonIrreducible),
    ([[-1, 0, 0], [1, 0, 0], [0, 0, 0]], [0], NonIrreducible),
    ([[np.nan, 1], [1, -1]], [0], NonFinite),
])
def test_rejects_invalid(raw, obs, err):
    with pytest.raises(err):
        validate_generator(raw, obs)


def test_pi_invariants(cftr_model):
    pi = cftr_model.pi
    assert np.all(pi >= 0)
    assert abs(pi.sum() - 1) <= 1e-12
    assert np.linalg.norm(cftr_model.W @ pi, np.inf) <= 1e-10 * np.linalg.norm(cftr_model.W, np.inf)


def test_symmetric_chain_stationary():
    W = [[-1, 1, 0], [1, -2, 1], [0, 1, -1]]
    m = validate_generator(W, [2])
    np.testing.assert_allclose(stationary_distribution(m), np.full(3, 1 / 3), atol=1e-14)


def test_cftr_stationary_against_power_iteration(cftr_model):
    P = taylor_expm(CFTR_RATES, 0.01)
    # 10**6 steps of the chain by repeated squaring (2**20 > 10**6 is fine for a
    # converged chain, but do exactly 10**6 via binary powering)
    Pn = np.linalg.matrix_power(P, 10 ** 6)
    v = Pn @ np.full(7, 1 / 7)
    assert np.abs(v - stationary_distribution(cftr_model)).max() <= 1e-8


def test_truncate_cftr_observed(cftr_model):
    b = truncate(cftr_model, 1)
    assert b.active_set == (3, 4)
    np.testing.assert_array_equal(b.U, [[-17.1, 0.0], [7.1, -3.0]])


def test_truncate_chain_hidden():
    a, b = 1.3, 0.7
    W = [[-a, a, 0], [a, -(a + b), 0.4], [0, b, -0.4]]
    U = truncate(validate_generator(W, [2]), 0).U
    np.testing.assert_allclose(U, [[-a, a], [a, -(a + b)]])


def test_truncate_loop_equal_rates():
    w = 1.7
    W = [[-1, 0, w], [1, -w, 0], [0, w, -w]]
    U = truncate(validate_generator(W, [0]), 0).U
    np.testing.assert_allclose(U, [[-w, 0], [w, -w]])


def test_truncated_column_sums_nonpositive(cftr_model):
    for v in (0, 1):
        U = truncate(cftr_model, v).U
        off = U - np.diag(np.diag(U))
        assert np.all(off >= 0)
        assert np.all(U.sum(axis=0) <= 1e-12)


def test_expm_zero_time():
    M = np.array([[1.0, 2.0], [3.0, -4.0]])
    np.testing.assert_array_equal(matrix_exponential(M, 0.0), np.eye(2))


def test_expm_nilpotent():
    np.testing.assert_allclose(matrix_exponential([[0, 1], [0, 0]], 2.0),
                               [[1, 2], [0, 1]], atol=1e-15)


def test_expm_against_taylor(cftr_model):
    U = truncate(cftr_model, 1).U
    E = matrix_exponential(U, 0.1)
    assert np.abs(E - taylor_expm(U, 0.1)).max() <= 1e-10


def test_expm_rejects_nonfinite():
    with pytest.raises(NonFinite):
        matrix_exponential([[np.inf, 0], [0, 0]], 1.0)
    with pytest.raises(NonFinite):
        matrix_exponential(np.eye(2), np.nan)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2 ** 32 - 1), n=st.integers(2, 8),
       t=st.sampled_from([0.01, 0.1, 1.0, 10.0]))
def test_expm_column_stochastic(seed, n, t):
    W = random_generator(np.random.default_rng(seed), n)
    P = matrix_exponential(W, t)
    assert np.abs(P.sum(axis=0) - 1).max() <= 1e-10
    assert P.min() >= -1e-12


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2 ** 32 - 1), n=st.integers(2, 8),
       s=st.floats(0.0, 2.0), t=st.floats(0.0, 2.0))
def test_expm_semigroup(seed, n, s, t):
    W = random_generator(np.random.default_rng(seed), n)
    lhs = matrix_exponential(W, s) @ matrix_exponential(W, t)
    assert np.abs(lhs - matrix_exponential(W, s + t)).max() <= 1e-9


def test_eigen_chain_block():
    a, b = 1.0, 2.0
    U = np.array([[-a, a], [a, -(a + b)]])
    sd = eigendecompose(U)
    roots = np.sort(np.roots([1, 2 * a + b, a * b]).real)
    np.testing.assert_allclose(np.sort(sd.eigenvalues), roots, atol=1e-14)
    np.testing.assert_allclose(np.sort(sd.eigenvalues), [-2 - np.sqrt(2), -2 + np.sqrt(2)],
                               atol=1e-14)
    assert sd.diagonalizable and sd.distinct_count == 2
    # symmetric block: orthogonal right eigenvectors
    v = sd.right_vectors
    assert abs(v[:, 0] @ v[:, 1]) <= 1e-10


def test_eigen_jordan_block():
    w = 1.5
    sd = eigendecompose([[-w, 0], [w, -w]])
    assert not sd.diagonalizable
    assert sd.distinct_count == 1
    np.testing.assert_allclose(sd.eigenvalues, [-w, -w], atol=1e-12)


def test_eigen_diagonal():
    sd = eigendecompose(np.diag([-1.0, -3.0]))
    assert sorted(sd.eigenvalues) == [-3.0, -1.0]
    np.testing.assert_allclose(np.abs(sd.right_vectors), np.eye(2)[:, [0, 1]], atol=0)


def test_eigen_repeated_but_diagonalizable():
    c, e = 0.8, 0.5
    U = c * np.ones((3, 3)) - (3 * c + e) * np.eye(3)
    sd = eigendecompose(U)
    assert sd.diagonalizable
    assert sd.distinct_count == 2


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2 ** 32 - 1), n=st.integers(3, 8))
def test_eigen_biorthogonal_and_reconstructs(seed, n):
    W = random_generator(np.random.default_rng(seed), n)
    m = validate_generator(W, [0])
    block = truncate(m, 0)
    sd = eigendecompose(block)
    if not sd.diagonalizable:
        return
    V, L = sd.right_vectors, sd.left_vectors
    assert np.abs(L.T @ V - np.eye(block.size)).max() <= 1e-9
    recon = V @ np.diag(sd.eigenvalues) @ np.linalg.inv(V)
    U = block.U
    assert np.abs(recon - U).max() <= 1e-9 * np.linalg.norm(U, np.inf)
