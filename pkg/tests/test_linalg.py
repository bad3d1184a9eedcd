################################################################################
# tests/test_linalg.py
#
# This file is part of the skinny_factor software suite.
#
# It contains tests of the dense driver-side kernels.
#
# Copyright 2026 the skinny_factor authors
#
# This program is free software: you can redistribute it and/or modify
# it under the terms of the GNU General Public License as published by
# the Free Software Foundation, either version 3 of the License, or
# (at your option) any later version.
#
# This program is distributed in the hope that it will be useful,
# but WITHOUT ANY WARRANTY; without even the implied warranty of
# MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
# GNU General Public License for more details.
#
# You should have received a copy of the GNU General Public License
# along with this program.  If not, see <http://www.gnu.org/licenses/>.
################################################################################

import logging

import numpy as np
import numpy.testing as npt
import pytest

from skinny.errors import ConvergenceError, DimensionError, NumericError
from skinny.linalg import (as_dense,
                           least_squares,
                           nnls,
                           r_factor,
                           symmetric_eigs,
                           thin_qr,
                           thin_svd)


### thin_qr / r_factor

def test_thin_qr_identity():
    Q, R = thin_qr(np.eye(3))
    npt.assert_allclose(Q, np.eye(3), atol=1e-15)
    npt.assert_allclose(R, np.eye(3), atol=1e-15)


def test_thin_qr_sign_convention():
    Q, R = thin_qr([[-2.], [0.]])
    npt.assert_allclose(Q, [[-1.], [0.]])
    npt.assert_allclose(R, [[2.]])


def test_thin_qr_random(rng):
    M = rng.standard_normal((40, 5))
    Q, R = thin_qr(M)
    assert Q.shape == (40, 5) and R.shape == (5, 5)
    assert np.linalg.norm(Q @ R - M) <= 1e-10 * np.linalg.norm(M)
    npt.assert_allclose(Q.T @ Q, np.eye(5), atol=1e-12)
    npt.assert_array_equal(np.tril(R, -1), 0.)
    assert np.all(np.diag(R) >= 0)


def test_thin_qr_wide_is_error():
    with pytest.raises(DimensionError):
        thin_qr(np.ones((2, 3)))


def test_r_factor_matches_thin_qr(rng):
    M = rng.standard_normal((30, 4))
    npt.assert_array_equal(r_factor(M), thin_qr(M)[1])


def test_r_factor_short_block_is_padded(rng):
    M = rng.standard_normal((2, 4))
    R = r_factor(M)
    assert R.shape == (4, 4)
    npt.assert_array_equal(R[2:], 0.)
    npt.assert_allclose(R.T @ R, M.T @ M, atol=1e-12)


def test_thin_qr_is_repeatable(rng):
    M = rng.standard_normal((60, 6))
    npt.assert_array_equal(thin_qr(M)[1], thin_qr(M.copy())[1])


def test_as_dense_empty_vector():
    assert as_dense([]).shape == (0, 0)
    assert as_dense([1., 2.]).shape == (2, 1)


def test_as_dense_rejects_nan():
    with pytest.raises(NumericError):
        as_dense([[1., np.nan]])


### thin_svd

def test_thin_svd_diagonal():
    f = thin_svd([[3., 0.], [0., 4.]])
    npt.assert_allclose(f.sigma, [4., 3.])


def test_thin_svd_rank_one():
    f = thin_svd(np.ones((2, 2)))
    npt.assert_allclose(f.sigma, [2., 0.], atol=1e-15)


def test_thin_svd_row_order_does_not_matter(rng):
    M = rng.standard_normal((40, 5))
    shuffled = M[rng.permutation(40)]
    npt.assert_allclose(thin_svd(shuffled).sigma, thin_svd(M).sigma, rtol=0, atol=1e-10)


def test_thin_svd_reconstructs(rng):
    M = rng.standard_normal((25, 6))
    f = thin_svd(M)
    assert np.linalg.norm(f.U * f.sigma @ f.V.T - M) <= 1e-10 * np.linalg.norm(M)
    assert np.all(np.diff(f.sigma) <= 0)


### symmetric_eigs

def test_eigs_diagonal():
    S = np.diag([5., 3., 1.])
    res = symmetric_eigs(lambda v: S @ v, 3, 1, tol=1e-10)
    npt.assert_allclose(res.eigenvalues, [5.], rtol=1e-10)
    npt.assert_allclose(np.abs(res.eigenvectors[:, 0]), [1., 0., 0.], atol=1e-8)


def test_eigs_random_psd(rng):
    X = rng.standard_normal((80, 30))
    S = X.T @ X
    res = symmetric_eigs(lambda v: S @ v, 30, 4, tol=1e-10)
    exact = np.linalg.eigvalsh(S)[::-1][:4]
    npt.assert_allclose(res.eigenvalues, exact, rtol=1e-9)
    V = res.eigenvectors
    npt.assert_allclose(V.T @ V, np.eye(4), atol=1e-10)
    for i in range(4):
        r = S @ V[:, i] - res.eigenvalues[i] * V[:, i]
        assert np.linalg.norm(r) <= 1e-10 * res.eigenvalues[0] * 10


def test_eigs_identity():
    res = symmetric_eigs(lambda v: v.copy(), 6, 3)
    npt.assert_allclose(res.eigenvalues, [1., 1., 1.], rtol=1e-12)
    V = res.eigenvectors
    npt.assert_allclose(V.T @ V, np.eye(3), atol=1e-12)


def test_eigs_top_of_random_psd_matrix(rng):
    X = rng.standard_normal((50, 50))
    S = X @ X.T
    res = symmetric_eigs(lambda v: S @ v, 50, 5, tol=1e-10)
    npt.assert_allclose(res.eigenvalues, np.linalg.eigvalsh(S)[::-1][:5], rtol=1e-8)


def test_eigs_with_restarts(rng):
    # 200 dimensions and a small basis force several thick restarts
    d = np.linspace(1., 2., 200)
    d[:3] = [10., 9., 8.]
    res = symmetric_eigs(lambda v: d * v, 200, 3, tol=1e-9, ncv=12, max_iters=500)
    npt.assert_allclose(res.eigenvalues, [10., 9., 8.], rtol=1e-9)


def test_eigs_zero_operator():
    res = symmetric_eigs(lambda v: 0. * v, 5, 2)
    npt.assert_array_equal(res.eigenvalues, [0., 0.])


def test_eigs_not_converged():
    d = np.linspace(1., 50., 50)
    with pytest.raises(ConvergenceError) as excinfo:
        symmetric_eigs(lambda v: d * v, 50, 3, ncv=6, max_iters=6)
    assert excinfo.value.residuals is not None
    assert excinfo.value.iterations == 6


def test_eigs_fixed_iterations():
    d = np.linspace(1., 50., 50)
    restarts = []
    res = symmetric_eigs(lambda v: d * v, 50, 3, ncv=8, max_iters=20,
                         fixed_iterations=True,
                         callback=lambda r, e, res: restarts.append(r))
    assert res.iterations == 20
    assert restarts[0] == 0 and len(restarts) >= 2


def test_eigs_k_out_of_range():
    with pytest.raises(DimensionError):
        symmetric_eigs(lambda v: v, 3, 4)


### nnls

def test_nnls_identity():
    npt.assert_array_equal(nnls(np.eye(2), [1., -1.]), [1., 0.])


def test_nnls_zero_matrix():
    npt.assert_array_equal(nnls(np.zeros((3, 2)), [1., 2., 3.]), [0., 0.])


def test_nnls_single_column():
    npt.assert_allclose(nnls([[1.], [1.]], [1., 3.]), [2.])


def test_nnls_never_worse_than_zero(rng):
    for _ in range(20):
        M = rng.standard_normal((15, 6))
        b = rng.standard_normal(15)
        x = nnls(M, b)
        assert np.linalg.norm(M @ x - b) <= np.linalg.norm(b) + 1e-12


def test_nnls_iteration_cap_warns(caplog):
    with caplog.at_level(logging.WARNING, logger='sf.linalg.nnls'):
        x = nnls(np.eye(2), [1., 1.], max_iter=1)
    assert np.all(x >= 0)
    assert any('stopped after 1 outer iterations' in r.getMessage()
               for r in caplog.records)


def test_nnls_kkt(rng):

    M = rng.standard_normal((20, 8))
    b = rng.standard_normal(20)
    x = nnls(M, b)
    assert np.all(x >= 0)
    grad = M.T @ (M @ x - b)
    active = x > 0
    npt.assert_allclose(grad[active], 0., atol=1e-8)
    assert np.all(grad[~active] >= -1e-8)


### least_squares

def test_least_squares_exact():
    X = least_squares(np.eye(2), [[1., 2.], [3., 4.]])
    npt.assert_allclose(X, [[1., 2.], [3., 4.]])


def test_least_squares_minimum_norm():
    X = least_squares([[1., 1.], [1., 1.]], [[2.], [2.]])
    npt.assert_allclose(X, [[1.], [1.]])


def test_least_squares_normal_equations(rng):
    C = rng.standard_normal((50, 4))
    A = rng.standard_normal((50, 7))
    X = least_squares(C, A)
    resid = np.linalg.norm(C.T @ (A - C @ X))
    assert resid <= 1e-8 * np.linalg.norm(C) * np.linalg.norm(A)


def test_least_squares_row_mismatch():
    with pytest.raises(DimensionError):
        least_squares(np.ones((3, 1)), np.ones((4, 1)))


@pytest.mark.parametrize('cols', [4, 7])
def test_least_squares_matches_pseudoinverse(rng, cols):
    C = rng.standard_normal((30, cols))
    A = rng.standard_normal((30, 5))
    npt.assert_allclose(least_squares(C, A), np.linalg.pinv(C) @ A, atol=1e-10)
