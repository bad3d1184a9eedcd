################################################################################
# tests/test_cx.py
#
# This file is part of the skinny_factor software suite.
#
# It contains tests of the randomized SVD, leverage-score sampling and CX.
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

import numpy as np
import numpy.testing as npt
import pytest

from skinny.errors import DimensionError, NumericError
from skinny.factor import (cx,
                           derive_seeds,
                           leverage_scores,
                           randomized_svd,
                           sample_columns)


def power_law_matrix(rng, rows, cols, decay=1.):
    U, _ = np.linalg.qr(rng.standard_normal((rows, cols)))
    V, _ = np.linalg.qr(rng.standard_normal((cols, cols)))
    s = np.arange(1, cols + 1, dtype=np.float64) ** -decay
    return (U * s) @ V.T


### randomized_svd

def test_rsvd_exact_rank(parallel_ctx, rng):
    M = rng.standard_normal((80, 4)) @ rng.standard_normal((4, 12))
    f = randomized_svd(parallel_ctx.partition(M, 4), 4, slack=2, q=1, seed=3)
    s = np.linalg.svd(M, compute_uv=False)
    npt.assert_allclose(f.sigma, s[:4], rtol=1e-8)


def test_rsvd_stacked_identity(ctx):
    A = ctx.partition(np.vstack((np.eye(2), np.zeros((2, 2)))), 2)
    f = randomized_svd(A, 2, slack=0, q=1, seed=0)
    npt.assert_allclose(f.sigma, [1., 1.], rtol=1e-12)


def test_rsvd_is_deterministic(make_context, rng):
    M = rng.standard_normal((50, 10))
    a = randomized_svd(make_context().partition(M, 3), 3, seed=42)
    b = randomized_svd(make_context().partition(M, 3), 3, seed=42)
    npt.assert_array_equal(a.U, b.U)
    npt.assert_array_equal(a.sigma, b.sigma)
    npt.assert_array_equal(a.V, b.V)


def test_rsvd_passes_over_data(ctx, rng):
    A = ctx.partition(rng.standard_normal((60, 10)), 3)
    randomized_svd(A, 3, slack=5, q=2, seed=1)
    assert ctx.passes(A) == 3


def test_rsvd_argument_checks(ctx):
    A = ctx.partition(np.ones((10, 4)), 2)
    with pytest.raises(DimensionError):
        randomized_svd(A, 3, slack=2)
    with pytest.raises(DimensionError):
        randomized_svd(A, 2, slack=0, q=0)


### leverage scores and sampling

def test_leverage_unit_vectors():
    V = np.eye(5)[:, :2]
    npt.assert_array_equal(leverage_scores(V), [1., 1., 0., 0., 0.])


def test_leverage_sum_is_rank(rng):
    V, _ = np.linalg.qr(rng.standard_normal((30, 4)))
    assert abs(leverage_scores(V).sum() - 4.) <= 1e-12


def test_leverage_matches_row_sums(rng):
    _, _, Vt = np.linalg.svd(rng.standard_normal((50, 6)), full_matrices=False)
    V = Vt[:3].T
    expected = [sum(V[i, j] ** 2 for j in range(3)) for i in range(6)]
    npt.assert_allclose(leverage_scores(V), expected, rtol=1e-14)


def test_sample_point_mass():
    p = np.zeros(6)
    p[4] = 1.
    npt.assert_array_equal(sample_columns(p, 20, seed=9), [4] * 20)


def test_sample_uniform_frequencies():
    draws = sample_columns(np.full(10, 0.1), 10000, seed=123)
    freq = np.bincount(draws, minlength=10) / 10000
    assert np.all(np.abs(freq - 0.1) <= 3 * np.sqrt(0.1 * 0.9 / 10000))


def test_sample_is_deterministic():
    p = np.array([0.2, 0.5, 0.3])
    npt.assert_array_equal(sample_columns(p, 50, seed=5), sample_columns(p, 50, seed=5))


def test_sample_zero_distribution():
    with pytest.raises(NumericError):
        sample_columns(np.zeros(4), 2, seed=0)


def test_derive_seeds_distinct():
    sketch, sample = derive_seeds(0)
    assert sketch != sample
    assert derive_seeds(0) == (sketch, sample)


### cx

def test_cx_result_consistency(parallel_ctx, rng):
    M = rng.standard_normal((100, 12))
    result = cx(parallel_ctx.partition(M, 4), 3, seed=17)
    assert abs(result.probabilities.sum() - 1.) <= 1e-12
    npt.assert_array_equal(result.probabilities, result.leverage / result.leverage.sum())
    assert np.all(result.leverage >= 0)
    for position, j in enumerate(result.indices):
        npt.assert_array_equal(result.C[:, position], M[:, j])
    X = result.X
    direct = np.linalg.norm(M - result.C @ X)
    npt.assert_allclose(result.residual, direct, rtol=1e-8)
    C = result.C
    projection = np.linalg.norm(M - C @ np.linalg.pinv(C) @ M)
    assert direct <= projection + 1e-8


def test_cx_prefers_heavy_column(make_context, rng):
    Q, _ = np.linalg.qr(rng.standard_normal((40, 6)))
    M = Q * np.array([10., 1., 1., 1., 1., 1.])
    hits = 0
    for seed in range(100):
        ctx = make_context()
        result = cx(ctx.partition(M, 2), 1, slack=2, q=2, seed=seed)
        assert np.argmax(result.probabilities) == 0
        hits += int(result.indices[0] == 0)
    assert hits > 50


def test_cx_exact_for_low_rank(parallel_ctx, rng):
    M = rng.random((60, 3)) @ rng.random((3, 9))
    result = cx(parallel_ctx.partition(M, 3), 3, slack=3, q=2, seed=4)
    C = result.C
    if np.linalg.matrix_rank(C) == 3:
        assert result.residual <= 1e-8 * np.linalg.norm(M)


def test_cx_deterministic(make_context, rng):
    M = rng.standard_normal((50, 10))
    a = cx(make_context().partition(M, 3), 2, seed=8)
    b = cx(make_context().partition(M, 3), 2, seed=8)
    npt.assert_array_equal(a.indices, b.indices)
    npt.assert_array_equal(a.X, b.X)


@pytest.mark.slow
def test_cx_error_bound_over_seeds(make_context):
    rng = np.random.default_rng(2)
    M = power_law_matrix(rng, 500, 40)
    s = np.linalg.svd(M, compute_uv=False)
    best = np.sqrt((s[5:] ** 2).sum())
    ctx = make_context(executors=2, slots_per_executor=2)
    A = ctx.partition(M, 4)
    errors = []
    for seed in range(100):
        result = cx(A, 5, slack=5, q=2, seed=seed)
        errors.append(result.residual)
        V = randomized_svd(A, 5, slack=5, q=2, seed=seed).V
        assert abs(leverage_scores(V).sum() - 5.) <= 1e-12
    assert np.median(errors) <= 2.0 * best
