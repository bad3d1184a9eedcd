################################################################################
# tests/test_nmf.py
#
# This file is part of the skinny_factor software suite.
#
# It contains tests of the Xray column selection and separable NMF.
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

from skinny.errors import DimensionError, NegativeEntryError
from skinny.factor import nmf, xray
from skinny.kernels import tsqr


def separable(rng, rows, k, extra):
    """A = [W0, W0 M] with nonnegative W0 and M, columns shuffled."""
    W0 = rng.random((rows, k))
    M = rng.random((k, extra))
    A = np.hstack((W0, W0 @ M))
    order = rng.permutation(k + extra)
    generators = {int(np.flatnonzero(order == j)[0]) for j in range(k)}
    return A[:, order], generators


### xray

def test_xray_small_example():
    R = np.array([[1., 0., .5], [0., 1., .5]])
    K, H = xray(R, 2)
    assert K == [0, 1]
    npt.assert_allclose(H[:, 2], [.5, .5], atol=1e-12)
    npt.assert_allclose(R[:, K] @ H, R, atol=1e-12)


def test_xray_full_rank_all_columns(rng):
    R = np.triu(rng.random((4, 4))) + np.eye(4)
    K, H = xray(R, 4)
    assert sorted(K) == [0, 1, 2, 3]
    npt.assert_allclose(R[:, K] @ H, R, atol=1e-10)
    assert np.all(H >= 0)


def test_xray_diagonal():
    R = np.diag([1., 3., 2.])
    K, H = xray(R, 3)
    assert K == [1, 2, 0]
    npt.assert_allclose(H, np.eye(3)[K], atol=1e-12)


def test_xray_zero_column_selected_last():
    R = np.array([[1., 0., 0.], [0., 0., 2.]])
    K, _ = xray(R, 3)
    assert K[-1] == 1


def test_xray_k_too_large():
    with pytest.raises(DimensionError):
        xray(np.eye(2), 3)


### nmf

def test_nmf_recovers_separable_columns(parallel_ctx):
    rng = np.random.default_rng(11)
    for _ in range(20):
        M, generators = separable(rng, 100, 4, 8)
        result = nmf(parallel_ctx.partition(M, 5), 4)
        assert set(result.selected) == generators
        assert result.relative_residual <= 1e-8
        assert np.all(result.H >= 0)


def test_nmf_residual_equals_direct_residual(parallel_ctx, rng):
    M = rng.random((80, 10))
    result = nmf(parallel_ctx.partition(M, 4), 3)
    direct = np.linalg.norm(M - result.W @ result.H)
    npt.assert_allclose(result.residual, direct, rtol=1e-8)
    npt.assert_array_equal(result.W, M[:, result.selected])


def test_nmf_diagonal_stack_is_exact(ctx):
    M = np.vstack((np.diag([1., 2., 3.]), np.diag([4., 5., 6.])))
    result = nmf(ctx.partition(M, 2), 3)
    assert sorted(result.selected) == [0, 1, 2]
    assert result.residual <= 1e-12


def test_nmf_h_independent_of_partitioning(make_context, rng):
    M, _ = separable(rng, 60, 3, 5)
    results = [nmf(make_context().partition(M, p), 3) for p in (1, 4, 7)]
    for r in results[1:]:
        assert r.selected == results[0].selected
        npt.assert_allclose(r.H, results[0].H, atol=1e-8)


def test_nmf_clamps_tiny_negatives(ctx, rng):
    M = rng.random((20, 4))
    M[3, 2] = -1e-12
    result = nmf(ctx.partition(M, 2), 2)
    assert np.all(result.W >= 0)


def test_nmf_negative_entry_names_block(ctx):
    M = np.ones((12, 3))
    M[10, 1] = -0.5
    with pytest.raises(NegativeEntryError) as excinfo:
        nmf(ctx.partition(M, 3), 2)
    assert excinfo.value.partition_id == 2
    assert 'block 2' in str(excinfo.value)


def test_nmf_tsqr_is_the_only_full_pass(ctx, rng):
    A = ctx.partition(rng.random((40, 6)), 4)
    nmf(A, 2)
    assert [s.name for s in ctx.stage_log] == ['tsqr', 'gather']
    assert ctx.passes(A) == 2


@pytest.mark.slow
def test_nmf_large_smoke(make_context):
    rng = np.random.default_rng(3)
    ctx = make_context(executors=2, slots_per_executor=4)
    M = rng.random((1_000_000, 192))
    A = ctx.partition(M, 8)
    result = nmf(A, 10)
    assert len(set(result.selected)) == 10
    s = np.linalg.svd(tsqr(A), compute_uv=False)
    best = np.sqrt((s[10:] ** 2).sum())
    assert best <= result.residual
