################################################################################
# skinny/factor/nmf.py
#
# This file is part of the skinny_factor software suite.
#
# It contains the one-pass separable NMF: TSQR of A to R, greedy extreme
# column selection (Xray) on the small R, and W gathered from A.
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

################################################################################
# Xray selection
#
# At every step each unselected column j gets the score
#
#   score_j = || max(Resid^T R(:, j), 0) ||_2 / w_j
#
# where Resid = R - R(:, K) H is the current residual and w is a positive
# linear weight of the columns. Scaled by a linear weight the score is
# convex in the column, so its maximum over a cone sits on an extreme ray.
# Selected columns score zero: nnls optimality gives R(:, K)^T Resid <= 0.
#
# For nmf the weights are the column sums of A (taken in the TSQR pass); for
# a bare nonnegative R they are the column sums of R; otherwise the column
# norms.
#
# After every selection H is refit column by column with nnls.
################################################################################

from collections import namedtuple
import functools
import logging

import numpy as np

from skinny.errors import DimensionError, NegativeEntryError, StageError
from skinny.kernels import gather_columns, tsqr
from skinny.linalg import as_dense, nnls


NmfResult = namedtuple('NmfResult',
                       ('selected', 'H', 'W', 'residual', 'relative_residual'))

DEFAULT_NEGATIVE_EPSILON = 1e-9

_logger = logging.getLogger('sf.factor.nmf')


def _fit_h(R, K):
    RK = R[:, K]
    return np.column_stack([nnls(RK, R[:, j]) for j in range(R.shape[1])])


def _default_weights(R):
    if np.all(R >= 0):
        return R.sum(axis=0)
    return np.linalg.norm(R, axis=0)


def xray(R, k, weights=None):
    """Greedily pick k extreme columns of R and the nonnegative H with
    R ~ R[:, K] H. Returns (K, H), K in selection order."""
    R = as_dense(R, 'R')
    n = R.shape[1]
    if not (1 <= k <= n):
        raise DimensionError(f'xray needs 1 <= k <= {n}, got {k}')
    if weights is None:
        weights = _default_weights(R)
    weights = np.asarray(weights, dtype=np.float64).reshape(-1)
    if weights.shape[0] != n:
        raise DimensionError(f'{weights.shape[0]} weights for {n} columns')
    scale = max(float(np.abs(weights).max()), 1.)
    usable = weights > 1e-14 * scale

    selected = []
    H = np.zeros((0, n))
    resid = R.copy()
    for step in range(k):
        open_cols = np.ones(n, dtype=bool)
        open_cols[selected] = False
        candidates = open_cols & usable
        if not candidates.any():
            candidates = open_cols
        align = np.linalg.norm(np.maximum(resid.T @ R, 0.), axis=0)
        scores = np.full(n, -np.inf)
        safe = candidates & usable
        scores[safe] = align[safe] / weights[safe]
        scores[candidates & ~usable] = 0.
        j = int(np.argmax(scores))
        selected.append(j)
        H = _fit_h(R, selected)
        resid = R - R[:, selected] @ H
        _logger.debug(f'xray step {step}: column {j}, residual '
                      f'{np.linalg.norm(resid):.3e}')
    return selected, H


def _check_nonnegative(block, epsilon):
    low = block.min() if block.size else 0.
    if low >= 0:
        return block
    if low < -epsilon:
        raise NegativeEntryError(None, float(low))
    return np.maximum(block, 0.)


def nmf(A, k, epsilon=DEFAULT_NEGATIVE_EPSILON):
    """Separable NMF A ~ W H with W = A[:, K], computed from one pass over A.

    Entries in (-epsilon, 0) are read as zero; anything more negative is an
    error naming the block it came from."""
    m, n = A.shape
    if not (1 <= k <= n):
        raise DimensionError(f'rank k must be in [1, {n}], got {k}')
    ctx = A.context
    prepare = functools.partial(_check_nonnegative, epsilon=epsilon)

    with ctx.phase('tsqr'):
        try:
            R, sums = tsqr(A, prepare=prepare, column_sums=True)
        except StageError as err:
            if isinstance(err.cause, NegativeEntryError):
                raise NegativeEntryError(err.partition_id, err.cause.value) from err
            raise

    with ctx.phase('xray'):
        K, H = xray(R, k, weights=sums)
    _logger.info(f'selected columns {K}')

    with ctx.phase('gather'):
        W = np.maximum(gather_columns(A, K), 0.)

    residual = float(np.linalg.norm(R - R[:, K] @ H))
    norm_r = float(np.linalg.norm(R))
    relative = residual / norm_r if norm_r > 0 else 0.
    return NmfResult(K, H, W, residual, relative)
