################################################################################
# skinny/factor/cx.py
#
# This file is part of the skinny_factor software suite.
#
# It contains the randomized CX decomposition: a randomized SVD for the
# approximate leading right singular vectors, leverage scores, i.i.d.
# importance sampling of columns, and the optimal X for the sampled C.
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

from collections import namedtuple
import functools
import logging

import numpy as np

from skinny.errors import DimensionError, NumericError
from skinny.kernels import gather_columns, multiply_collect, multiply_gramian, tsqr
from skinny.linalg import (SpectralFactors, least_squares, thin_qr, thin_svd,
                           vector_signs)


CxResult = namedtuple('CxResult',
                      ('indices', 'C', 'X', 'leverage', 'probabilities', 'seed',
                       'residual', 'relative_residual'))

DEFAULT_SLACK = 5
DEFAULT_POWER_ITERS = 2

_logger = logging.getLogger('sf.factor.cx')


def _philox(seed):
    return np.random.Generator(np.random.Philox(seed))


def derive_seeds(seed):
    """(sketch seed, sampling seed) derived from one user seed."""
    sketch, sample = np.random.SeedSequence(seed).generate_state(2, dtype=np.uint64)
    return int(sketch), int(sample)


def randomized_svd(A, k, slack=DEFAULT_SLACK, q=DEFAULT_POWER_ITERS, seed=0):
    """Approximate rank-k SVD of A from q Gramian passes and one multiply.

    The Gaussian start block depends only on the seed and the shape, never
    on the partitioning."""
    n = A.cols
    if k < 1 or slack < 0 or k + slack > n:
        raise DimensionError(f'need 1 <= k and k + slack <= {n}, got k={k}, '
                             f'slack={slack}')
    if q < 1:
        raise DimensionError(f'need at least one power iteration, got q={q}')
    ctx = A.context

    B = _philox(seed).standard_normal((n, k + slack))
    for i in range(q):
        with ctx.phase('power'):
            B = multiply_gramian(A, B)
            if not np.all(np.isfinite(B)):
                raise NumericError(f'power iteration {i} produced NaN or Inf')
            B, _ = thin_qr(B)
    Q = B[:, :k]
    with ctx.phase('multiply'):
        Y = multiply_collect(A, Q)
    with ctx.phase('svd'):
        U, sigma, V_small = thin_svd(Y)
        V = Q @ V_small
        signs = vector_signs(V)
    return SpectralFactors(np.ascontiguousarray(U * signs), sigma,
                           np.ascontiguousarray(V * signs))


def leverage_scores(V):
    """Squared row norms of V."""
    V = np.asarray(V, dtype=np.float64)
    if V.ndim == 1:
        V = V.reshape(-1, 1)
    return np.einsum('ij,ij->i', V, V)


def sample_columns(p, k, seed):
    """k indices drawn i.i.d. from the distribution p (inverse CDF)."""
    p = np.asarray(p, dtype=np.float64).reshape(-1)
    if not np.all(np.isfinite(p)) or np.any(p < 0):
        raise NumericError('sampling probabilities must be finite and >= 0')
    total = p.sum()
    if total <= 0:
        raise NumericError('sampling probabilities are all zero')
    cdf = np.cumsum(p / total)
    cdf[-1] = 1.
    u = _philox(seed).random(k)
    indices = np.searchsorted(cdf, u, side='right')
    return np.minimum(indices, p.shape[0] - 1)


def _augment(block, indices):
    return np.hstack((block[:, indices], block))


def cx(A, k, slack=DEFAULT_SLACK, q=DEFAULT_POWER_ITERS, seed=None):
    """A ~ C X with C = k columns of A sampled by leverage score."""
    ctx = A.context
    if seed is None:
        seed = ctx.config.seed
    sketch_seed, sample_seed = derive_seeds(seed)

    factors = randomized_svd(A, k, slack=slack, q=q, seed=sketch_seed)
    leverage = leverage_scores(factors.V[:, :k])
    total = leverage.sum()
    if not total > 0:
        raise NumericError('leverage scores are all zero')
    probabilities = leverage / total
    indices = sample_columns(probabilities, k, sample_seed)
    _logger.info(f'sampled columns {indices.tolist()}')

    with ctx.phase('gather'):
        C = gather_columns(A, indices)

    # R of [C A] gives C = Q R_C and A = Q R_A with the same Q
    with ctx.phase('tsqr'):
        R = tsqr(A, prepare=functools.partial(_augment, indices=indices))
    R_C, R_A = R[:, :k], R[:, k:]
    X = least_squares(R_C, R_A)
    residual = float(np.linalg.norm(R_A - R_C @ X))
    norm_a = float(np.linalg.norm(R_A))
    relative = residual / norm_a if norm_a > 0 else 0.
    return CxResult(indices, C, X, leverage, probabilities, seed, residual, relative)
