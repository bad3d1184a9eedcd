################################################################################
# skinny/factor/pca.py
#
# This file is part of the skinny_factor software suite.
#
# It contains the rank-k PCA/truncated SVD of a row-partitioned matrix:
# Lanczos on the (optionally centered) Gramian operator, then one multiply
# and a small SVD on the driver.
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
# Centering is never materialized. With mu the column means and m the row
# count, the centered Gramian is
#
#   (A - 1 mu^T)^T (A - 1 mu^T) v = A^T A v - m mu (mu^T v)
#
# and the centered projection is A V - 1 (mu^T V). The residual of the
# rank-k approximation comes from ||A_c||_F^2 = sum(A^2) - m ||mu||^2 minus
# the captured sigma^2, using the statistics pass that produced mu.
################################################################################

from collections import namedtuple
import json
import logging

import numpy as np

from skinny.errors import DimensionError
from skinny.kernels import column_stats, multiply_collect, multiply_gramian
from skinny.linalg import SpectralFactors, symmetric_eigs, thin_svd, vector_signs


PcaResult = namedtuple('PcaResult',
                       ('factors', 'iterations_used', 'centered', 'column_means',
                        'residual', 'eigen_log'))

_logger = logging.getLogger('sf.factor.pca')


def column_means(A):
    """Mean of every column of A, from one tree-sum stage."""
    stats = column_stats(A)
    return stats.sums / stats.rows


def pca(A, k, center=True, tol=1e-8, max_iters=300, fixed_iterations=False,
        ncv=None):
    """Rank-k principal components of A.

    One eigensolver iteration is one Gramian stage over A. With
    fixed_iterations the solver runs exactly max_iters of them and returns
    whatever it has."""
    m, n = A.shape
    if not (1 <= k <= min(m, n)):
        raise DimensionError(f'rank k must be in [1, {min(m, n)}], got {k}')
    ctx = A.context

    with ctx.phase('column_stats'):
        stats = column_stats(A)
    if center:
        mu = stats.sums / stats.rows
    else:
        mu = np.zeros(n)
    total_sq = float(stats.sums_of_squares.sum())

    def gramian(v):
        out = multiply_gramian(A, v.reshape(n, 1))[:, 0]
        if center:
            out = out - m * mu * (mu @ v)
        return out

    eigen_log = []

    def record(restart, eigenvalues, residuals):
        eigen_log.append({'restart': restart,
                          'eigenvalues': eigenvalues.tolist(),
                          'residuals': residuals.tolist()})

    v0 = ctx.generator(3).standard_normal(n)
    with ctx.phase('eigs'):
        eig = symmetric_eigs(gramian, n, k, tol=tol, max_iters=max_iters,
                             ncv=ncv, v0=v0, fixed_iterations=fixed_iterations,
                             callback=record)
    _logger.info(f'eigensolver used {eig.iterations} Gramian stages, '
                 f'max residual {eig.residuals.max():.3e}')

    with ctx.phase('multiply'):
        Y = multiply_collect(A, eig.eigenvectors)
    if center:
        Y -= mu @ eig.eigenvectors
    with ctx.phase('svd'):
        U, sigma, V_small = thin_svd(Y)
        V = eig.eigenvectors @ V_small
        signs = vector_signs(V)
        U = np.ascontiguousarray(U * signs)
        V = np.ascontiguousarray(V * signs)

    centered_sq = total_sq - m * float(mu @ mu)
    residual = float(np.sqrt(max(centered_sq - float(sigma @ sigma), 0.)))
    return PcaResult(SpectralFactors(U, sigma, V), eig.iterations, bool(center),
                     mu, residual, eigen_log)


def svd(A, k, **kwargs):
    """Truncated SVD: pca without centering."""
    return pca(A, k, center=False, **kwargs)


def write_eigen_log(path, eigen_log):
    """One JSON object per Rayleigh-Ritz step."""
    with open(path, 'w') as fp:
        for entry in eigen_log:
            fp.write(json.dumps(entry) + '\n')
