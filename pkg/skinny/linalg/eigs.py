################################################################################
# skinny/linalg/eigs.py
#
# This file is part of the skinny_factor software suite.
#
# It contains the matrix-free eigensolver for symmetric positive
# semi-definite operators.
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
# Thick-restart Lanczos with full reorthogonalization.
#
# The solver keeps both the Krylov basis V and the operator images W = S V.
# Rayleigh-Ritz is done on V^T W, and because W is stored, the true residual
# ||S y - theta y|| of every Ritz pair comes for free without extra operator
# applications. That matters here: one application is one distributed stage.
#
# At a restart the leading Ritz vectors (and their images) are kept and the
# Krylov sequence continues from the last residual, which is orthogonal to
# everything kept. If the basis becomes invariant the sequence continues from
# a random vector orthogonal to the basis.
################################################################################

from collections import namedtuple
import logging

import numpy as np

from skinny.errors import ConvergenceError, DimensionError, NumericError
from skinny.linalg.dense import vector_signs


EigenResult = namedtuple('EigenResult',
                         ('eigenvalues', 'eigenvectors', 'residuals', 'iterations'))

_BREAKDOWN = 1e-12

_logger = logging.getLogger('sf.linalg.eigs')


def default_basis_size(n, k):
    """Number of Lanczos vectors held between restarts."""
    return min(n, max(2 * k + 1, 20))


def _orthogonalize(w, basis):
    """Project basis out of w twice (classical Gram-Schmidt with one
    reorthogonalization pass)."""
    if basis.shape[1] == 0:
        return w
    w = w - basis @ (basis.T @ w)
    return w - basis @ (basis.T @ w)


def _random_orthogonal(rng, basis):
    n, j = basis.shape
    if j >= n:
        return None
    for _ in range(3):
        v = _orthogonalize(rng.standard_normal(n), basis)
        norm = np.linalg.norm(v)
        if norm > _BREAKDOWN:
            return v / norm
    return None


def symmetric_eigs(op, n, k, tol=1e-8, max_iters=300, ncv=None, v0=None,
                   seed=0, fixed_iterations=False, callback=None):
    """Top-k eigenpairs of the symmetric PSD operator v -> op(v) of size n.

    tol is relative to the largest eigenvalue: a pair converges when
    ||S v - lambda v|| <= tol * lambda_1. max_iters bounds the number of
    operator applications; with fixed_iterations exactly max_iters
    applications are made and no convergence error is raised.
    callback(restart, eigenvalues, residuals) is called after every
    Rayleigh-Ritz step.

    Returns EigenResult(eigenvalues descending, eigenvectors n x k,
    residuals, iterations)."""
    if not (1 <= k <= n):
        raise DimensionError(f'symmetric_eigs needs 1 <= k <= n, got k={k}, n={n}')
    if ncv is None:
        ncv = default_basis_size(n, k)
    ncv = min(max(ncv, k), n)

    rng = np.random.default_rng(seed)
    V = np.zeros((n, ncv))
    W = np.zeros((n, ncv))

    if v0 is None:
        next_vec = rng.standard_normal(n)
    else:
        next_vec = np.array(v0, dtype=np.float64).reshape(n)
    norm = np.linalg.norm(next_vec)
    if norm == 0:
        raise DimensionError('symmetric_eigs start vector is zero')
    next_vec = next_vec / norm

    iterations = 0
    restart = 0
    j = 0
    theta = residuals = Y = None

    while True:
        # Expand the basis up to ncv vectors
        while j < ncv and next_vec is not None and iterations < max_iters:
            V[:, j] = next_vec
            w = np.asarray(op(next_vec), dtype=np.float64).reshape(-1)
            iterations += 1
            if w.shape[0] != n:
                raise DimensionError(f'operator returned length {w.shape[0]}, '
                                     f'expected {n}')
            if not np.all(np.isfinite(w)):
                raise NumericError('operator returned NaN or Inf')
            W[:, j] = w
            j += 1
            r = _orthogonalize(w, V[:, :j])
            beta = np.linalg.norm(r)
            if beta <= _BREAKDOWN * max(np.linalg.norm(w), 1.):
                next_vec = _random_orthogonal(rng, V[:, :j])
            else:
                next_vec = r / beta

        if j < k:
            raise ConvergenceError(f'only {iterations} operator applications '
                                   f'allowed, need at least {k}',
                                   iterations=iterations)

        # Rayleigh-Ritz on the current basis
        T = V[:, :j].T @ W[:, :j]
        T = 0.5 * (T + T.T)
        theta, S = np.linalg.eigh(T)
        theta = theta[::-1]
        S = S[:, ::-1]
        Y = V[:, :j] @ S
        SY = W[:, :j] @ S
        residuals = np.linalg.norm(SY[:, :k] - Y[:, :k] * theta[:k], axis=0)
        scale = max(theta[0], 0.)
        converged = bool(np.all(residuals <= tol * scale))
        _logger.debug(f'restart {restart}: {iterations} applications, '
                      f'max residual {residuals.max():.3e}')
        if callback is not None:
            callback(restart, theta[:k].copy(), residuals.copy())

        if iterations >= max_iters:
            break
        if converged and not fixed_iterations:
            break

        # Thick restart
        keep = max(min(k + (j - k) // 2, j - 1), 0)
        V[:, :keep] = Y[:, :keep]
        W[:, :keep] = SY[:, :keep]
        V[:, keep:] = 0.
        W[:, keep:] = 0.
        j = keep
        if next_vec is not None:
            next_vec = _orthogonalize(next_vec, V[:, :j])
            norm = np.linalg.norm(next_vec)
            next_vec = next_vec / norm if norm > _BREAKDOWN else None
        if next_vec is None:
            next_vec = _random_orthogonal(rng, V[:, :j])
        restart += 1

    if not converged and not fixed_iterations:
        raise ConvergenceError(f'{k} eigenpairs did not converge in {iterations} '
                               f'applications (max residual {residuals.max():.3e}, '
                               f'target {tol * scale:.3e})',
                               residuals=residuals, iterations=iterations)

    vectors = Y[:, :k]
    signs = vector_signs(vectors)
    return EigenResult(np.maximum(theta[:k], 0.), np.ascontiguousarray(vectors * signs),
                       residuals, iterations)
