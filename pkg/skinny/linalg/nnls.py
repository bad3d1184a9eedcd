################################################################################
# skinny/linalg/nnls.py
#
# This file is part of the skinny_factor software suite.
#
# It contains the Lawson-Hanson active-set nonnegative least squares solver.
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

from skinny.errors import DimensionError
from skinny.linalg.dense import as_dense


_logger = logging.getLogger('sf.linalg.nnls')


def _passive_solve(M, b, passive):
    z = np.zeros(M.shape[1])
    if passive.any():
        z[passive], *_ = np.linalg.lstsq(M[:, passive], b, rcond=None)
    return z


def nnls(M, b, max_iter=None, tol=None):
    """Solve min ||M x - b||_2 subject to x >= 0.

    Lawson and Hanson's active-set method: move the coordinate with the
    largest positive dual into the passive set, solve the unconstrained
    problem on the passive set, and step back along the segment whenever
    a passive coordinate would go nonpositive."""
    M = as_dense(M, 'M')
    b = np.asarray(b, dtype=np.float64).reshape(-1)
    rows, cols = M.shape
    if rows != b.shape[0]:
        raise DimensionError(f'nnls: M has {rows} rows, b has length {b.shape[0]}')
    if max_iter is None:
        max_iter = 3 * cols
    if tol is None:
        tol = 10 * np.finfo(np.float64).eps * max(rows, cols) * max(
            np.abs(M).sum(axis=0).max(initial=0.), 1.)

    x = np.zeros(cols)
    passive = np.zeros(cols, dtype=bool)
    dual = M.T @ (b - M @ x)
    outer = 0

    while (~passive).any() and (dual[~passive] > tol).any():
        outer += 1
        if outer > max_iter:
            _logger.warning(f'nnls stopped after {max_iter} outer iterations; the '
                            f'solution may not be optimal')
            break
        candidate = np.where(passive, -np.inf, dual)
        passive[int(np.argmax(candidate))] = True
        z = _passive_solve(M, b, passive)

        inner = 0
        while (z[passive] <= 0).any():
            inner += 1
            if inner > max_iter:
                _logger.warning(f'nnls step-back loop stopped after {max_iter} '
                                f'iterations')
                break
            blocking = passive & (z <= 0)
            step = x[blocking] - z[blocking]
            ratios = np.divide(x[blocking], step, out=np.zeros_like(step),
                               where=step > 0)
            alpha = np.min(ratios)
            x = x + alpha * (z - x)
            passive &= x > tol
            x[~passive] = 0.
            z = _passive_solve(M, b, passive)

        x = z
        dual = M.T @ (b - M @ x)

    x[x < 0] = 0.
    return x
