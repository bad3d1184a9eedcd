################################################################################
# skinny/kernels.py
#
# This file is part of the skinny_factor software suite.
#
# It contains the distributed primitives shared by the factorizations: the
# Gramian multiply, the multiply-and-collect, tree TSQR, column statistics
# and column gathers. Each one is a single stage over the row blocks.
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

from skinny.errors import DimensionError
from skinny.linalg import as_dense, r_factor


_logger = logging.getLogger('sf.kernels')


ColumnStats = namedtuple('ColumnStats', ('sums', 'sums_of_squares', 'rows'))


def _check_inner(A, B, what):
    B = as_dense(B, what)
    if B.shape[0] != A.cols:
        raise DimensionError(f'{what} has {B.shape[0]} rows, matrix has '
                             f'{A.cols} columns')
    return B


### MultiplyGramian

def _gramian_map(block, B):
    return block.T @ (block @ B)


def multiply_gramian(A, B):
    """A^T A B as a tree sum of block^T (block B). B is broadcast once."""
    B = _check_inner(A, B, 'B')
    result, _ = A.context.execute_stage(A, _gramian_map, np.add, broadcast=B,
                                        name='gramian')
    return result


### Multiply and collect

def _multiply_map(block, B):
    return block @ B


def multiply_collect(A, B):
    """A B gathered to the driver in global row order."""
    B = _check_inner(A, B, 'B')
    parts, _ = A.context.execute_stage(A, _multiply_map, broadcast=B,
                                       name='multiply')
    return np.vstack(parts)


### TSQR

def _tsqr_map(block, prepare, column_sums):
    if prepare is not None:
        block = prepare(block)
    R = r_factor(block)
    if column_sums:
        return R, block.sum(axis=0)
    return R


def _tsqr_combine(left, right):
    return r_factor(np.vstack((left, right)))


def _tsqr_combine_with_sums(left, right):
    return (r_factor(np.vstack((left[0], right[0]))), left[1] + right[1])


def tsqr(A, prepare=None, column_sums=False):
    """R factor of A by a reduction tree of local QR factorizations.

    prepare, if given, maps every block before its local factorization (it
    may change the column count). With column_sums the column sums of the
    prepared blocks come back from the same pass and the result is
    (R, sums)."""
    map_fn = functools.partial(_tsqr_map, prepare=prepare, column_sums=column_sums)
    combine = _tsqr_combine_with_sums if column_sums else _tsqr_combine
    _logger.debug(f'tsqr over {A.num_partitions} blocks of {A.cols} columns')
    result, _ = A.context.execute_stage(A, map_fn, combine, name='tsqr')
    return result


### Column statistics and gathers

def _stats_map(block):
    return ColumnStats(block.sum(axis=0), np.einsum('ij,ij->j', block, block),
                       block.shape[0])


def _stats_combine(left, right):
    return ColumnStats(left.sums + right.sums,
                       left.sums_of_squares + right.sums_of_squares,
                       left.rows + right.rows)


def column_stats(A):
    """Column sums, column sums of squares and row count in one stage."""
    result, _ = A.context.execute_stage(A, _stats_map, _stats_combine,
                                        name='column_stats')
    return result


def _gather_map(block, indices):
    return block[:, indices]


def gather_columns(A, indices):
    """The columns of A at indices (repeats allowed), collected in row order."""
    indices = np.asarray(indices, dtype=np.intp).reshape(-1)
    if indices.size and (indices.min() < 0 or indices.max() >= A.cols):
        raise DimensionError(f'column index out of range for {A.cols} columns')
    _logger.debug(f'gathering {indices.size} of {A.cols} columns')
    parts, _ = A.context.execute_stage(A, _gather_map, broadcast=indices,
                                       name='gather')
    return np.vstack(parts)
