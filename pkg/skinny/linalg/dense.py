################################################################################
# skinny/linalg/dense.py
#
# This file is part of the skinny_factor software suite.
#
# It contains the local dense kernels: thin QR, R-only QR, thin SVD and
# least squares, all with a fixed sign convention so results are
# reproducible.
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
# A DenseMatrix is simply a 2-D, C-ordered numpy float64 array. Every entry
# point runs its input through as_dense() so callers may pass lists or other
# dtypes, and so non-finite values are caught before they reach LAPACK.
#
# Sign convention: R has a nonnegative diagonal, and the first significant
# entry of every right singular vector (and eigenvector) is nonnegative.
# LAPACK leaves these signs arbitrary; pinning them makes two runs on the
# same input produce the same bits.
################################################################################

from collections import namedtuple

import numpy as np

from skinny.errors import DimensionError, NumericError


SpectralFactors = namedtuple('SpectralFactors', ('U', 'sigma', 'V'))

# Relative size below which a vector entry is treated as zero when choosing
# its sign
_SIGN_TOL = 1e-12


def as_dense(M, what='matrix'):
    """Return M as a finite, C-ordered, 2-D float64 array."""
    arr = np.ascontiguousarray(M, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1) if arr.size else arr.reshape(0, 0)
    if arr.ndim != 2:
        raise DimensionError(f'{what} must be 2-D, got shape {arr.shape}')
    if not np.all(np.isfinite(arr)):
        raise NumericError(f'{what} contains NaN or Inf')
    return arr


def vector_signs(V):
    """Signs (+1/-1) that make the first significant entry of each column of V
    nonnegative."""
    V = np.asarray(V)
    if V.size == 0:
        return np.ones(V.shape[1] if V.ndim == 2 else 0)
    mags = np.abs(V)
    col_max = mags.max(axis=0)
    significant = mags > _SIGN_TOL * col_max
    first = significant.argmax(axis=0)
    signs = np.sign(V[first, np.arange(V.shape[1])])
    signs[signs == 0] = 1.
    return signs


def _diag_signs(R):
    signs = np.sign(np.diag(R))
    signs[signs == 0] = 1.
    return signs


def thin_qr(M):
    """Thin QR of a matrix with rows >= cols.

    Returns (Q, R) with Q rows x cols orthonormal and R cols x cols upper
    triangular with a nonnegative diagonal. Rank-deficient input gives zero
    diagonal entries rather than an error."""
    M = as_dense(M)
    rows, cols = M.shape
    if rows < cols:
        raise DimensionError(f'thin_qr needs rows >= cols, got {rows}x{cols}')
    Q, R = np.linalg.qr(M, mode='reduced')
    signs = _diag_signs(R)
    return Q * signs, R * signs[:, None]


def r_factor(M):
    """R factor only, always cols x cols.

    Unlike thin_qr this accepts rows < cols; the missing rows of R are zero.
    For rows >= cols the result is bitwise equal to thin_qr(M)[1]."""
    M = as_dense(M)
    rows, cols = M.shape
    if rows == 0:
        return np.zeros((cols, cols))
    R = np.linalg.qr(M, mode='r')
    R = R * _diag_signs(R)[:, None]
    if R.shape[0] < cols:
        R = np.vstack((R, np.zeros((cols - R.shape[0], cols))))
    return np.ascontiguousarray(R)


def thin_svd(M):
    """Thin SVD: SpectralFactors(U, sigma, V) with M = U diag(sigma) V^T."""
    M = as_dense(M)
    rows, cols = M.shape
    if min(rows, cols) == 0:
        return SpectralFactors(np.zeros((rows, 0)), np.zeros(0), np.zeros((cols, 0)))
    U, sigma, Vt = np.linalg.svd(M, full_matrices=False)
    V = Vt.T
    signs = vector_signs(V)
    return SpectralFactors(np.ascontiguousarray(U * signs), sigma,
                           np.ascontiguousarray(V * signs))


def least_squares(C, A):
    """Minimum-norm X minimizing ||A - C X||_F."""
    C = as_dense(C, 'C')
    A = as_dense(A, 'A')
    if C.shape[0] != A.shape[0]:
        raise DimensionError(f'least_squares: C has {C.shape[0]} rows, A has '
                             f'{A.shape[0]}')
    X, *_ = np.linalg.lstsq(C, A, rcond=None)
    return X
