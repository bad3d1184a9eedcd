################################################################################
# skinny/factor/__init__.py
#
# This file is part of the skinny_factor software suite.
#
# It contains the top-level interface to the factorizations.
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

from skinny.errors import UsageError

from .cx import (CxResult,
                 cx,
                 derive_seeds,
                 leverage_scores,
                 randomized_svd,
                 sample_columns)
from .nmf import NmfResult, nmf, xray
from .pca import PcaResult, column_means, pca, svd, write_eigen_log


# A factorization result is one of these
FactorizationResult = (PcaResult, NmfResult, CxResult)


def factor_arrays(result):
    """The dense factors of a result by short name, in file order."""
    if isinstance(result, PcaResult):
        U, sigma, V = result.factors
        return {'U': U, 'S': sigma, 'V': V}
    if isinstance(result, NmfResult):
        return {'W': result.W, 'H': result.H}
    if isinstance(result, CxResult):
        return {'C': result.C, 'X': result.X}
    raise TypeError(f'not a factorization result: {type(result).__name__}; '
                    f'expected one of {", ".join(t.__name__ for t in FactorizationResult)}')


_FACTOR_MAPPING = {
    'pca': pca,
    'svd': svd,
    'nmf': nmf,
    'cx': cx
}
SUPPORTED_FACTORIZATIONS = sorted(_FACTOR_MAPPING)


def get_factorization(name):
    """The factorization function registered under name."""
    try:
        return _FACTOR_MAPPING[name]
    except KeyError:
        raise UsageError(f'unknown factorization {name!r}; choose from '
                         f'{", ".join(SUPPORTED_FACTORIZATIONS)}')
