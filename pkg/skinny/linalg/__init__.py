################################################################################
# skinny/linalg/__init__.py
#
# This file is part of the skinny_factor software suite.
#
# It contains the top-level interface to the local dense kernels.
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

from .dense import (SpectralFactors,
                    as_dense,
                    least_squares,
                    r_factor,
                    thin_qr,
                    thin_svd,
                    vector_signs)
from .eigs import (EigenResult,
                   default_basis_size,
                   symmetric_eigs)
from .nnls import nnls
