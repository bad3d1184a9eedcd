################################################################################
# skinny/matrix_io.py
#
# This file is part of the skinny_factor software suite.
#
# It contains reading and writing of dense matrices: the binary TSMA format,
# row-range reads for streaming partitioned loads, and CSV.
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
# TSMA layout, all little-endian:
#
#   offset  size  field
#        0     4  magic "TSMA"
#        4     4  version (u32) = 1
#        8     8  rows (u64)
#       16     8  cols (u64)
#       24     1  dtype (u8), 0 = float64
#       25        rows * cols float64 values, row-major
################################################################################

from collections import namedtuple
import csv
import logging
import os
import struct

import numpy as np

from skinny.errors import (CsvParseError,
                           DimensionError,
                           MatrixFormatError,
                           MatrixLengthError)
from skinny.linalg import as_dense
from skinny.runtime import block_sizes


MAGIC = b'TSMA'
FORMAT_VERSION = 1
DTYPE_FLOAT64 = 0

_HEADER = struct.Struct('<4sIQQB')
HEADER_SIZE = _HEADER.size  # 25
_VALUE = np.dtype('<f8')

MatrixHeader = namedtuple('MatrixHeader', ('rows', 'cols'))

_logger = logging.getLogger('sf.io')


def write_matrix(path, M):
    """Write M as a TSMA file."""
    M = as_dense(M)
    rows, cols = M.shape
    with open(path, 'wb') as fp:
        fp.write(_HEADER.pack(MAGIC, FORMAT_VERSION, rows, cols, DTYPE_FLOAT64))
        fp.write(M.astype(_VALUE, copy=False).tobytes(order='C'))
    _logger.debug(f'wrote {rows}x{cols} matrix to {path}')


def _read_header(fp, path):
    data = fp.read(HEADER_SIZE)
    if len(data) < HEADER_SIZE:
        raise MatrixLengthError(path, HEADER_SIZE, len(data))
    magic, version, rows, cols, dtype = _HEADER.unpack(data)
    if magic != MAGIC:
        raise MatrixFormatError(path, 0, f'bad magic {magic!r}')
    if version != FORMAT_VERSION:
        raise MatrixFormatError(path, 4, f'unsupported version {version}')
    if dtype != DTYPE_FLOAT64:
        raise MatrixFormatError(path, 24, f'unsupported dtype {dtype}')
    expected = HEADER_SIZE + _VALUE.itemsize * rows * cols
    actual = os.fstat(fp.fileno()).st_size
    if actual != expected:
        raise MatrixLengthError(path, expected, actual)
    return MatrixHeader(rows, cols)


def read_header(path):
    """Validate a TSMA file and return its shape."""
    with open(path, 'rb') as fp:
        return _read_header(fp, path)


def _read_values(fp, path, start, count, cols):
    fp.seek(HEADER_SIZE + _VALUE.itemsize * start * cols)
    data = fp.read(_VALUE.itemsize * count * cols)
    values = np.frombuffer(data, dtype=_VALUE).astype(np.float64)
    bad = np.flatnonzero(~np.isfinite(values))
    if bad.size:
        offset = HEADER_SIZE + _VALUE.itemsize * (start * cols + int(bad[0]))
        raise MatrixFormatError(path, offset, 'value is NaN or Inf')
    values.shape = (count, cols)
    return values


def read_matrix(path):
    """Read a whole TSMA file."""
    with open(path, 'rb') as fp:
        header = _read_header(fp, path)
        return _read_values(fp, path, 0, header.rows, header.cols)


def read_matrix_rows(path, start, count):
    """Read rows [start, start + count) of a TSMA file."""
    with open(path, 'rb') as fp:
        header = _read_header(fp, path)
        if start < 0 or count < 0 or start + count > header.rows:
            raise DimensionError(f'{path}: rows {start}..{start + count} outside '
                                 f'0..{header.rows}')
        return _read_values(fp, path, start, count, header.cols)


def load_partitioned(ctx, path, partitions=None):
    """Read a TSMA file straight into near-equal row blocks, one block at a
    time."""
    header = read_header(path)
    if partitions is None:
        partitions = ctx.config.partitions
    if partitions < 1 or partitions > header.rows:
        raise DimensionError(f'cannot split {header.rows} rows into '
                             f'{partitions} partitions')
    blocks = []
    start = 0
    with open(path, 'rb') as fp:
        for size in block_sizes(header.rows, partitions):
            blocks.append(_read_values(fp, path, start, size, header.cols))
            start += size
    _logger.info(f'loaded {header.rows}x{header.cols} from {path} in '
                 f'{partitions} blocks')
    return ctx.distribute(blocks)


def read_csv(path, delimiter=','):
    """Parse a rectangular numeric UTF-8 CSV file. Blank lines are ignored."""
    rows = []
    width = None
    with open(path, newline='', encoding='utf-8') as fp:
        reader = csv.reader(fp, delimiter=delimiter)
        try:
            for fields in reader:
                if not fields or all(not f.strip() for f in fields):
                    continue
                line = reader.line_num
                if width is None:
                    width = len(fields)
                elif len(fields) != width:
                    raise CsvParseError(path, line, f'expected {width} fields, '
                                                    f'found {len(fields)}')
                try:
                    row = [float(f) for f in fields]
                except ValueError as err:
                    raise CsvParseError(path, line, str(err))
                if not all(np.isfinite(row)):
                    raise CsvParseError(path, line, 'value is NaN or Inf')
                rows.append(row)
        except UnicodeDecodeError as err:
            # The decoder reads ahead of the csv reader; the line is approximate
            raise CsvParseError(path, reader.line_num + 1, f'not UTF-8 text: {err.reason}')
    if not rows:
        return np.zeros((0, 0))
    return np.array(rows, dtype=np.float64)


def write_csv(path, M, delimiter=','):
    """Write M as CSV with shortest round-tripping float text."""
    M = as_dense(M)
    with open(path, 'w', newline='') as fp:
        csvw = csv.writer(fp, delimiter=delimiter, lineterminator='\n')
        for row in M:
            csvw.writerow([repr(float(x)) for x in row])
