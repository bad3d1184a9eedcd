################################################################################
# skinny/errors.py
#
# This file is part of the skinny_factor software suite.
#
# It contains the exceptions raised throughout the suite.
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


class SkinnyError(Exception):
    pass


class ConfigError(SkinnyError):
    pass


class UsageError(SkinnyError):
    pass


class DimensionError(SkinnyError):
    pass


class NumericError(SkinnyError):
    pass


class MetricsError(SkinnyError):
    pass


class ConvergenceError(SkinnyError):
    """The eigensolver ran out of iterations before every pair converged."""
    def __init__(self, message, residuals=None, iterations=None):
        super().__init__(message)
        self.residuals = residuals
        self.iterations = iterations


class StageError(SkinnyError):
    """A task failed; names the stage and the partition it was working on."""
    def __init__(self, stage_id, partition_id, cause):
        super().__init__(f'stage {stage_id}: task for partition {partition_id} '
                         f'failed: {cause}')
        self.stage_id = stage_id
        self.partition_id = partition_id
        self.cause = cause


class NegativeEntryError(SkinnyError):
    def __init__(self, partition_id, value):
        super().__init__(f'block {partition_id} contains negative entry {value!r}')
        self.partition_id = partition_id
        self.value = value


class MatrixFormatError(SkinnyError):
    def __init__(self, path, offset, message):
        super().__init__(f'{path}: offset {offset}: {message}')
        self.path = path
        self.offset = offset


class MatrixLengthError(SkinnyError):
    def __init__(self, path, expected, actual):
        super().__init__(f'{path}: expected {expected} bytes, found {actual}')
        self.path = path
        self.expected = expected
        self.actual = actual


class CsvParseError(SkinnyError):
    def __init__(self, path, line, message):
        super().__init__(f'{path}: line {line}: {message}')
        self.path = path
        self.line = line


class ResourceError(SkinnyError):
    pass
