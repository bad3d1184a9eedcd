################################################################################
# skinny/log.py
#
# This file is part of the skinny_factor software suite.
#
# It contains the logging setup: one logger tree rooted at "sf", a console
# and an optional file handler, and per-area level overrides.
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


import argparse
import logging


LOGGING_LEVEL_CHOICES = ['debug', 'info', 'warning', 'error', 'critical', 'none']

LOGGING_SUPERCRITICAL = 60

ROOT_LOGGER_NAME = 'sf'

# Areas that can be given their own level with --log-area
LOG_AREAS = ('cli', 'config', 'io', 'runtime', 'kernels', 'linalg', 'linalg.eigs',
             'linalg.nnls', 'factor', 'factor.pca', 'factor.nmf', 'factor.cx')

# Executor slots are threads, so the thread name says which slot logged
_FULL_FORMAT = ('%(asctime)s.%(msecs)03d - %(threadName)s - %(name)s - '
                '%(levelname)s - %(message)s')
_BRIEF_FORMAT = '%(name)s - %(levelname)s - %(message)s'
_DATE_FORMAT = '%Y-%m-%d %H:%M:%S'

_LOG_CONSOLE_HANDLER = None
_LOG_FILE_HANDLER = None


def _swap_handler(old, new):
    root_logger = logging.getLogger(ROOT_LOGGER_NAME)
    if old is not None:
        root_logger.removeHandler(old)
        old.close()
    root_logger.addHandler(new)
    return new


def add_console_handler(level=logging.DEBUG):
    global _LOG_CONSOLE_HANDLER
    handler = logging.StreamHandler()
    handler.setLevel(level)
    _LOG_CONSOLE_HANDLER = _swap_handler(_LOG_CONSOLE_HANDLER, handler)
    set_console_format()


def set_console_format(full=True):
    if full:
        formatter = logging.Formatter(_FULL_FORMAT, datefmt=_DATE_FORMAT)
    else:
        formatter = logging.Formatter(_BRIEF_FORMAT)
    _LOG_CONSOLE_HANDLER.setFormatter(formatter)


def add_file_handler(filename, level=logging.DEBUG):
    global _LOG_FILE_HANDLER
    handler = logging.FileHandler(filename)
    handler.setLevel(level)
    handler.setFormatter(logging.Formatter(_FULL_FORMAT, datefmt=_DATE_FORMAT))
    _LOG_FILE_HANDLER = _swap_handler(_LOG_FILE_HANDLER, handler)


def decode_level(s):
    if s.upper() == 'NONE':
        return LOGGING_SUPERCRITICAL
    return getattr(logging, s.upper())


def min_level(*levels):
    return min(levels, default=LOGGING_SUPERCRITICAL)


def parse_area_level(s):
    """AREA=LEVEL, e.g. runtime=debug. Returns (area, numeric level)."""
    area, sep, level = s.partition('=')
    if not sep or area not in LOG_AREAS or level.lower() not in LOGGING_LEVEL_CHOICES:
        raise ValueError(f'expected AREA=LEVEL with AREA one of {", ".join(LOG_AREAS)} '
                         f'and LEVEL one of {", ".join(LOGGING_LEVEL_CHOICES)}; '
                         f'got {s!r}')
    return area, decode_level(level)


class AreaFilter(logging.Filter):
    """Console threshold per area: a record passes if its level reaches the
    level of the longest matching area, or the default level otherwise."""
    def __init__(self, default_level, area_levels=()):
        super().__init__()
        self._default_level = default_level
        self._prefixes = sorted(((f'{ROOT_LOGGER_NAME}.{area}', level)
                                 for area, level in area_levels),
                                key=lambda x: -len(x[0]))

    def threshold(self, name):
        for prefix, level in self._prefixes:
            if name == prefix or name.startswith(prefix + '.'):
                return level
        return self._default_level

    def filter(self, record):
        return record.levelno >= self.threshold(record.name)


def setup_logging(console_level, logfile_level, logfile, area_levels=()):
    """Configure the "sf" tree. area_levels, (area, level) pairs from
    parse_area_level, override the console level for those areas only."""
    logfile_level = decode_level(logfile_level)
    console_level = decode_level(console_level)
    if not logfile:
        logfile_level = LOGGING_SUPERCRITICAL
    area_levels = list(area_levels)

    logger = logging.getLogger(ROOT_LOGGER_NAME)
    logger.setLevel(min_level(logfile_level, console_level,
                              *(level for _, level in area_levels)))

    # Always create a console handler so we don't get a 'no handler' error
    add_console_handler(level=logging.NOTSET)
    _LOG_CONSOLE_HANDLER.addFilter(AreaFilter(console_level, area_levels))

    if logfile_level != LOGGING_SUPERCRITICAL:
        add_file_handler(logfile, level=logfile_level)


def _area_level(s):
    try:
        return parse_area_level(s)
    except ValueError as err:
        raise argparse.ArgumentTypeError(str(err))


def add_arguments(parser, default_logfile, default_config_file):
    """Add all logging command line arguments."""
    parser.add_argument(
        '--logfile', metavar='FILENAME', default=default_logfile,
        help=f'The full path of the logfile to write; defaults to {default_logfile}')
    parser.add_argument(
        '--logfile-log-level', metavar='LEVEL', default='none',
        choices=LOGGING_LEVEL_CHOICES,
        help='Choose the logging level to be output to the logfile')
    parser.add_argument(
        '--console-log-level', metavar='LEVEL', default='warning',
        choices=LOGGING_LEVEL_CHOICES,
        help='Choose the logging level to be output to stderr')
    parser.add_argument(
        '--log-area', metavar='AREA=LEVEL', type=_area_level, action='append',
        default=[],
        help='Level for one area of the program, e.g. runtime=debug; repeatable')
    parser.add_argument(
        '--config-file', metavar='FILENAME', default=default_config_file,
        help='Runtime settings file (INI) supplying defaults for the runtime '
             f'flags; defaults to {default_config_file}')
