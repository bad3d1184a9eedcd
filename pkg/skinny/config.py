################################################################################
# skinny/config.py
#
# This file is part of the skinny_factor software suite.
#
# It contains the runtime configuration (RunConfig), the delay-injection
# description (DelaySpec), and the INI settings file reader.
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
import configparser
import logging
import os

from skinny.errors import ConfigError


DEFAULT_SEED = 0

_logger = logging.getLogger('sf.config')


class DelaySpec(namedtuple('DelaySpec',
                           ('dispatch_latency',
                            'straggler_seconds',
                            'straggler_probability',
                            'straggler_partitions'),
                           defaults=(0.0, 0.0, None, ()))):
    """Injected delays, all in seconds.

    dispatch_latency is added on the driver->executor leg of every task.
    A straggler sleeps straggler_seconds inside its compute phase. If
    straggler_probability is None exactly one task per stage straggles
    (chosen from the seeded stream); otherwise every task straggles
    independently with that probability. Partitions listed in
    straggler_partitions always straggle."""

    __slots__ = ()

    @property
    def enabled(self):
        return self.dispatch_latency > 0 or self.straggler_seconds > 0

    def validate(self):
        if self.dispatch_latency < 0:
            raise ConfigError(f'dispatch latency must be >= 0, got {self.dispatch_latency}')
        if self.straggler_seconds < 0:
            raise ConfigError(f'straggler duration must be >= 0, got {self.straggler_seconds}')
        if (self.straggler_probability is not None and
                not (0 <= self.straggler_probability <= 1)):
            raise ConfigError('straggler probability must be in [0, 1], got '
                              f'{self.straggler_probability}')

    def snapshot(self):
        return {
            'dispatch_latency': self.dispatch_latency,
            'straggler_seconds': self.straggler_seconds,
            'straggler_probability': self.straggler_probability,
            'straggler_partitions': list(self.straggler_partitions)
        }


class RunConfig(object):
    """Shape of the execution context: executors, slots, partitions, tree."""
    def __init__(self, executors=1, slots_per_executor=1, partitions=1,
                 tree_fanout=2, seed=DEFAULT_SEED, tasks_per_second=None,
                 delay_injection=None):
        self._executors = executors
        self._slots_per_executor = slots_per_executor
        self._partitions = partitions
        self._tree_fanout = tree_fanout
        self._seed = seed
        self._tasks_per_second = tasks_per_second
        self._delay_injection = delay_injection

    @property
    def executors(self):
        return self._executors

    @property
    def slots_per_executor(self):
        return self._slots_per_executor

    @property
    def slots(self):
        """Total number of concurrent task slots."""
        return self._executors * self._slots_per_executor

    @property
    def partitions(self):
        return self._partitions

    @property
    def tree_fanout(self):
        return self._tree_fanout

    @property
    def seed(self):
        return self._seed

    @property
    def tasks_per_second(self):
        return self._tasks_per_second

    @property
    def delay_injection(self):
        return self._delay_injection

    def validate(self):
        """Raise ConfigError if any field is out of range."""
        for name in ('executors', 'slots_per_executor', 'partitions'):
            value = getattr(self, name)
            if not isinstance(value, int) or value < 1:
                raise ConfigError(f'{name} must be an integer >= 1, got {value!r}')
        if not isinstance(self._tree_fanout, int) or self._tree_fanout < 2:
            raise ConfigError(f'tree_fanout must be an integer >= 2, got '
                              f'{self._tree_fanout!r}')
        if not isinstance(self._seed, int) or not (0 <= self._seed < 2**64):
            raise ConfigError(f'seed must be an unsigned 64-bit integer, got {self._seed!r}')
        if self._tasks_per_second is not None and self._tasks_per_second <= 0:
            raise ConfigError('tasks_per_second must be > 0, got '
                              f'{self._tasks_per_second}')
        if self._delay_injection is not None:
            self._delay_injection.validate()
        return self

    def snapshot(self):
        """Plain dictionary for reports."""
        return {
            'executors': self._executors,
            'slots_per_executor': self._slots_per_executor,
            'partitions': self._partitions,
            'tree_fanout': self._tree_fanout,
            'seed': self._seed,
            'tasks_per_second': self._tasks_per_second,
            'delay_injection': (None if self._delay_injection is None
                                else self._delay_injection.snapshot())
        }

    def __repr__(self):
        return f'RunConfig({self.snapshot()!r})'


_RUNTIME_KEYS = {
    'executors': int,
    'slots_per_executor': int,
    'partitions': int,
    'tree_fanout': int,
    'seed': int,
    'tasks_per_second': float
}

_DELAY_KEYS = {
    'dispatch_latency': float,
    'straggler_seconds': float,
    'straggler_probability': float
}


def read_config_file(config_file):
    """Read the settings file and return a dict of runtime defaults.

    Missing files are not an error; the built-in defaults apply."""
    defaults = {}
    if not config_file or not os.path.exists(config_file):
        return defaults
    _logger.info(f'Reading config file {config_file}')
    config = configparser.ConfigParser()
    try:
        config.read(config_file)
    except configparser.Error as ex:
        raise ConfigError(f'{config_file}: {ex}')
    for section, keys in (('Runtime', _RUNTIME_KEYS), ('Delays', _DELAY_KEYS)):
        if section not in config:
            continue
        for key, conv in keys.items():
            if key in config[section]:
                try:
                    defaults[key] = conv(config[section][key])
                except ValueError:
                    raise ConfigError(f'{config_file}: [{section}] {key} = '
                                      f'{config[section][key]!r} is not a number')
    return defaults
