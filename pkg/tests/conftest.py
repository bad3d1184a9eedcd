################################################################################
# tests/conftest.py
#
# This file is part of the skinny_factor software suite.
#
# It contains the shared pytest fixtures.
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

import numpy as np
import pytest

from skinny.config import RunConfig
from skinny.runtime import create_context


@pytest.fixture
def rng():
    return np.random.default_rng(20260417)


@pytest.fixture
def make_context():
    """Factory for execution contexts; all of them are closed at teardown."""
    contexts = []

    def make(**kwargs):
        ctx = create_context(RunConfig(**kwargs))
        contexts.append(ctx)
        return ctx

    yield make
    for ctx in contexts:
        ctx.close()


@pytest.fixture
def ctx(make_context):
    """One executor with one slot."""
    return make_context()


@pytest.fixture
def parallel_ctx(make_context):
    """Two executors with four slots each."""
    return make_context(executors=2, slots_per_executor=4)


def centered(M):
    return M - M.mean(axis=0)


def sign_align(V, ref):
    """Flip the columns of V to agree in sign with ref."""
    signs = np.sign(np.sum(V * ref, axis=0))
    signs[signs == 0] = 1.
    return V * signs
