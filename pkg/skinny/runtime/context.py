################################################################################
# skinny/runtime/context.py
#
# This file is part of the skinny_factor software suite.
#
# It contains the execution context (the driver side of the runtime) and the
# row-block-partitioned matrix handle it owns.
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
# The driver is single threaded. For each stage it runs one loop that does two
# things, in this order of preference:
#
#   1. If a task is waiting, some executor has a free slot, and the dispatch
#      rate allows it, send exactly one task.
#   2. Otherwise take one completion message off the reply queue and
#      acknowledge it.
#
# Because sending is preferred, acknowledgements queue up while the driver is
# still handing out tasks, and that wait shows up as scheduler delay. This is
# the centralized-scheduler behavior the runtime is meant to expose.
#
# Results are combined after the last acknowledgement in a fixed tree over
# partition indices, so floating-point reduction order never depends on
# completion order.
################################################################################

from collections import defaultdict, deque
import contextlib
import itertools
import logging
import pickle
import queue

import numpy as np

from skinny.config import DelaySpec
from skinny.errors import DimensionError, StageError
from skinny.linalg import as_dense
from skinny.runtime.executor import Executor, TaskMessage, clock
from skinny.runtime.metrics import StageMetrics, TaskRecord


_NO_BROADCAST = object()

_matrix_ids = itertools.count(1)


class DistMatrix(object):
    """Row-block-partitioned matrix. Blocks are read-only after creation."""
    def __init__(self, context, blocks):
        self._id = next(_matrix_ids)
        self._context = context
        offsets = []
        arrays = []
        row = 0
        cols = None
        for block in blocks:
            if not (isinstance(block, np.ndarray) and block.dtype == np.float64 and
                    block.flags.c_contiguous and block.base is None):
                block = np.array(block, dtype=np.float64, order='C')
            if block.ndim != 2:
                raise DimensionError(f'block must be 2-D, got shape {block.shape}')
            if cols is None:
                cols = block.shape[1]
            elif block.shape[1] != cols:
                raise DimensionError(f'block has {block.shape[1]} columns, '
                                     f'expected {cols}')
            block.setflags(write=False)
            offsets.append(row)
            arrays.append(block)
            row += block.shape[0]
        if not arrays:
            raise DimensionError('a distributed matrix needs at least one block')
        self._offsets = tuple(offsets)
        self._blocks = tuple(arrays)
        self._global_rows = row
        self._cols = cols

    @property
    def id(self):
        return self._id

    @property
    def context(self):
        return self._context

    @property
    def global_rows(self):
        return self._global_rows

    @property
    def cols(self):
        return self._cols

    @property
    def shape(self):
        return (self._global_rows, self._cols)

    @property
    def num_partitions(self):
        return len(self._blocks)

    @property
    def blocks(self):
        """Ordered (row_offset, block) pairs."""
        return tuple(zip(self._offsets, self._blocks))

    def block_rows(self):
        return [b.shape[0] for b in self._blocks]

    def gather(self):
        """Concatenate the blocks on the driver (no stage is run)."""
        return np.vstack(self._blocks)

    def __repr__(self):
        return (f'DistMatrix(id={self._id}, shape={self.shape}, '
                f'partitions={self.num_partitions})')


def block_sizes(rows, partitions):
    """Near-equal block sizes; the first rows % partitions blocks get one more."""
    base, extra = divmod(rows, partitions)
    return [base + 1 if i < extra else base for i in range(partitions)]


def tree_combine(values, combine, fanout=2):
    """Reduce values level by level in groups of fanout, left to right."""
    level = list(values)
    if not level:
        raise ValueError('nothing to combine')
    while len(level) > 1:
        next_level = []
        for i in range(0, len(level), fanout):
            acc = level[i]
            for value in level[i+1:i+fanout]:
                acc = combine(acc, value)
            next_level.append(acc)
        level = next_level
    return level[0]


class ExecContext(object):
    """Driver plus executors. Use as a context manager to release the pool."""
    def __init__(self, config):
        self._config = config
        self._logger = logging.getLogger('sf.runtime')
        self._executors = []
        try:
            for i in range(config.executors):
                self._executors.append(Executor(i, slots=config.slots_per_executor))
        except Exception:
            self.close()
            raise
        self._stage_ids = itertools.count(0)
        self._task_ids = itertools.count(0)
        self._stage_log = []
        self._passes = defaultdict(int)
        self._phases = {}
        self._closed = False
        delays = config.delay_injection
        self._delays = delays if delays is not None else DelaySpec()
        self._logger.info(f'Created context with {config.executors} executors x '
                          f'{config.slots_per_executor} slots')

    @property
    def config(self):
        return self._config

    @property
    def slots(self):
        return self._config.slots

    @property
    def stage_log(self):
        """StageMetrics of every stage run so far, in order."""
        return list(self._stage_log)

    @property
    def phases(self):
        """Accumulated driver wall time per named phase, in ns."""
        return dict(self._phases)

    def passes(self, matrix):
        """Number of stages that have read the blocks of matrix."""
        return self._passes[matrix.id]

    def generator(self, *key):
        """Deterministic random stream derived from the seed and an integer key."""
        return np.random.default_rng(
            np.random.SeedSequence(self._config.seed, spawn_key=key))

    @contextlib.contextmanager
    def phase(self, name):
        """Accumulate the wall time of a block of driver code under name."""
        t0 = clock()
        try:
            yield
        finally:
            self._phases[name] = self._phases.get(name, 0) + clock() - t0

    def close(self):
        for executor in self._executors:
            executor.shutdown()
        self._closed = True

    def __enter__(self):
        return self

    def __exit__(self, *args):
        self.close()

    ### Matrix distribution

    def partition(self, M, partitions=None):
        """Split a dense matrix into near-equal row blocks."""
        M = as_dense(M)
        if partitions is None:
            partitions = self._config.partitions
        rows = M.shape[0]
        if partitions < 1 or partitions > rows:
            raise DimensionError(f'cannot split {rows} rows into {partitions} partitions')
        blocks = []
        start = 0
        for size in block_sizes(rows, partitions):
            blocks.append(M[start:start+size])
            start += size
        return DistMatrix(self, blocks)

    def distribute(self, blocks):
        """Wrap already-split row blocks (e.g. streamed from a file)."""
        return DistMatrix(self, blocks)

    ### Stages

    def _straggle_plan(self, stage_id, num_tasks):
        delays = self._delays
        plan = np.zeros(num_tasks)
        if delays.straggler_seconds <= 0:
            return plan
        if delays.straggler_partitions:
            for p in delays.straggler_partitions:
                if 0 <= p < num_tasks:
                    plan[p] = delays.straggler_seconds
        elif delays.straggler_probability is None:
            rng = self.generator(1, stage_id)
            plan[int(rng.integers(num_tasks))] = delays.straggler_seconds
        else:
            rng = self.generator(2, stage_id)
            hits = rng.random(num_tasks) < delays.straggler_probability
            plan[hits] = delays.straggler_seconds
        return plan

    def execute_stage(self, A, map_fn, combine=None, broadcast=_NO_BROADCAST,
                      name='stage'):
        """Run map_fn over every block of A, one task per partition.

        With combine, the per-block results are reduced in the fixed tree
        order; without it the stage is a collect and the results come back
        as a list in partition order. If broadcast is given it is pickled
        once and handed to every task as map_fn(block, broadcast).

        Returns (result, StageMetrics)."""
        stage_id = next(self._stage_ids)
        self._passes[A.id] += 1
        has_payload = broadcast is not _NO_BROADCAST
        payload = (pickle.dumps(broadcast, protocol=pickle.HIGHEST_PROTOCOL)
                   if has_payload else None)
        blocks = [block for _, block in A.blocks]
        num_tasks = len(blocks)
        straggle = self._straggle_plan(stage_id, num_tasks)
        latency_ns = int(self._delays.dispatch_latency * 1e9)
        rate = self._config.tasks_per_second
        interval_ns = int(1e9 / rate) if rate else 0

        reply = queue.Queue()
        pending = deque(range(num_tasks))
        free = [e.slots for e in self._executors]
        outstanding = 0
        results = [None] * num_tasks
        records = [None] * num_tasks
        failures = []

        self._logger.debug(f'stage {stage_id} ({name}): {num_tasks} tasks')
        t_stage_start = clock()
        next_send = t_stage_start
        while pending or outstanding:
            now = clock()
            can_send = bool(pending) and max(free) > 0
            if can_send and now >= next_send:
                partition_id = pending.popleft()
                executor_id = max(range(len(free)), key=lambda i: (free[i], -i))
                free[executor_id] -= 1
                outstanding += 1
                t_task_sent = clock()
                message = TaskMessage(stage_id, next(self._task_ids), partition_id,
                                      blocks[partition_id], map_fn, payload,
                                      has_payload, float(straggle[partition_id]),
                                      t_stage_start, t_task_sent,
                                      t_task_sent + latency_ns)
                self._executors[executor_id].submit(message, reply)
                next_send = t_task_sent + interval_ns
                continue
            timeout = (next_send - now) / 1e9 if can_send else None
            try:
                outcome = reply.get(timeout=timeout)
            except queue.Empty:
                continue
            t_driver_ack = clock()
            outstanding -= 1
            free[outcome.executor_id] += 1
            message = outcome.message
            if outcome.error is not None:
                failures.append((message.partition_id, outcome.error))
                continue
            records[message.partition_id] = TaskRecord(
                stage_id, message.task_id, message.partition_id,
                t_stage_start, message.t_task_sent, outcome.t_exec_received,
                outcome.t_deser_done, outcome.t_compute_done,
                outcome.t_result_ser_done, t_driver_ack, outcome.executor_id)
            results[message.partition_id] = outcome.data
            self._logger.debug(f'task {message.task_id} (partition '
                               f'{message.partition_id}) done on executor '
                               f'{outcome.executor_id}')

        if failures:
            partition_id, cause = min(failures, key=lambda f: f[0])
            self._logger.error(f'stage {stage_id} ({name}) failed in partition '
                               f'{partition_id}: {cause}')
            err = StageError(stage_id, partition_id, cause)
            raise err from cause

        results = [pickle.loads(data) for data in results]
        t_combine = clock()
        if combine is None:
            value = results
        else:
            value = tree_combine(results, combine, self._config.tree_fanout)
        combine_ns = clock() - t_combine

        metrics = StageMetrics(stage_id, name, A.id, t_stage_start, records,
                               combine_ns=combine_ns)
        self._stage_log.append(metrics)
        self._logger.info(f'stage {stage_id} ({name}): {num_tasks} tasks in '
                          f'{metrics.wall_ns / 1e6:.3f} ms')
        return value, metrics


def create_context(config):
    """Validate config and start the executors."""
    return ExecContext(config.validate())


def partition(ctx, M, partitions):
    return ctx.partition(M, partitions)


def execute_stage(ctx, A, map_fn, combine=None, **kwargs):
    return ctx.execute_stage(A, map_fn, combine, **kwargs)
