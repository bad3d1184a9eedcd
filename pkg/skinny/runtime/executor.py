################################################################################
# skinny/runtime/executor.py
#
# This file is part of the skinny_factor software suite.
#
# It contains the executors: pools of worker threads ("slots") that receive
# task messages from the driver, run them, and reply with serialized results
# and the executor-side timestamps.
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
# Message path for one task:
#
#   driver:   stamps t_task_sent, puts a TaskMessage on the executor inbox
#   executor: waits until deliver_at (injected network latency), stamps
#             t_exec_received, unpickles the broadcast (t_deser_done), runs the
#             map function plus any injected straggler sleep (t_compute_done),
#             pickles the result (t_result_ser_done) and puts a TaskOutcome on
#             the stage's reply queue
#   driver:   stamps t_driver_ack when it takes the outcome off the queue
#
# All timestamps come from time.monotonic_ns(), which is shared by every
# thread in the process.
################################################################################

from collections import namedtuple
import logging
import pickle
from queue import Queue
import threading
import time

from skinny.errors import ResourceError


TaskMessage = namedtuple('TaskMessage',
                         ('stage_id', 'task_id', 'partition_id', 'block', 'map_fn',
                          'payload', 'has_payload', 'straggle_seconds',
                          't_stage_start', 't_task_sent', 'deliver_at'))

TaskOutcome = namedtuple('TaskOutcome',
                         ('message', 'executor_id', 't_exec_received', 't_deser_done',
                          't_compute_done', 't_result_ser_done', 'data', 'error'))


def clock():
    """The single monotonic clock source, in ns."""
    return time.monotonic_ns()


def with_logger(cls):
    """Class decorator to add a logger to a class."""
    attr_name = '_logger'
    cls_name = cls.__qualname__
    module = cls.__module__
    if module is None:
        raise AssertionError
    # skinny.runtime.executor -> sf.runtime.executor
    area = module.split('.', 1)[-1]
    cls_name = area + '.' + cls_name
    setattr(cls, attr_name, logging.getLogger(f'sf.{cls_name}'))
    return cls


def run_task(message, executor_id):
    """Execute one task message and build its outcome. Never raises."""
    delay_ns = message.deliver_at - clock()
    if delay_ns > 0:
        time.sleep(delay_ns / 1e9)
    t_exec_received = clock()
    t_deser_done = t_compute_done = t_result_ser_done = t_exec_received
    try:
        if message.has_payload:
            broadcast = pickle.loads(message.payload)
        t_deser_done = clock()
        if message.has_payload:
            result = message.map_fn(message.block, broadcast)
        else:
            result = message.map_fn(message.block)
        if message.straggle_seconds > 0:
            time.sleep(message.straggle_seconds)
        t_compute_done = clock()
        data = pickle.dumps(result, protocol=pickle.HIGHEST_PROTOCOL)
        t_result_ser_done = clock()
    except Exception as err:
        return TaskOutcome(message, executor_id, t_exec_received, t_deser_done,
                           t_compute_done, t_result_ser_done, None, err)
    return TaskOutcome(message, executor_id, t_exec_received, t_deser_done,
                       t_compute_done, t_result_ser_done, data, None)


@with_logger
class _SlotWorker(threading.Thread):
    """
    Read task messages from the executor inbox and run them.

    For use by the Executor
    """

    def __init__(self, queue, executor_id, num):
        super().__init__(name=f'executor-{executor_id}-slot-{num}', daemon=True)
        self.__queue = queue
        self.__executor_id = executor_id
        self.__num = num

    def run(self):
        queue = self.__queue
        while True:
            command = queue.get()
            if command is None:
                # Stopping...
                break

            message, reply = command
            self._logger.debug(
                "executor %s slot %s got task %s (stage %s, partition %s)",
                self.__executor_id, self.__num, message.task_id,
                message.stage_id, message.partition_id)
            reply.put(run_task(message, self.__executor_id))

        self._logger.debug("executor %s slot %s stopped",
                           self.__executor_id, self.__num)


@with_logger
class Executor:
    """
    One executor with a fixed number of task slots sharing an inbox.

    >>> with Executor(0, slots=2) as executor:
    ...     executor.submit(message, reply_queue)
    """

    def __init__(self, executor_id, slots=1):
        super().__init__()
        self.__executor_id = executor_id
        self.__slots = slots
        self.__queue = Queue()
        self.__workers = [
            _SlotWorker(self.__queue, executor_id, i + 1) for i in range(slots)
        ]
        self.__been_shutdown = False

        try:
            for w in self.__workers:
                w.start()
        except RuntimeError as err:
            self.shutdown(wait=False)
            raise ResourceError(f'cannot start executor {executor_id}: {err}')

    @property
    def executor_id(self):
        return self.__executor_id

    @property
    def slots(self):
        return self.__slots

    def submit(self, message, reply):
        if self.__been_shutdown:
            raise RuntimeError("Executor has been shutdown")
        self.__queue.put((message, reply))

    def shutdown(self, wait=True):
        if self.__been_shutdown:
            return

        self.__been_shutdown = True

        self._logger.debug("Shutting down executor %s", self.__executor_id)
        for i in range(len(self.__workers)):
            # Signal workers to stop
            self.__queue.put(None)
        if wait:
            for w in self.__workers:
                if w.is_alive():
                    w.join()

    def __enter__(self, *args):
        if self.__been_shutdown:
            raise RuntimeError("Executor has been shutdown")
        return self

    def __exit__(self, *args):
        self.shutdown()
