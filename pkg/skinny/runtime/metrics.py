################################################################################
# skinny/runtime/metrics.py
#
# This file is part of the skinny_factor software suite.
#
# It contains the per-task timing records, the overhead bins derived from
# them, and the per-stage metrics with their JSON-lines and CSV output.
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
# Overhead bins for one task, all in ns:
#
#   task_start_delay     = t_task_sent - t_stage_start
#   scheduler_delay      = (t_exec_received - t_task_sent) +
#                          (t_driver_ack - t_result_ser_done)
#   task_overhead        = (t_deser_done - t_exec_received) +
#                          (t_result_ser_done - t_compute_done)
#   compute_time         = t_compute_done - t_deser_done
#   wait_until_stage_end = stage_end - t_driver_ack
#
# The five bins add up to stage_end - t_stage_start exactly, where stage_end
# is the last driver acknowledgement of the stage.
################################################################################

from collections import namedtuple
import csv
import io
import json

from skinny.errors import MetricsError


TaskRecord = namedtuple('TaskRecord',
                        ('stage_id', 'task_id', 'partition_id',
                         't_stage_start', 't_task_sent', 't_exec_received',
                         't_deser_done', 't_compute_done', 't_result_ser_done',
                         't_driver_ack', 'executor_id'),
                        defaults=(0,))

TIMESTAMP_FIELDS = ('t_stage_start', 't_task_sent', 't_exec_received',
                    't_deser_done', 't_compute_done', 't_result_ser_done',
                    't_driver_ack')

TaskBins = namedtuple('TaskBins',
                      ('task_start_delay', 'scheduler_delay', 'task_overhead',
                       'compute_time', 'wait_until_stage_end'))

BIN_NAMES = TaskBins._fields

CSV_COLUMNS = ('stage_id', 'stage_name', 'task_id', 'partition_id', 'executor_id') + BIN_NAMES


def bin_task(rec, stage_end):
    """Split one task's stage interval into the overhead bins."""
    names = TIMESTAMP_FIELDS + ('stage_end',)
    stamps = [getattr(rec, f) for f in TIMESTAMP_FIELDS] + [stage_end]
    for i in range(1, len(stamps)):
        if stamps[i] < stamps[i-1]:
            raise MetricsError(f'task {rec.task_id}: {names[i]} ({stamps[i]}) '
                               f'precedes {names[i-1]} ({stamps[i-1]})')
    return TaskBins(
        task_start_delay=rec.t_task_sent - rec.t_stage_start,
        scheduler_delay=((rec.t_exec_received - rec.t_task_sent) +
                         (rec.t_driver_ack - rec.t_result_ser_done)),
        task_overhead=((rec.t_deser_done - rec.t_exec_received) +
                       (rec.t_result_ser_done - rec.t_compute_done)),
        compute_time=rec.t_compute_done - rec.t_deser_done,
        wait_until_stage_end=stage_end - rec.t_driver_ack)


class StageMetrics(object):
    """Timing of one bulk-synchronous stage: one TaskRecord per partition."""
    def __init__(self, stage_id, name, matrix_id, t_stage_start, records,
                 stage_end=None, combine_ns=0):
        self._stage_id = stage_id
        self._name = name
        self._matrix_id = matrix_id
        self._t_stage_start = t_stage_start
        self._records = tuple(records)
        if stage_end is None:
            stage_end = max((r.t_driver_ack for r in self._records),
                            default=t_stage_start)
        self._stage_end = stage_end
        self._combine_ns = combine_ns
        self._bins = tuple(bin_task(r, stage_end) for r in self._records)

    @property
    def stage_id(self):
        return self._stage_id

    @property
    def name(self):
        return self._name

    @property
    def matrix_id(self):
        return self._matrix_id

    @property
    def t_stage_start(self):
        return self._t_stage_start

    @property
    def stage_end(self):
        return self._stage_end

    @property
    def wall_ns(self):
        return self._stage_end - self._t_stage_start

    @property
    def combine_ns(self):
        """Driver time spent in the tree combine after the last ack."""
        return self._combine_ns

    @property
    def records(self):
        return self._records

    @property
    def bins(self):
        """TaskBins per task, in record order."""
        return self._bins

    @property
    def num_tasks(self):
        return len(self._records)

    def bin_sums(self):
        """Sum of each bin over all tasks."""
        return TaskBins(*(sum(getattr(b, f) for b in self._bins) for f in BIN_NAMES))

    def average_bins(self):
        """Arithmetic mean of each bin over the tasks of the stage."""
        n = len(self._bins)
        if n == 0:
            return TaskBins(0., 0., 0., 0., 0.)
        return TaskBins(*(s / n for s in self.bin_sums()))

    def bin_summary(self):
        """min/mean/max of every bin, as a dict of dicts."""
        summary = {}
        for f in BIN_NAMES:
            values = [getattr(b, f) for b in self._bins]
            if values:
                summary[f] = {'min': min(values),
                              'mean': sum(values) / len(values),
                              'max': max(values)}
            else:
                summary[f] = {'min': 0, 'mean': 0., 'max': 0}
        return summary

    @property
    def max_task_start_delay(self):
        return max((b.task_start_delay for b in self._bins), default=0)

    def task_rows(self):
        """One dict per task: identifiers plus bins in ns."""
        rows = []
        for rec, bins in zip(self._records, self._bins):
            row = {'stage_id': self._stage_id,
                   'stage_name': self._name,
                   'task_id': rec.task_id,
                   'partition_id': rec.partition_id,
                   'executor_id': rec.executor_id}
            row.update(bins._asdict())
            rows.append(row)
        return rows

    def to_jsonl(self):
        """One JSON object per task, newline separated."""
        return ''.join(json.dumps(row) + '\n' for row in self.task_rows())

    def to_csv(self, header=True):
        fp = io.StringIO()
        csvw = csv.writer(fp, lineterminator='\n')
        if header:
            csvw.writerow(CSV_COLUMNS)
        for row in self.task_rows():
            csvw.writerow([row[c] for c in CSV_COLUMNS])
        return fp.getvalue()

    def __repr__(self):
        return (f'StageMetrics(stage_id={self._stage_id}, name={self._name!r}, '
                f'tasks={len(self._records)}, wall_ns={self.wall_ns})')


def write_stage_metrics(path, stages, fmt='jsonl'):
    """Write the per-task bins of several stages as JSON lines or CSV."""
    with open(path, 'w', newline='') as fp:
        if fmt == 'jsonl':
            for stage in stages:
                fp.write(stage.to_jsonl())
        elif fmt == 'csv':
            fp.write(','.join(CSV_COLUMNS) + '\n')
            for stage in stages:
                fp.write(stage.to_csv(header=False))
        else:
            raise ValueError(f'unknown metrics format {fmt!r}')
