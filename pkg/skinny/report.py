################################################################################
# skinny/report.py
#
# This file is part of the skinny_factor software suite.
#
# It contains the run report (overhead bins summed over stages, phases and
# wall time), its JSON and CSV output, and the performance arithmetic used to
# compare frameworks: scheduler-delay prediction, parallel efficiency and
# framework gaps, together with the published reference measurements they
# are checked against.
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
import csv
import io
import json

import numpy as np

from skinny.runtime import BIN_NAMES
from skinny.version import VERSION


REPORT_SCHEMA_VERSION = 1

STAGE_COLUMNS = (('stage_id', 'name', 'num_tasks', 'wall_ns', 'combine_ns',
                  'max_task_start_delay') +
                 tuple(f'mean_{b}' for b in BIN_NAMES) +
                 tuple(f'sum_{b}' for b in BIN_NAMES))


### Performance arithmetic

def predict_scheduler_delay(partitions, iterations, rate):
    """Seconds a centralized scheduler needs to launch partitions tasks per
    iteration at rate tasks per second."""
    if rate <= 0:
        raise ValueError(f'scheduling rate must be > 0, got {rate}')
    return partitions * iterations / rate


def parallel_efficiency(times, nodes):
    """Efficiency of each run relative to the run at the smallest node count:
    E_i = (T_0 n_0) / (T_i n_i)."""
    times = list(times)
    nodes = list(nodes)
    if not times or len(times) != len(nodes):
        raise ValueError('times and nodes must be non-empty and of equal length')
    if any(t <= 0 for t in times):
        raise ValueError('times must be > 0')
    base = min(range(len(nodes)), key=lambda i: nodes[i])
    work = times[base] * nodes[base]
    return [work / (t * n) for t, n in zip(times, nodes)]


def gap(time_a, time_b):
    """How many times slower a is than b."""
    if time_b == 0:
        raise ZeroDivisionError('gap: reference time is zero')
    return time_a / time_b


def format_ratio(x):
    """Two significant figures and a times sign, e.g. 4.6x."""
    text = np.format_float_positional(x, precision=2, unique=False,
                                      fractional=False, trim='-')
    return f'{text}×'


### Reference measurements

WallTime = namedtuple('WallTime', ('algo', 'dataset', 'mpi_nodes', 'spark_nodes', 'mpi', 'spark'))
ReportedGap = namedtuple('ReportedGap', ('algo', 'nodes', 'with_io', 'without_io'))
SchedulingRun = namedtuple('SchedulingRun',
                           ('nodes', 'partitions', 'wall', 'measured', 'predicted'))

REFERENCE_WALL_TIMES = (
    WallTime('nmf', '1.6TB', 50, 50, 66, 278),
    WallTime('nmf', '1.6TB', 100, 100, 45, 207),
    WallTime('nmf', '1.6TB', 300, 300, 30, 70),
    WallTime('pca', '2.2TB', 100, 100, 94, 934),
    WallTime('pca', '2.2TB', 300, 300, 60, 827),
    WallTime('pca', '2.2TB', 500, 500, 56, 1160),
    WallTime('pca', '16TB', 1600, 1522, 160, 4175),
)

REFERENCE_GAPS = (
    ReportedGap('nmf', 50, 4.0, 21.2),
    ReportedGap('nmf', 100, 4.6, 14.9),
    ReportedGap('nmf', 300, 2.3, 15.7),
    ReportedGap('pca', 100, 10.2, 12.6),
    ReportedGap('pca', 300, 14.5, 24.7),
    ReportedGap('pca', 500, 22.0, 39.3),
    ReportedGap('pca', 1600, 26.0, 43.8),
)

REFERENCE_SCHEDULING = (
    SchedulingRun(100, 3200, 924, 411, 112),
    SchedulingRun(300, 9600, 827, 332, 336),
    SchedulingRun(500, 16000, 1160, 542, 560),
    SchedulingRun(1522, 51200, 3718, 1779, 1792),
)

REFERENCE_RATE = 2000
REFERENCE_ITERATIONS = 70


def reference_arithmetic():
    """Recompute the predicted delays, efficiencies and gaps from the
    reference measurements."""
    delays = []
    for run in REFERENCE_SCHEDULING:
        delays.append({
            'nodes': run.nodes,
            'partitions': run.partitions,
            'measured': run.measured,
            'predicted': predict_scheduler_delay(run.partitions, REFERENCE_ITERATIONS,
                                                 REFERENCE_RATE),
            'reported_prediction': run.predicted
        })

    # Efficiency only compares runs of the same problem; a dataset run at a
    # single scale has no series.
    efficiency = {}
    for algo, dataset in dict.fromkeys((w.algo, w.dataset) for w in REFERENCE_WALL_TIMES):
        rows = [w for w in REFERENCE_WALL_TIMES
                if w.algo == algo and w.dataset == dataset]
        if len(rows) < 2:
            continue
        efficiency.setdefault(algo, {})[dataset] = {
            'mpi_nodes': [w.mpi_nodes for w in rows],
            'mpi': parallel_efficiency([w.mpi for w in rows], [w.mpi_nodes for w in rows]),
            'spark_nodes': [w.spark_nodes for w in rows],
            'spark': parallel_efficiency([w.spark for w in rows],
                                         [w.spark_nodes for w in rows])
        }

    gaps = []
    for wall, reported in zip(REFERENCE_WALL_TIMES, REFERENCE_GAPS):
        ratio = gap(wall.spark, wall.mpi)
        gaps.append({
            'algo': wall.algo,
            'dataset': wall.dataset,
            'nodes': wall.mpi_nodes,
            'gap': ratio,
            'display': format_ratio(ratio),
            'reported_with_io': reported.with_io,
            'reported_without_io': reported.without_io
        })
    return {'scheduler_delay': delays, 'efficiency': efficiency, 'gaps': gaps}


def format_reference_arithmetic(ref=None):
    """Plain-text tables of reference_arithmetic()."""
    if ref is None:
        ref = reference_arithmetic()
    lines = [f'Scheduler delay at {REFERENCE_RATE} tasks/s over '
             f'{REFERENCE_ITERATIONS} iterations',
             f'{"nodes":>6} {"partitions":>10} {"measured":>9} {"predicted":>9}']
    for d in ref['scheduler_delay']:
        lines.append(f'{d["nodes"]:>6} {d["partitions"]:>10} {d["measured"]:>9} '
                     f'{d["predicted"]:>9g}')
    lines.append('')
    lines.append('Parallel efficiency (relative to the smallest node count)')
    for algo, by_dataset in ref['efficiency'].items():
        for dataset, eff in by_dataset.items():
            mpi = ' '.join(f'{e:.4f}' for e in eff['mpi'])
            spark = ' '.join(f'{e:.4f}' for e in eff['spark'])
            lines.append(f'{algo:>4} {dataset:>6} nodes {eff["mpi_nodes"]}: '
                         f'mpi {mpi}; spark {spark}')
    lines.append('')
    lines.append('Framework gap (spark / mpi wall time)')
    lines.append(f'{"algo":>4} {"data":>6} {"nodes":>6} {"gap":>9} {"display":>8} '
                 f'{"with io":>8} {"w/o io":>8}')
    for g in ref['gaps']:
        lines.append(f'{g["algo"]:>4} {g["dataset"]:>6} {g["nodes"]:>6} {g["gap"]:>9.4f} '
                     f'{g["display"]:>8} {g["reported_with_io"]:>8g} '
                     f'{g["reported_without_io"]:>8g}')
    return '\n'.join(lines) + '\n'


### Run report

def stage_summary(stage):
    """Plain dict for one StageMetrics."""
    summary = {
        'stage_id': stage.stage_id,
        'name': stage.name,
        'num_tasks': stage.num_tasks,
        'wall_ns': stage.wall_ns,
        'combine_ns': stage.combine_ns,
        'max_task_start_delay': stage.max_task_start_delay
    }
    mean = stage.average_bins()
    sums = stage.bin_sums()
    for b in BIN_NAMES:
        summary[f'mean_{b}'] = float(getattr(mean, b))
    for b in BIN_NAMES:
        summary[f'sum_{b}'] = int(getattr(sums, b))
    return summary


class RunReport(object):
    """Everything measured about one factorization or benchmark run.

    Times in stage summaries are in ns; wall_seconds and phases in s."""
    def __init__(self, algo, shape, config, stages=(), wall_seconds=0.,
                 phases=None, extra=None):
        self._algo = algo
        self._shape = tuple(int(x) for x in shape)
        self._config = dict(config)
        self._stages = [dict(s) for s in stages]
        self._wall_seconds = float(wall_seconds)
        self._phases = dict(phases or {})
        self._extra = dict(extra or {})

    @classmethod
    def from_context(cls, algo, shape, ctx, wall_seconds, extra=None):
        """Report on every stage ctx has run."""
        stages = [stage_summary(s) for s in ctx.stage_log]
        phases = {name: ns / 1e9 for name, ns in ctx.phases.items()}
        return cls(algo, shape, ctx.config.snapshot(), stages, wall_seconds,
                   phases, extra)

    @property
    def algo(self):
        return self._algo

    @property
    def shape(self):
        return self._shape

    @property
    def config(self):
        return dict(self._config)

    @property
    def stages(self):
        return [dict(s) for s in self._stages]

    @property
    def wall_seconds(self):
        return self._wall_seconds

    @property
    def phases(self):
        return dict(self._phases)

    @property
    def extra(self):
        return dict(self._extra)

    def summed_bins(self):
        """Per bin, the sum over stages of the average task's time (ns)."""
        return {b: sum(s[f'mean_{b}'] for s in self._stages) for b in BIN_NAMES}

    def measured_start_delay(self):
        """Sum over stages of the largest task start delay (ns)."""
        return sum(s['max_task_start_delay'] for s in self._stages)

    def to_dict(self):
        return {
            'schema_version': REPORT_SCHEMA_VERSION,
            'software_version': VERSION,
            'algo': self._algo,
            'shape': list(self._shape),
            'config': self._config,
            'wall_seconds': self._wall_seconds,
            'phases': self._phases,
            'summed_bins': self.summed_bins(),
            'measured_start_delay': self.measured_start_delay(),
            'stages': self._stages,
            'extra': self._extra
        }

    @classmethod
    def from_dict(cls, d):
        version = d.get('schema_version')
        if version != REPORT_SCHEMA_VERSION:
            raise ValueError(f'unsupported report schema version {version!r}')
        return cls(d['algo'], d['shape'], d['config'], d['stages'],
                   d['wall_seconds'], d['phases'], d.get('extra'))

    def __eq__(self, other):
        if not isinstance(other, RunReport):
            return NotImplemented
        return self.to_dict() == other.to_dict()

    def __repr__(self):
        return (f'RunReport(algo={self._algo!r}, shape={self._shape}, '
                f'stages={len(self._stages)}, wall_seconds={self._wall_seconds})')


def emit_report(report, fmt='json'):
    """Serialize a report: the full JSON document, or the per-stage CSV table."""
    if fmt == 'json':
        return (json.dumps(report.to_dict(), sort_keys=True, indent=4) + '\n').encode()
    if fmt == 'csv':
        fp = io.StringIO()
        csvw = csv.writer(fp, lineterminator='\n')
        csvw.writerow(STAGE_COLUMNS)
        for stage in report.stages:
            csvw.writerow([stage[c] for c in STAGE_COLUMNS])
        return fp.getvalue().encode()
    raise ValueError(f'unknown report format {fmt!r}')


def parse_report(data, fmt='json'):
    """Inverse of emit_report. JSON gives a RunReport; CSV gives the list of
    stage rows (numbers converted back)."""
    if isinstance(data, bytes):
        data = data.decode()
    if fmt == 'json':
        return RunReport.from_dict(json.loads(data))
    if fmt == 'csv':
        rows = []
        for row in csv.DictReader(io.StringIO(data)):
            parsed = {}
            for key, value in row.items():
                if key == 'name':
                    parsed[key] = value
                elif key.startswith('mean_'):
                    parsed[key] = float(value)
                else:
                    parsed[key] = int(value)
            rows.append(parsed)
        return rows
    raise ValueError(f'unknown report format {fmt!r}')


def write_report(path, report, fmt='json'):
    with open(path, 'wb') as fp:
        fp.write(emit_report(report, fmt))
