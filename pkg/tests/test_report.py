################################################################################
# tests/test_report.py
#
# This file is part of the skinny_factor software suite.
#
# It contains tests of the run report and the performance arithmetic.
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

import json

import numpy as np
import pytest

from skinny.report import (REFERENCE_SCHEDULING,
                           RunReport,
                           emit_report,
                           format_ratio,
                           gap,
                           parallel_efficiency,
                           parse_report,
                           predict_scheduler_delay,
                           reference_arithmetic)
from skinny.runtime import BIN_NAMES


### Scheduler delay

@pytest.mark.parametrize('partitions,expected', [(3200, 112), (9600, 336),
                                                 (16000, 560), (51200, 1792)])
def test_predicted_delay_reference_values(partitions, expected):
    assert predict_scheduler_delay(partitions, 70, 2000) == expected


def test_predicted_delay_zero_partitions():
    assert predict_scheduler_delay(0, 70, 2000) == 0


def test_predicted_delay_is_linear():
    base = predict_scheduler_delay(1000, 10, 300)
    assert predict_scheduler_delay(2000, 10, 300) == 2 * base
    assert predict_scheduler_delay(1000, 20, 300) == 2 * base


def test_predicted_delay_bad_rate():
    with pytest.raises(ValueError):
        predict_scheduler_delay(10, 10, 0)


### Efficiency and gaps

def test_parallel_efficiency_reference():
    eff = parallel_efficiency([66, 45, 30], [50, 100, 300])
    assert eff[0] == 1.0
    assert eff[1] == pytest.approx(0.7333, abs=1e-4)
    assert eff[2] == pytest.approx(0.3667, abs=1e-4)


def test_parallel_efficiency_perfect_scaling():
    assert parallel_efficiency([80., 40., 20.], [1, 2, 4]) == [1.0, 1.0, 1.0]


def test_parallel_efficiency_single_point():
    assert parallel_efficiency([12.], [7]) == [1.0]


def test_parallel_efficiency_rejects_nonpositive():
    with pytest.raises(ValueError):
        parallel_efficiency([1., 0.], [1, 2])


def test_gap():
    assert gap(207, 45) == 4.6
    assert gap(70, 30) == pytest.approx(2.333, abs=1e-3)
    assert gap(3.5, 3.5) == 1.0
    with pytest.raises(ZeroDivisionError):
        gap(1, 0)


def test_format_ratio():
    assert format_ratio(207 / 45) == '4.6×'
    assert format_ratio(70 / 30) == '2.3×'
    assert format_ratio(22.) == '22×'


def test_reference_arithmetic():
    ref = reference_arithmetic()
    predicted = [d['predicted'] for d in ref['scheduler_delay']]
    assert predicted == [run.predicted for run in REFERENCE_SCHEDULING]
    nmf_eff = ref['efficiency']['nmf']['1.6TB']
    assert nmf_eff['mpi'][0] == 1.0
    assert nmf_eff['mpi'][1] == pytest.approx(0.7333, abs=1e-4)
    nmf_gaps = [g for g in ref['gaps'] if g['algo'] == 'nmf']
    assert nmf_gaps[1]['gap'] == 4.6
    assert nmf_gaps[1]['reported_with_io'] == 4.6


### Reports

def test_report_from_context_bins_match_stages(parallel_ctx):
    A = parallel_ctx.partition(np.ones((40, 3)), 8)
    parallel_ctx.execute_stage(A, lambda b: b.sum(axis=0), np.add, name='sum')
    parallel_ctx.execute_stage(A, lambda b: b.sum(), name='collect')
    report = RunReport.from_context('test', A.shape, parallel_ctx, 0.5)
    assert len(report.stages) == 2
    for stage, metrics in zip(report.stages, parallel_ctx.stage_log):
        sums = metrics.bin_sums()
        for b in BIN_NAMES:
            assert stage[f'sum_{b}'] == sum(getattr(x, b) for x in metrics.bins)
            assert stage[f'sum_{b}'] == getattr(sums, b)
    summed = report.summed_bins()
    expected = sum(m.average_bins().compute_time for m in parallel_ctx.stage_log)
    assert summed['compute_time'] == pytest.approx(expected)
    assert report.measured_start_delay() == sum(m.max_task_start_delay
                                                for m in parallel_ctx.stage_log)


def test_empty_report():
    report = RunReport('pca', (0, 0), {})
    doc = json.loads(emit_report(report))
    assert doc['summed_bins'] == {b: 0 for b in BIN_NAMES}
    assert doc['schema_version'] == 1


def test_json_roundtrip(parallel_ctx):
    A = parallel_ctx.partition(np.ones((10, 2)), 5)
    parallel_ctx.execute_stage(A, lambda b: b.sum())
    with parallel_ctx.phase('work'):
        pass
    report = RunReport.from_context('nmf', A.shape, parallel_ctx, 1.25,
                                    extra={'k': 2})
    assert parse_report(emit_report(report)) == report


def test_csv_one_row_per_stage(parallel_ctx):
    A = parallel_ctx.partition(np.ones((10, 2)), 5)
    for _ in range(3):
        parallel_ctx.execute_stage(A, lambda b: b.sum())
    report = RunReport.from_context('gram', A.shape, parallel_ctx, 0.1)
    text = emit_report(report, 'csv').decode()
    lines = text.splitlines()
    assert len(lines) == 4
    rows = parse_report(text, 'csv')
    assert [r['stage_id'] for r in rows] == [s['stage_id'] for s in report.stages]
    assert rows[0]['num_tasks'] == 5


def test_reference_efficiency_compares_one_problem_size():
    eff = reference_arithmetic()['efficiency']
    assert set(eff['pca']) == {'2.2TB'}
    pca = eff['pca']['2.2TB']
    assert pca['mpi_nodes'] == [100, 300, 500]
    assert len(pca['mpi']) == 3
    assert pca['mpi'][1] == pytest.approx(94 * 100 / (60 * 300))
    assert min(pca['mpi'] + pca['spark']) > 0.1


def test_reference_gaps_keep_the_large_run():
    gaps = reference_arithmetic()['gaps']
    large = [g for g in gaps if g['dataset'] == '16TB']
    assert len(large) == 1
    assert large[0]['gap'] == pytest.approx(4175 / 160)
