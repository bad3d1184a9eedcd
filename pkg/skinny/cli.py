################################################################################
# skinny/cli.py
#
# This file is part of the skinny_factor software suite.
#
# It contains the batch command line: argument parsing, runtime
# configuration, and one handler per sub-command (pca, svd, nmf, cx, bench,
# convert).
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
# Exit codes: 0 success, 1 runtime error, 2 usage error.
#
# Output files go to --output-dir (default: the directory of the input) and
# are named after the input file's stem:
#
#   pca, svd   <stem>.U.tsma <stem>.S.tsma <stem>.V.tsma <stem>.iters.jsonl
#   nmf        <stem>.W.tsma <stem>.H.tsma <stem>.K.json
#   cx         <stem>.C.tsma <stem>.X.tsma <stem>.cx.json
#
# plus the run report, <stem>.<verb>.report.json (or .csv) unless
# --report-out names another path.
################################################################################

import argparse
import json
import logging
import os
import sys

from skinny import log
from skinny.config import DEFAULT_SEED, DelaySpec, RunConfig, read_config_file
from skinny.errors import ConfigError, SkinnyError, UsageError
from skinny.factor import cx, factor_arrays, get_factorization, write_eigen_log
from skinny.factor.cx import DEFAULT_POWER_ITERS, DEFAULT_SLACK
from skinny.factor.nmf import DEFAULT_NEGATIVE_EPSILON
from skinny.kernels import multiply_gramian
from skinny.linalg import thin_qr
from skinny.matrix_io import (load_partitioned,
                              read_csv,
                              read_matrix,
                              write_csv,
                              write_matrix)
from skinny.report import (RunReport,
                           format_reference_arithmetic,
                           predict_scheduler_delay,
                           write_report)
from skinny.runtime import clock, create_context, write_stage_metrics
from skinny.version import VERSION


PROG = 'skinny_factor'

_logger = logging.getLogger('sf.cli')


### Argument types

def _positive_int(s):
    try:
        value = int(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f'invalid integer {s!r}')
    if value < 1:
        raise argparse.ArgumentTypeError(f'must be >= 1, got {value}')
    return value


def _nonnegative_int(s):
    try:
        value = int(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f'invalid integer {s!r}')
    if value < 0:
        raise argparse.ArgumentTypeError(f'must be >= 0, got {value}')
    return value


def _seed(s):
    try:
        value = int(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f'invalid seed {s!r}')
    if not (0 <= value < 2**64):
        raise argparse.ArgumentTypeError(f'must be an unsigned 64-bit integer, got {value}')
    return value


def _positive_float(s):
    try:
        value = float(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f'invalid number {s!r}')
    if not value > 0:
        raise argparse.ArgumentTypeError(f'must be > 0, got {value}')
    return value


def _nonnegative_float(s):
    try:
        value = float(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f'invalid number {s!r}')
    if not value >= 0:
        raise argparse.ArgumentTypeError(f'must be >= 0, got {value}')
    return value


def _straggler(s):
    """SECONDS or SECONDS:PROBABILITY"""
    seconds, _, prob = s.partition(':')
    seconds = _nonnegative_float(seconds)
    if not prob:
        return seconds, None
    try:
        prob = float(prob)
    except ValueError:
        raise argparse.ArgumentTypeError(f'invalid probability {prob!r}')
    if not (0 <= prob <= 1):
        raise argparse.ArgumentTypeError(f'probability must be in [0, 1], got {prob}')
    return seconds, prob


### Parser

class _ArgumentParser(argparse.ArgumentParser):
    """Raise UsageError instead of exiting, so run_command can return 2."""
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f'{self.prog}: error: {message}')


def _common_parser():
    common = _ArgumentParser(add_help=False)
    group = common.add_argument_group('runtime')
    group.add_argument('--partitions', type=_positive_int, default=None,
                       help='Number of row blocks (default: total task slots)')
    group.add_argument('--executors', type=_positive_int, default=None,
                       help='Number of executors (default 1)')
    group.add_argument('--slots', type=_positive_int, default=None,
                       help='Task slots per executor (default 1)')
    group.add_argument('--tree-fanout', type=int, default=None,
                       help='Fan-out of the combine tree (default 2)')
    group.add_argument('--seed', type=_seed, default=None,
                       help=f'Seed for all randomness (default {DEFAULT_SEED})')
    group.add_argument('--tasks-per-second', type=_positive_float, default=None,
                       help='Driver dispatch rate limit (default unthrottled)')
    group = common.add_argument_group('output')
    group.add_argument('--output-dir', metavar='DIR', default=None,
                       help='Directory for factor files (default: next to the input)')
    group.add_argument('--report-out', metavar='FILENAME', default=None,
                       help='Run report path (default <stem>.<verb>.report.<format>)')
    group.add_argument('--format', choices=('json', 'csv'), default='json',
                       help='Run report format')
    group.add_argument('--task-metrics', metavar='FILENAME', default=None,
                       help='Also write the bins of every task (.csv, else JSON lines)')
    log.add_arguments(common, None, None)
    return common


def build_parser():
    common = _common_parser()
    parser = _ArgumentParser(prog=PROG, description='Factorizations of tall and '
                             'skinny matrices on a driver/executor runtime')
    parser.add_argument('--version', action='version', version=f'{PROG} {VERSION}')
    sub = parser.add_subparsers(dest='verb', metavar='COMMAND',
                                parser_class=_ArgumentParser)
    sub.required = True

    for verb, center in (('pca', True), ('svd', False)):
        p = sub.add_parser(verb, parents=[common],
                           help=('Principal components (columns centered)' if center
                                 else 'Truncated SVD (no centering)'))
        p.add_argument('--input', required=True, help='Input matrix (.tsma or .csv)')
        p.add_argument('--k', type=_positive_int, required=True, help='Rank')
        p.add_argument('--tol', type=_positive_float, default=1e-8,
                       help='Eigensolver tolerance relative to the top eigenvalue')
        p.add_argument('--max-iters', type=_positive_int, default=300,
                       help='Maximum number of Gramian stages')
        p.add_argument('--fixed-iterations', action='store_true', default=False,
                       help='Run exactly --max-iters Gramian stages')
        p.add_argument('--center', action=argparse.BooleanOptionalAction,
                       default=center, help='Remove column means')

    p = sub.add_parser('nmf', parents=[common], help='Separable NMF (Xray on TSQR)')
    p.add_argument('--input', required=True, help='Input matrix (.tsma or .csv)')
    p.add_argument('--k', type=_positive_int, required=True, help='Rank')
    p.add_argument('--negative-epsilon', type=_nonnegative_float,
                   default=DEFAULT_NEGATIVE_EPSILON,
                   help='Negative entries above -EPS are read as zero')

    p = sub.add_parser('cx', parents=[common], help='CX decomposition')
    p.add_argument('--input', required=True, help='Input matrix (.tsma or .csv)')
    p.add_argument('--k', type=_positive_int, required=True,
                   help='Rank and number of sampled columns')
    p.add_argument('--slack', type=_nonnegative_int, default=DEFAULT_SLACK,
                   help='Oversampling of the randomized SVD')
    p.add_argument('--power-iters', type=_positive_int, default=DEFAULT_POWER_ITERS,
                   help='Power iterations of the randomized SVD')

    p = sub.add_parser('bench', parents=[common],
                       help='Measure runtime overheads of one factorization')
    p.add_argument('--algo', choices=('pca', 'svd', 'nmf', 'cx', 'gram'),
                   default='gram', help='What to run (gram: repeated Gramian stages)')
    p.add_argument('--input', default=None,
                   help='Input matrix (default: random nonnegative --rows x --cols)')
    p.add_argument('--rows', type=_positive_int, default=10000)
    p.add_argument('--cols', type=_positive_int, default=16)
    p.add_argument('--k', type=_positive_int, default=5, help='Rank')
    p.add_argument('--iterations', type=_positive_int, default=70,
                   help='Gramian stages for gram, pca and svd')
    p.add_argument('--inject-straggler', type=_straggler, metavar='SECONDS[:PROB]',
                   default=None,
                   help='Straggler sleep; one per stage, or each task with PROB')
    p.add_argument('--inject-dispatch-latency', type=_nonnegative_float,
                   metavar='SECONDS', default=None,
                   help='Latency added to every driver->executor message')
    p.add_argument('--paper', action='store_true', default=False,
                   help='Print the reference scheduling, efficiency and gap arithmetic')

    p = sub.add_parser('convert', parents=[common], help='Convert csv <-> tsma')
    p.add_argument('--input', required=True, help='Source (.csv or .tsma)')
    p.add_argument('--output', required=True, help='Destination (.tsma or .csv)')
    p.add_argument('--delimiter', default=',', help='CSV delimiter')

    return parser


### Configuration

def build_config(args):
    """RunConfig from the INI defaults overridden by explicit flags."""
    defaults = read_config_file(args.config_file)

    def pick(name, value, default):
        if value is not None:
            return value
        return defaults.get(name, default)

    executors = pick('executors', args.executors, 1)
    slots = pick('slots_per_executor', args.slots, 1)
    straggler = getattr(args, 'inject_straggler', None)
    latency = getattr(args, 'inject_dispatch_latency', None)
    if straggler is not None:
        straggler_seconds, straggler_probability = straggler
    else:
        straggler_seconds = defaults.get('straggler_seconds', 0.)
        straggler_probability = defaults.get('straggler_probability')
    delays = DelaySpec(pick('dispatch_latency', latency, 0.),
                       straggler_seconds, straggler_probability)

    config = RunConfig(executors=executors,
                       slots_per_executor=slots,
                       partitions=pick('partitions', args.partitions, executors * slots),
                       tree_fanout=pick('tree_fanout', args.tree_fanout, 2),
                       seed=pick('seed', args.seed, DEFAULT_SEED),
                       tasks_per_second=pick('tasks_per_second', args.tasks_per_second,
                                             None),
                       delay_injection=delays if delays.enabled else None)
    return config.validate()


### Helpers

def _load_input(ctx, path):
    if path.lower().endswith('.csv'):
        return ctx.partition(read_csv(path))
    return load_partitioned(ctx, path)


def _output_stem(args):
    directory = args.output_dir
    if directory is None:
        directory = os.path.dirname(os.path.abspath(args.input))
    os.makedirs(directory, exist_ok=True)
    stem = os.path.splitext(os.path.basename(args.input))[0]
    return os.path.join(directory, stem)


def _write_factors(stem, result):
    for name, M in factor_arrays(result).items():
        write_matrix(f'{stem}.{name}.tsma', M)


def _write_json(path, obj):
    with open(path, 'w') as fp:
        json.dump(obj, fp, sort_keys=True, indent=4)
        fp.write('\n')


def _make_report(args, algo, A, ctx, wall, extra=None):
    if args.task_metrics is not None:
        fmt = 'csv' if args.task_metrics.lower().endswith('.csv') else 'jsonl'
        write_stage_metrics(args.task_metrics, ctx.stage_log, fmt)
        _logger.info(f'wrote per-task metrics {args.task_metrics}')
    return RunReport.from_context(algo, A.shape, ctx, wall, extra=extra)


def _finish_report(args, report, stem):
    path = args.report_out
    if path is None:
        path = f'{stem}.{args.verb}.report.{args.format}'
    write_report(path, report, args.format)
    _logger.info(f'wrote report {path}')


### Sub-commands

def _run_spectral(args, config):
    factor = get_factorization('pca')
    with create_context(config) as ctx:
        A = _load_input(ctx, args.input)
        t0 = clock()
        result = factor(A, args.k, center=args.center, tol=args.tol,
                        max_iters=args.max_iters,
                        fixed_iterations=args.fixed_iterations)
        wall = (clock() - t0) / 1e9
        stem = _output_stem(args)
        _write_factors(stem, result)
        write_eigen_log(f'{stem}.iters.jsonl', result.eigen_log)
        report = _make_report(args, args.verb, A, ctx, wall, extra={
            'k': args.k,
            'centered': result.centered,
            'iterations_used': result.iterations_used,
            'residual': result.residual
        })
    _finish_report(args, report, stem)
    return 0


def _run_nmf(args, config):
    factor = get_factorization('nmf')
    with create_context(config) as ctx:
        A = _load_input(ctx, args.input)
        t0 = clock()
        result = factor(A, args.k, epsilon=args.negative_epsilon)
        wall = (clock() - t0) / 1e9
        stem = _output_stem(args)
        _write_factors(stem, result)
        _write_json(f'{stem}.K.json', [int(j) for j in result.selected])
        report = _make_report(args, 'nmf', A, ctx, wall, extra={
            'k': args.k,
            'residual': result.residual,
            'relative_residual': result.relative_residual
        })
    _finish_report(args, report, stem)
    return 0


def _run_cx(args, config):
    with create_context(config) as ctx:
        A = _load_input(ctx, args.input)
        t0 = clock()
        result = cx(A, args.k, slack=args.slack, q=args.power_iters, seed=config.seed)
        wall = (clock() - t0) / 1e9
        stem = _output_stem(args)
        _write_factors(stem, result)
        _write_json(f'{stem}.cx.json', {
            'indices': result.indices.tolist(),
            'leverage': result.leverage.tolist(),
            'probabilities': result.probabilities.tolist(),
            'seed': result.seed,
            'residual': result.residual,
            'relative_residual': result.relative_residual
        })
        report = _make_report(args, 'cx', A, ctx, wall, extra={
            'k': args.k,
            'slack': args.slack,
            'power_iters': args.power_iters
        })
    _finish_report(args, report, stem)
    return 0


def _bench_gram(ctx, A, args):
    B = ctx.generator(4).standard_normal((A.cols, args.k))
    for _ in range(args.iterations):
        B, _ = thin_qr(multiply_gramian(A, B))


def _run_bench(args, config):
    if args.paper:
        sys.stdout.write(format_reference_arithmetic())
        return 0

    with create_context(config) as ctx:
        if args.input is not None:
            A = _load_input(ctx, args.input)
            stem = _output_stem(args)
        else:
            A = ctx.partition(ctx.generator(5).random((args.rows, args.cols)))
        t0 = clock()
        if args.algo == 'gram':
            _bench_gram(ctx, A, args)
        elif args.algo in ('pca', 'svd'):
            get_factorization(args.algo)(A, args.k, max_iters=args.iterations,
                                         fixed_iterations=True)
        elif args.algo == 'nmf':
            get_factorization('nmf')(A, args.k)
        else:
            cx(A, args.k, seed=config.seed)
        wall = (clock() - t0) / 1e9
        report = _make_report(args, f'bench-{args.algo}', A, ctx, wall)

    stages = report.stages
    tasks = sum(s['num_tasks'] for s in stages)
    out = sys.stdout
    out.write(f'{args.algo}: {A.shape[0]}x{A.shape[1]}, {A.num_partitions} partitions, '
              f'{config.slots} slots, {len(stages)} stages, {tasks} tasks, '
              f'{wall:.3f} s\n')
    out.write('sum over stages of the average task (ms):\n')
    for name, ns in report.summed_bins().items():
        out.write(f'  {name:<22} {ns / 1e6:12.3f}\n')
    out.write(f'measured task start delay: {report.measured_start_delay() / 1e9:.3f} s\n')
    if config.tasks_per_second:
        predicted = predict_scheduler_delay(A.num_partitions, len(stages),
                                            config.tasks_per_second)
        out.write(f'predicted scheduler delay at {config.tasks_per_second:g} '
                  f'tasks/s: {predicted:.3f} s\n')
    if args.report_out is not None:
        write_report(args.report_out, report, args.format)
    elif args.input is not None:
        _finish_report(args, report, stem)
    return 0


def _run_convert(args, config):
    src = args.input.lower()
    dst = args.output.lower()
    if src.endswith('.csv') and dst.endswith('.tsma'):
        write_matrix(args.output, read_csv(args.input, args.delimiter))
    elif src.endswith('.tsma') and dst.endswith('.csv'):
        write_csv(args.output, read_matrix(args.input), args.delimiter)
    else:
        raise UsageError('convert needs a .csv input and .tsma output or the '
                         'reverse')
    _logger.info(f'converted {args.input} to {args.output}')
    return 0


_HANDLERS = {
    'pca': _run_spectral,
    'svd': _run_spectral,
    'nmf': _run_nmf,
    'cx': _run_cx,
    'bench': _run_bench,
    'convert': _run_convert
}


def run_command(argv):
    """Run one sub-command. Returns the process exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as err:
        print(err, file=sys.stderr)
        return 2
    except SystemExit as ex:
        # --help and --version
        return ex.code if isinstance(ex.code, int) else 0

    log.setup_logging(args.console_log_level, args.logfile_log_level, args.logfile,
                      args.log_area)
    log.set_console_format(False)
    _logger.info(f'{PROG} {VERSION}: {" ".join(argv)}')

    try:
        config = build_config(args)
        _logger.debug(f'{config!r}')
        return _HANDLERS[args.verb](args, config)
    except (UsageError, ConfigError) as err:
        _logger.info(f'usage error: {err}')
        print(f'{PROG}: error: {err}', file=sys.stderr)
        return 2
    except (SkinnyError, OSError) as err:
        _logger.info(f'failed: {err}')
        print(f'{PROG}: error: {err}', file=sys.stderr)
        return 1
