# -*- coding: utf-8 -*-
#
# extrapolab: extrapolab/command_line/__init__.py
#
# Copyright (c) 2026, extrapolab developers
# All rights reserved.

import dataclasses
import logging
import os
import sys
import typing

import click
import click_log
import pandas

from tqdm import tqdm

from .dict_decoders import ExperimentConfigDictDecoder
from .dict_encoders import ErrorDictEncoder, RunKeyDictEncoder, SweepRowDictEncoder, TimingDictEncoder
from .dict_pipe import RowPipe

from ..exceptions import ConfigurationError, CustomException, InvalidParamsError
from ..experiments import DATA_STREAM_, EVAL_STREAM_, STUDENT_STREAM_, TEACHER_KINDS_, ExperimentConfig, RunOutcome, TeacherSettings, build_teacher, default_jobs, derive_seed, fit_gru, fit_linear, gru_sweep_specs, init_scale_specs, load_system, run_sweep, sweep_k_specs, sweep_statistics, system_document
from ..file_ops import read_json, to_csv, to_json, to_jsonl, write_csv, write_json, write_jsonl, write_text_atomic
from ..gru import GruParams, gru_impulse_response
from ..lds import ImpulseResponse, LinearRnnParams, impulse_response_padded
from ..losses import make_dataset
from ..moments import AtomicDistribution, MomentVector, balanced_dist, construct_moment_confounders, moments, recover_atomic, recover_atomic_auto, verify_extrapolation, wasserstein_1_cdf, wasserstein_p
from ..optim import LossKind
from ..teachers import gen_gru_teacher
from ..version import __version__

logger = logging.getLogger('extrapolab')
logger.setLevel(logging.INFO)

click_log.basic_config(logger)

LOG_LEVELS_ = {
    'error': logging.ERROR,
    'info': logging.INFO,
    'debug': logging.DEBUG,
}
"""Accepted values of the EXTRAPOLAB_LOG environment variable."""

FORMATS_ = ('csv', 'json')


class NumericFailure(click.ClickException):
    """A numeric operation failed; exits with status 2 and names the error."""

    exit_code = 2

    def __init__(self, exception: CustomException) -> None:
        super(NumericFailure, self).__init__('{0}: {1}'.format(type(exception).__name__, exception))

        self.exception = exception


def click_exception_(exception: CustomException) -> click.ClickException:
    if isinstance(exception, ConfigurationError):
        return click.ClickException(str(exception))
    else:
        return NumericFailure(exception)


class ExtrapolabGroup(click.Group):
    """Click group that exits 1 on usage errors (click's default is 2)."""

    def main(self, args: typing.Optional[typing.Sequence[str]] = None, prog_name: typing.Optional[str] = None, complete_var: typing.Optional[str] = None, standalone_mode: bool = True, **extra: typing.Any) -> typing.Any:
        try:
            rv = super(ExtrapolabGroup, self).main(args=args, prog_name=prog_name, complete_var=complete_var, standalone_mode=False, **extra)
        except click.ClickException as exception:
            if not standalone_mode:
                raise

            if isinstance(exception, click.UsageError):
                exception.exit_code = 1

            exception.show()
            sys.exit(exception.exit_code)
        except click.Abort:
            if not standalone_mode:
                raise

            click.echo('Aborted!', err=True)
            sys.exit(1)

        if standalone_mode and isinstance(rv, int) and rv != 0:
            sys.exit(rv)

        return rv


def configure_logging_() -> None:
    value = os.environ.get('EXTRAPOLAB_LOG', 'info').strip().lower()

    if value in LOG_LEVELS_:
        logger.setLevel(LOG_LEVELS_[value])
    else:
        logger.setLevel(logging.INFO)
        logger.warning('[cli] Unknown EXTRAPOLAB_LOG value {0!r}, using info'.format(value))


def read_json_(path: str) -> typing.Any:
    try:
        return read_json(path)
    except ValueError as exception:
        raise click.ClickException('{0} is not valid JSON: {1}'.format(path, exception))


def read_config_(path: str, required: typing.Sequence[str] = ('teacher', 'student', 'sweep')) -> typing.Tuple[ExperimentConfig, typing.Dict[str, typing.Any]]:
    obj = read_json_(path)

    try:
        decoder = ExperimentConfigDictDecoder(required=required)
        return decoder.decode(obj), obj
    except CustomException as exception:
        raise click_exception_(exception)


def read_linear_(path: str) -> LinearRnnParams:
    system = load_system(read_json_(path))
    if not isinstance(system, LinearRnnParams):
        raise InvalidParamsError('extrapolab.command_line - {0} holds a GRU, a linear system is required'.format(path))

    return system


def emit_(out: typing.Optional[str], filename: str, text: str) -> None:
    """Write ``text`` to ``out/filename``, or to standard output when no directory is given."""
    if out is None:
        click.echo(text, nl=False)
    else:
        write_text_atomic(os.path.join(out, filename), text)


def emit_table_(out: typing.Optional[str], stem: str, fmt: str, obj: typing.Dict[str, typing.Any], data_frame: typing.Callable[[], pandas.DataFrame]) -> None:
    """Emit ``obj`` as stem.json, or the table built by ``data_frame`` as stem.csv."""
    if 'json' == fmt:
        emit_(out, '{0}.json'.format(stem), to_json(obj))
    else:
        emit_(out, '{0}.csv'.format(stem), to_csv(data_frame()))


def distribution_frame_(**dists: AtomicDistribution) -> pandas.DataFrame:
    frames = [pandas.DataFrame({'distribution': name, 'atom': dist.atoms, 'weight': dist.weights}) for (name, dist) in dists.items()]
    data_frame = pandas.concat(frames, ignore_index=True)

    return data_frame if len(dists) > 1 else data_frame.drop(columns='distribution')


def finite_or_none_(values: typing.Iterable[float]) -> typing.List[typing.Optional[float]]:
    return [float(value) if pandas.notna(value) and abs(value) != float('inf') else None for value in values]


@click.group(cls=ExtrapolabGroup, context_settings=dict(help_option_names=['-h', '--help']))
@click.pass_context
@click.version_option(__version__)
def cli(ctx: click.Context) -> None:
    """Teacher-student extrapolation laboratory for linear recurrent networks.

    Generates teachers, trains overparameterized students on the first k
    entries of a teacher's impulse response, and measures how far beyond k
    the students extrapolate. Sweeps over k and over the initialization scale
    reproduce the extrapolation phase transition; the moment tools recover
    and compare the atomic distributions behind balanced systems.

    Log verbosity on standard error is set by EXTRAPOLAB_LOG (error, info or
    debug; default info). Exit status is 0 on success, 1 on usage or
    configuration errors and 2 on numeric failures.
    """

    configure_logging_()


@cli.command('gen-teacher', short_help='generate a teacher system')
@click.option('--kind', type=click.Choice(TEACHER_KINDS_, case_sensitive=True), default='balanced', show_default=True, help='the teacher family')
@click.option('--dh', type=click.IntRange(1, None), required=True, help='the teacher state dimension')
@click.option('--seed', type=click.INT, default=0, show_default=True, help='the random seed (ignored by the delay teacher)')
@click.option('--target', type=click.Path(exists=True, dir_okay=False), default=None, help='GRU only: JSON list (or {"values": [...]}) of the impulse response to fit; default 0.8^j cos(0.7 j), j < 20')
@click.option('--out', type=click.Path(file_okay=False), default=None, help='the output directory (teacher.json); standard output if omitted')
@click.pass_context
def run_gen_teacher(ctx: click.Context, kind: str, dh: int, seed: int, target: typing.Optional[str], out: typing.Optional[str]) -> None:
    """The \033[1mgen-teacher\033[0m command writes a teacher as a system document.

    \033[1mbalanced\033[0m\t\tdiagonal, eigenvalues uniform on [0.6, 1.05], B = C with unit norm.

    \033[1mdelay\033[0m\t\t\tdelay line; the impulse response is 1 at index dh - 1.

    \033[1mrandom_unbalanced\033[0m\tupper bidiagonal with the delay line's B and C.

    \033[1mgru\033[0m\t\t\ta GRU fitted to the \033[1m--target\033[0m impulse response.
    """

    try:
        if 'gru' == kind:
            target_ir = None
            if target is not None:
                obj = read_json_(target)
                target_ir = ImpulseResponse(obj['values'] if isinstance(obj, dict) else obj)

            fitted = gen_gru_teacher(dh, target_ir, seed)
            document = system_document(fitted.params, kind=kind, dh=dh, seed=seed, fit_error=fitted.fit_error)
        else:
            document = system_document(build_teacher(TeacherSettings(kind=kind, dh=dh), seed), kind=kind, dh=dh, seed=seed)
    except (KeyError, TypeError) as exception:
        raise click.ClickException('{0} is not an impulse response document: {1}'.format(target, exception))
    except CustomException as exception:
        raise click_exception_(exception)

    emit_(out, 'teacher.json', to_json(document))

    # Done!
    return


@cli.command('impulse', short_help='export impulse responses for plotting')
@click.argument('teacher', type=click.Path(exists=True, dir_okay=False))
@click.option('--student', type=click.Path(exists=True, dir_okay=False), default=None, help='a student system document to export alongside the teacher')
@click.option('--n', type=click.IntRange(1, None), default=200, show_default=True, help='the horizon')
@click.option('--format', 'fmt', type=click.Choice(FORMATS_, case_sensitive=True), default='csv', show_default=True, help='the output format')
@click.option('--out', type=click.Path(file_okay=False), default=None, help='the output directory (impulse.csv or impulse.json); standard output if omitted')
@click.pass_context
def run_impulse(ctx: click.Context, teacher: str, student: typing.Optional[str], n: int, fmt: str, out: typing.Optional[str]) -> None:
    """The \033[1mimpulse\033[0m command writes the first n impulse-response entries of a teacher (and optionally a student).

    Entries of a linear system that overflow are written as empty cells (CSV) or null (JSON).
    """

    def response(path: str) -> typing.List[float]:
        system = load_system(read_json_(path))
        if isinstance(system, GruParams):
            return gru_impulse_response(system, n).tolist()
        else:
            return impulse_response_padded(system, n).tolist()

    try:
        columns = {'teacher': response(teacher)}
        if student is not None:
            columns['student'] = response(student)
    except CustomException as exception:
        raise click_exception_(exception)

    if 'json' == fmt:
        obj = {'n': n}
        obj.update({name: finite_or_none_(values) for (name, values) in columns.items()})

        emit_(out, 'impulse.json', to_json(obj))
    else:
        data_frame = pandas.DataFrame({'j': range(n)})
        for (name, values) in columns.items():
            data_frame[name] = finite_or_none_(values)

        emit_(out, 'impulse.csv', to_csv(data_frame))

    # Done!
    return


@cli.command('train', short_help='train one student against a teacher')
@click.option('--config', 'config_path', type=click.Path(exists=True, dir_okay=False), required=True, help='the configuration file (student and optimizer blocks, optional train block)')
@click.option('--teacher', type=click.Path(exists=True, dir_okay=False), required=True, help='the teacher system document')
@click.option('--k', type=click.IntRange(1, None), default=None, help='the training length (overrides train.k)')
@click.option('--seed', type=click.INT, default=None, help='the seed (overrides train.seed)')
@click.option('--format', 'fmt', type=click.Choice(FORMATS_, case_sensitive=True), default='json', show_default=True, help='the trajectory format (JSON lines or CSV)')
@click.option('--out', type=click.Path(file_okay=False), default=None, help='the output directory (result.json, student.json, trajectory.jsonl or trajectory.csv); result only to standard output if omitted')
@click.pass_context
def run_train(ctx: click.Context, config_path: str, teacher: str, k: typing.Optional[int], seed: typing.Optional[int], fmt: str, out: typing.Optional[str]) -> None:
    """The \033[1mtrain\033[0m command trains one student and reports its final loss and extrapolation error.

    Linear teachers are fitted with the configured objective (population, accumulating or empirical); GRU teachers train a GRU student on last-step labels.
    """

    config, obj = read_config_(config_path, required=('student', ))

    try:
        settings = ExperimentConfigDictDecoder(required=('student', )).decode_train(obj)
    except CustomException as exception:
        raise click_exception_(exception)

    k = settings.k if k is None else k
    seed = settings.seed if seed is None else seed

    if k is None:
        raise click.UsageError('Missing training length: pass --k or set train.k')

    try:
        system = load_system(read_json_(teacher))

        with tqdm(total=config.optimizer.max_steps, desc='train', leave=False, disable=None) as bar:
            progress = lambda step: bar.update(1)

            if isinstance(system, GruParams):
                trajectory, error, baseline = fit_gru(system, k, config, derive_seed(seed, STUDENT_STREAM_), derive_seed(seed, EVAL_STREAM_), progress=progress)
                non_extrapolating = bool(error > baseline)
            else:
                trajectory, extrapolation = fit_linear(system, k, config, derive_seed(seed, STUDENT_STREAM_), derive_seed(seed, DATA_STREAM_, k), progress=progress)
                error, baseline, non_extrapolating = extrapolation
    except CustomException as exception:
        raise click_exception_(exception)

    logger.info('[train] k={0}: {1} after {2} steps, loss {3!r}, extrapolation error {4!r}'.format(k, trajectory.stop_reason.value, trajectory.final_step, trajectory.final_loss, error))

    result = {
        'k': k,
        'seed': seed,
        'final_loss': trajectory.final_loss,
        'final_step': trajectory.final_step,
        'stop_reason': trajectory.stop_reason.value,
        'extrap_error': error,
        'baseline_error': baseline,
        'non_extrapolating': non_extrapolating,
        'config': config.to_dict(),
        'config_hash': config.config_hash(),
        'version': __version__,
    }

    emit_(out, 'result.json', to_json(result))

    if out is not None:
        write_json(os.path.join(out, 'student.json'), system_document(trajectory.final_theta, k=k, seed=seed))

        if 'json' == fmt:
            write_jsonl(os.path.join(out, 'trajectory.jsonl'), trajectory.to_dicts())
        else:
            write_csv(os.path.join(out, 'trajectory.csv'), pandas.DataFrame(trajectory.to_dicts()))

        # same seed as the training set
        if isinstance(system, LinearRnnParams) and (config.optimizer.loss_kind is LossKind.EMPIRICAL):
            data = make_dataset(system, k, config.optimizer.n_train, derive_seed(seed, DATA_STREAM_, k))

            if 'json' == fmt:
                write_json(os.path.join(out, 'dataset.json'), data.to_dict())
            else:
                write_csv(os.path.join(out, 'dataset.csv'), data.to_data_frame())

    # Done!
    return


def sweep_options_(f: typing.Callable) -> typing.Callable:
    f = click.option('--out', type=click.Path(file_okay=False), default=None, help='the output directory; the summary CSV goes to standard output if omitted')(f)
    f = click.option('--jobs', type=click.IntRange(1, None), default=default_jobs(), show_default=True, help='the number of worker processes')(f)
    f = click.option('--seed', type=click.INT, default=None, help='the master seed (overrides sweep.master_seed)')(f)
    f = click.option('--config', 'config_path', type=click.Path(exists=True, dir_okay=False), required=True, help='the configuration file')(f)

    return f


def load_sweep_config_(config_path: str, seed: typing.Optional[int], gru: bool) -> ExperimentConfig:
    config, _ = read_config_(config_path)

    if gru != (config.teacher.kind == 'gru'):
        raise click.ClickException('teacher kind {0!r} does not fit this command; use {1}'.format(config.teacher.kind, 'a linear sweep' if config.teacher.kind != 'gru' else 'gru-sweep'))

    if seed is not None:
        config = dataclasses.replace(config, sweep=dataclasses.replace(config.sweep, master_seed=seed))

    return config


def run_name_(outcome: RunOutcome, with_scale: bool) -> str:
    name = 'k{0:03d}_seed{1}'.format(outcome.k, outcome.seed)

    return 'scale{0:g}_{1}'.format(outcome.scale, name) if with_scale else name


def write_sweep_(tag: str, command: str, config: ExperimentConfig, outcomes: typing.List[RunOutcome], out: typing.Optional[str], with_scale: bool) -> None:
    """
    Write summary.csv, stats.csv, timings.csv, errors.csv (when a run failed),
    metadata.json and the per-run trajectories and students under ``out``.
    """
    encoder_key = RunKeyDictEncoder(with_scale=with_scale)

    summary, errors = RowPipe(encoder_key, SweepRowDictEncoder(with_balancedness=with_scale), ErrorDictEncoder()).run(outcomes)
    timings, _ = RowPipe(encoder_key, TimingDictEncoder(), ErrorDictEncoder()).run(outcomes)

    n_failed = len(errors)
    n_diverged = int(summary['diverged'].sum())
    logger.info('[{0}] Finished {1} run{2} ({3} diverged, {4} failed)'.format(tag, len(outcomes), '' if len(outcomes) == 1 else 's', n_diverged, n_failed))

    if out is None:
        click.echo(to_csv(summary), nl=False)
        return

    write_csv(os.path.join(out, 'summary.csv'), summary)
    write_csv(os.path.join(out, 'stats.csv'), sweep_statistics(summary, ['scale', 'k'] if with_scale else ['k']))
    write_csv(os.path.join(out, 'timings.csv'), timings)

    errors_path = os.path.join(out, 'errors.csv')
    if n_failed > 0:
        write_csv(errors_path, errors)
    elif os.path.exists(errors_path):
        os.remove(errors_path)

    write_json(os.path.join(out, 'metadata.json'), {
        'command': command,
        'version': __version__,
        'teacher': config.teacher.to_dict(),
        'student_d': config.student.d,
        'runs': len(outcomes),
        'failed': n_failed,
        'config': config.to_dict(),
        'config_hash': config.config_hash(),
    })

    for outcome in outcomes:
        name = run_name_(outcome, with_scale)

        if config.output.trajectories:
            write_text_atomic(os.path.join(out, 'trajectories', '{0}.jsonl'.format(name)), to_jsonl(outcome.records))

        if config.output.students and (outcome.student is not None):
            write_json(os.path.join(out, 'students', '{0}.json'.format(name)), outcome.student)

    return


@cli.command('sweep-k', short_help='sweep the training length k')
@sweep_options_
@click.pass_context
def run_sweep_k(ctx: click.Context, config_path: str, seed: typing.Optional[int], jobs: int, out: typing.Optional[str]) -> None:
    """The \033[1msweep-k\033[0m command trains one student per (k, seed) and records its extrapolation error.

    Each replicate seed fixes one teacher, shared by every k. The error is the largest tail gap on [k, max(4k, 200)); a run is non-extrapolating when that gap exceeds the all-zero student's. Per-k means and standard deviations go to stats.csv, with overflowed tails clipped to 1e100 and counted in n_overflow.
    """

    config = load_sweep_config_(config_path, seed, gru=False)

    outcomes = run_sweep(sweep_k_specs(config), jobs=jobs)

    write_sweep_('sweep-k', 'sweep-k', config, outcomes, out, with_scale=False)

    # Done!
    return


@cli.command('sweep-init-scale', short_help='sweep the initialization scale')
@sweep_options_
@click.pass_context
def run_sweep_init_scale(ctx: click.Context, config_path: str, seed: typing.Optional[int], jobs: int, out: typing.Optional[str]) -> None:
    """The \033[1msweep-init-scale\033[0m command repeats the k sweep for every initialization scale in sweep.scales.

    Rows additionally carry the scale and the minimum balancedness ratio ||B - C|| / ||B + C|| along the trajectory.
    """

    config = load_sweep_config_(config_path, seed, gru=False)

    outcomes = run_sweep(init_scale_specs(config), jobs=jobs)

    write_sweep_('sweep-init-scale', 'sweep-init-scale', config, outcomes, out, with_scale=True)

    # Done!
    return


@cli.command('gru-sweep', short_help='sweep the training length k for a GRU pair')
@sweep_options_
@click.pass_context
def run_gru_sweep(ctx: click.Context, config_path: str, seed: typing.Optional[int], jobs: int, out: typing.Optional[str]) -> None:
    """The \033[1mgru-sweep\033[0m command is \033[1msweep-k\033[0m for a GRU teacher and a GRU student.

    The error is the mean, over sweep.gru_eval_inputs Gaussian sequences, of the largest output gap past k.
    """

    config = load_sweep_config_(config_path, seed, gru=True)

    outcomes = run_sweep(gru_sweep_specs(config), jobs=jobs)

    write_sweep_('gru-sweep', 'gru-sweep', config, outcomes, out, with_scale=False)

    # Done!
    return


@cli.group('moments', short_help='moment tools for atomic distributions')
def moments_group() -> None:
    """Compute moments, recover atomic distributions from moments, and compare distributions."""


@moments_group.command('compute', short_help='moments of a distribution or balanced system')
@click.argument('source', type=click.Path(exists=True, dir_okay=False))
@click.option('--order', type=click.IntRange(1, None), default=10, show_default=True, help='the number of moments m_0, ..., m_{order-1}')
@click.option('--format', 'fmt', type=click.Choice(FORMATS_, case_sensitive=True), default='json', show_default=True, help='the output format (CSV columns: order, moment)')
@click.option('--out', type=click.Path(file_okay=False), default=None, help='the output directory (moments.json or moments.csv); standard output if omitted')
def run_moments_compute(source: str, order: int, fmt: str, out: typing.Optional[str]) -> None:
    """SOURCE is a distribution document ({"atoms", "weights"}) or a balanced linear system document."""

    obj = read_json_(source)

    try:
        if isinstance(obj, dict) and ('atoms' in obj):
            dist = AtomicDistribution.from_dict(obj)
        else:
            dist = balanced_dist(read_linear_(source))

        m = moments(dist, order)

        emit_table_(out, 'moments', fmt, m.to_dict(), lambda: pandas.DataFrame({'order': range(order), 'moment': m.values}))
    except CustomException as exception:
        raise click_exception_(exception)

    # Done!
    return


@moments_group.command('recover', short_help='recover an atomic distribution from moments')
@click.argument('source', type=click.Path(exists=True, dir_okay=False))
@click.option('--n', type=click.IntRange(1, None), default=None, help='the number of atoms; the smallest consistent number is found if omitted')
@click.option('--n-max', type=click.IntRange(1, None), default=None, help='the largest number of atoms tried when --n is omitted')
@click.option('--support', type=(float, float), default=None, help='the interval bracketing the atoms')
@click.option('--format', 'fmt', type=click.Choice(FORMATS_, case_sensitive=True), default='json', show_default=True, help='the output format (CSV columns: atom, weight)')
@click.option('--out', type=click.Path(file_okay=False), default=None, help='the output directory (distribution.json or distribution.csv); standard output if omitted')
def run_moments_recover(source: str, n: typing.Optional[int], n_max: typing.Optional[int], support: typing.Optional[typing.Tuple[float, float]], fmt: str, out: typing.Optional[str]) -> None:
    """SOURCE is a moments document ({"moments": [m_0, m_1, ...]})."""

    try:
        m = MomentVector.from_dict(read_json_(source))

        if n is None:
            dist = recover_atomic_auto(m, n_max=n_max, support=support)
        else:
            dist = recover_atomic(m, n, support=support)

        emit_table_(out, 'distribution', fmt, dist.to_dict(), lambda: distribution_frame_(recovered=dist))
    except CustomException as exception:
        raise click_exception_(exception)

    # Done!
    return


@moments_group.command('wasserstein', short_help='Wasserstein distances between two distributions')
@click.argument('first', type=click.Path(exists=True, dir_okay=False))
@click.argument('second', type=click.Path(exists=True, dir_okay=False))
@click.option('--p', type=click.FloatRange(1.0, None), default=1.0, show_default=True, help='the order of W_p')
@click.option('--format', 'fmt', type=click.Choice(FORMATS_, case_sensitive=True), default='json', show_default=True, help='the output format (CSV: one row p, w1, w1_cdf, wp)')
@click.option('--out', type=click.Path(file_okay=False), default=None, help='the output directory (wasserstein.json or wasserstein.csv); standard output if omitted')
def run_moments_wasserstein(first: str, second: str, p: float, fmt: str, out: typing.Optional[str]) -> None:
    """Writes W_1 by quantile coupling, W_1 by CDF area, and W_p."""

    try:
        d1 = AtomicDistribution.from_dict(read_json_(first))
        d2 = AtomicDistribution.from_dict(read_json_(second))

        distances = {
            'p': p,
            'w1': wasserstein_p(d1, d2, 1.0),
            'w1_cdf': wasserstein_1_cdf(d1, d2),
            'wp': wasserstein_p(d1, d2, p),
        }

        emit_table_(out, 'wasserstein', fmt, distances, lambda: pandas.DataFrame([distances]))
    except CustomException as exception:
        raise click_exception_(exception)

    # Done!
    return


@cli.command('confound', short_help='construct two distributions with matching low-order moments')
@click.option('--dh', type=click.IntRange(1, None), required=True, help='the number of atoms of each distribution')
@click.option('--seed', type=click.INT, default=0, show_default=True, help='the random seed of the search')
@click.option('--format', 'fmt', type=click.Choice(FORMATS_, case_sensitive=True), default='json', show_default=True, help='the output format (CSV columns: distribution, atom, weight)')
@click.option('--out', type=click.Path(file_okay=False), default=None, help='the output directory (confounders.json or confounders.csv); standard output if omitted')
@click.pass_context
def run_confound(ctx: click.Context, dh: int, seed: int, fmt: str, out: typing.Optional[str]) -> None:
    """The \033[1mconfound\033[0m command writes two dh-atomic distributions on [-1, 1] whose moments agree through order 2 dh - 2 and differ at order 2 dh - 1.

    Balanced teachers built from them share their first 2 dh - 1 impulse-response entries, so no training length below 2 dh tells them apart.
    """

    try:
        confounders = construct_moment_confounders(dh, seed)
    except CustomException as exception:
        raise click_exception_(exception)

    emit_table_(out, 'confounders', fmt, {
        'dh': dh,
        'seed': seed,
        'first': confounders.first.to_dict(),
        'second': confounders.second.to_dict(),
        'gap': confounders.gap,
        'moments_first': moments(confounders.first, 2 * dh).values.tolist(),
        'moments_second': moments(confounders.second, 2 * dh).values.tolist(),
    }, lambda: distribution_frame_(first=confounders.first, second=confounders.second))

    # Done!
    return


@cli.command('verify', short_help='check that a student extrapolates a teacher')
@click.argument('student', type=click.Path(exists=True, dir_okay=False))
@click.argument('teacher', type=click.Path(exists=True, dir_okay=False))
@click.option('--k', type=click.IntRange(0, None), required=True, help='the training length')
@click.option('--horizon', type=click.IntRange(1, None), default=200, show_default=True, help='the horizon of the comparison')
@click.option('--eps', type=click.FloatRange(0.0, None), default=1e-3, show_default=True, help='the largest tolerated impulse-response gap')
@click.option('--out', type=click.Path(file_okay=False), default=None, help='the output directory (report.json); standard output if omitted')
@click.pass_context
def run_verify(ctx: click.Context, student: str, teacher: str, k: int, horizon: int, eps: float, out: typing.Optional[str]) -> None:
    """The \033[1mverify\033[0m command compares two linear systems' impulse responses on [0, horizon).

    The report flags whether the first k entries match within eps and whether every entry does; for balanced systems it adds their distributions and the W_1 distance between them.
    """

    try:
        report = verify_extrapolation(read_linear_(student), read_linear_(teacher), k, horizon, eps)
    except CustomException as exception:
        raise click_exception_(exception)

    logger.info('[verify] first_k_match={0}, extrapolates={1}, max gap {2!r}'.format(report.first_k_match, report.extrapolates, report.max_gap))

    emit_(out, 'report.json', to_json(report.to_dict()))

    # Done!
    return
