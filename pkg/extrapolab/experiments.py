# -*- coding: utf-8 -*-
#
# extrapolab: extrapolab/experiments.py
#
# Copyright (c) 2026, extrapolab developers
# All rights reserved.

"""
Sweep orchestration: experiment settings, per-run seeds, run execution and
the worker pool.

A sweep is a list of independent runs, one per (sweep point, seed). Every run
derives its seeds from the master seed with a splitmix64 counter scheme, so
results do not depend on which worker executes a run or in which order runs
finish; outcomes are sorted by (sweep point, seed) before anything is written.

Key Classes:
    TeacherSettings, StudentSettings, OptimizerSettings, SweepSettings, OutputSettings
    ExperimentConfig: all blocks together, with a canonical hash
    RunSpec / RunOutcome: one unit of work and its result

Key Functions:
    derive_seed(): splitmix64 seed derivation
    sweep_k_specs(), init_scale_specs(), gru_sweep_specs(): enumerate the runs of a sweep
    fit_linear(), fit_gru(): train one student and measure its extrapolation error
    system_document(), load_system(): JSON documents for linear and GRU systems
    execute_run(): run one unit of work (never raises)
    run_sweep(): execute specs on a worker pool
    sweep_statistics(): per-point mean and standard deviation
"""

import dataclasses
import hashlib
import json
import logging
import math
import multiprocessing
import os
import time
import typing

import numpy
import pandas

from tqdm import tqdm

from .exceptions import ConfigurationError, DegenerateTeacherError, InvalidParamsError
from .gru import GruParams, gru_extrapolation_error, gru_train
from .lds import ExtrapolationError, ImpulseResponse, LinearRnnParams, Structure, default_tail_window, extrapolation_error, impulse_response, impulse_response_padded
from .losses import make_dataset
from .optim import Init, InitKind, LossKind, Method, StopReason, TrainingConfig, TrainingTrajectory, train_from_config
from .teachers import gen_balanced_teacher, gen_delay_teacher, gen_gru_teacher, gen_random_unbalanced_teacher

logger = logging.getLogger(__name__)

MASK64_ = (1 << 64) - 1

SPLITMIX_GAMMA_ = 0x9E3779B97F4A7C15
"""Golden-ratio increment of the splitmix64 generator."""

TEACHER_STREAM_ = 0
STUDENT_STREAM_ = 1
DATA_STREAM_ = 2
EVAL_STREAM_ = 3
"""First counter of :func:`derive_seed`, one per consumer of randomness."""

GRU_TEACHER_ATTEMPTS_ = 10
"""Re-seeded attempts before a degenerate GRU teacher fails the run."""

ERROR_CEILING_ = 1e100
"""Non-finite errors and losses are clipped to this value in sweep statistics."""

TEACHER_KINDS_ = ('balanced', 'delay', 'random_unbalanced', 'gru')


def _splitmix64(z: int) -> int:
    z = (z + SPLITMIX_GAMMA_) & MASK64_
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64_
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64_

    return z ^ (z >> 31)


def derive_seed(master: int, *counters: int) -> int:
    """
    Derive a 63-bit seed from a master seed and a tuple of counters.

    Each counter is folded in with one splitmix64 round,
    state = splitmix64(state ^ splitmix64(counter)), so distinct counter
    tuples give statistically independent seeds.
    """
    state = _splitmix64(int(master) & MASK64_)
    for counter in counters:
        state = _splitmix64(state ^ _splitmix64(int(counter) & MASK64_))

    return state >> 1


@dataclasses.dataclass(frozen=True)
class TeacherSettings(object):
    kind: str = 'balanced'
    dh: int = 5
    target: typing.Optional[typing.Tuple[float, ...]] = None
    """GRU teacher only: impulse response to fit (default: decaying sinusoid)."""

    def __post_init__(self) -> None:
        if self.kind not in TEACHER_KINDS_:
            raise ConfigurationError('extrapolab.experiments.TeacherSettings - Unknown teacher kind {0!r}'.format(self.kind))
        if self.dh < 1:
            raise ConfigurationError('extrapolab.experiments.TeacherSettings - dh must be positive, got {0!r}'.format(self.dh))

    def to_dict(self) -> typing.Dict[str, typing.Any]:
        return {
            'kind': self.kind,
            'dh': self.dh,
            'target': None if self.target is None else list(self.target),
        }


@dataclasses.dataclass(frozen=True)
class StudentSettings(object):
    d: int = 40
    structure: Structure = Structure.SYMMETRIC
    init: InitKind = InitKind.BALANCED_RANDOM
    init_scale: float = 1e-3

    def __post_init__(self) -> None:
        if self.d < 1:
            raise ConfigurationError('extrapolab.experiments.StudentSettings - d must be positive, got {0!r}'.format(self.d))
        if self.init is InitKind.EXPLICIT:
            raise ConfigurationError('extrapolab.experiments.StudentSettings - Sweeps draw their students; explicit init is not supported')
        if not self.init_scale > 0:
            raise ConfigurationError('extrapolab.experiments.StudentSettings - init_scale must be positive, got {0!r}'.format(self.init_scale))

    def init_for(self, scale: typing.Optional[float] = None) -> Init:
        return Init(kind=self.init, scale=self.init_scale if scale is None else scale, structure=self.structure)

    def to_dict(self) -> typing.Dict[str, typing.Any]:
        return {
            'd': self.d,
            'structure': self.structure.value,
            'init': self.init.value,
            'init_scale': self.init_scale,
        }


@dataclasses.dataclass(frozen=True)
class OptimizerSettings(object):
    method: Method = Method.ADAM
    lr: float = 1e-3
    max_steps: int = 15000
    loss_kind: LossKind = LossKind.POPULATION
    early_stop_loss: typing.Optional[float] = None
    lr_milestones: typing.Tuple[typing.Tuple[int, float], ...] = ()
    batch_size: typing.Optional[int] = None
    record_every: int = 100
    n_train: int = 10000
    """Dataset size for the empirical loss."""

    def __post_init__(self) -> None:
        self.training_config(Init(), 0)

        if self.n_train < 1:
            raise ConfigurationError('extrapolab.experiments.OptimizerSettings - n_train must be positive, got {0!r}'.format(self.n_train))

    def training_config(self, init: Init, seed: int) -> TrainingConfig:
        return TrainingConfig(
            method=self.method,
            lr=self.lr,
            max_steps=self.max_steps,
            loss_kind=self.loss_kind,
            early_stop_loss=self.early_stop_loss,
            lr_milestones=self.lr_milestones,
            batch_size=self.batch_size,
            init=init,
            seed=seed,
            record_every=self.record_every,
        )

    def to_dict(self) -> typing.Dict[str, typing.Any]:
        obj = self.training_config(Init(), 0).to_dict()
        del obj['init']
        del obj['seed']
        obj['n_train'] = self.n_train

        return obj


@dataclasses.dataclass(frozen=True)
class SweepSettings(object):
    k_values: typing.Tuple[int, ...] = (3, )
    seeds: typing.Tuple[int, ...] = (0, 1, 2)
    master_seed: int = 0
    scales: typing.Tuple[float, ...] = (1e-5, 1e-4, 1e-3, 1e-2, 1e-1)
    """Init-scale sweep only."""
    gru_eval_inputs: int = 100
    gru_horizon: typing.Optional[int] = None
    """GRU sweep only; the default is max(4 k, 200) per run."""

    def __post_init__(self) -> None:
        if (len(self.k_values) < 1) or any(k < 1 for k in self.k_values):
            raise ConfigurationError('extrapolab.experiments.SweepSettings - k values must be positive integers, got {0!r}'.format(self.k_values))
        if len(self.seeds) < 1:
            raise ConfigurationError('extrapolab.experiments.SweepSettings - Need at least one seed')
        if len(set(self.seeds)) != len(self.seeds):
            raise ConfigurationError('extrapolab.experiments.SweepSettings - Seeds must be distinct, got {0!r}'.format(self.seeds))
        if any(not scale > 0 for scale in self.scales):
            raise ConfigurationError('extrapolab.experiments.SweepSettings - Scales must be positive, got {0!r}'.format(self.scales))

    def to_dict(self) -> typing.Dict[str, typing.Any]:
        return {
            'k_values': list(self.k_values),
            'seeds': list(self.seeds),
            'master_seed': self.master_seed,
            'scales': list(self.scales),
            'gru_eval_inputs': self.gru_eval_inputs,
            'gru_horizon': self.gru_horizon,
        }


@dataclasses.dataclass(frozen=True)
class OutputSettings(object):
    trajectories: bool = True
    students: bool = True

    def to_dict(self) -> typing.Dict[str, typing.Any]:
        return {
            'trajectories': self.trajectories,
            'students': self.students,
        }


@dataclasses.dataclass(frozen=True)
class ExperimentConfig(object):
    teacher: TeacherSettings = TeacherSettings()
    student: StudentSettings = StudentSettings()
    optimizer: OptimizerSettings = OptimizerSettings()
    sweep: SweepSettings = SweepSettings()
    output: OutputSettings = OutputSettings()

    def to_dict(self) -> typing.Dict[str, typing.Any]:
        return {
            'teacher': self.teacher.to_dict(),
            'student': self.student.to_dict(),
            'optimizer': self.optimizer.to_dict(),
            'sweep': self.sweep.to_dict(),
            'output': self.output.to_dict(),
        }

    def config_hash(self) -> str:
        """SHA-256 of the canonical JSON form of the resolved configuration."""
        canonical = json.dumps(self.to_dict(), sort_keys=True, separators=(',', ':'))

        return hashlib.sha256(canonical.encode('utf-8')).hexdigest()


@dataclasses.dataclass(frozen=True)
class TrainSettings(object):
    """Single-run block: the training length and replicate seed."""

    k: typing.Optional[int] = None
    seed: int = 0

    def __post_init__(self) -> None:
        if (self.k is not None) and (self.k < 1):
            raise ConfigurationError('extrapolab.experiments.TrainSettings - k must be positive, got {0!r}'.format(self.k))

    def to_dict(self) -> typing.Dict[str, typing.Any]:
        return {
            'k': self.k,
            'seed': self.seed,
        }


class RunSpec(typing.NamedTuple):
    point: int
    """Index of the sweep point (position in the sweep's point list)."""
    k: int
    seed: int
    config: ExperimentConfig
    scale: typing.Optional[float] = None
    gru: bool = False


class RunOutcome(typing.NamedTuple):
    point: int
    k: int
    seed: int
    scale: typing.Optional[float]
    final_loss: float
    extrap_error: float
    baseline_error: float
    non_extrapolating: bool
    diverged: bool
    stop_reason: str
    min_balancedness_ratio: float
    wall_time_s: float
    records: typing.List[typing.Dict[str, typing.Any]]
    student: typing.Optional[typing.Dict[str, typing.Any]]
    error_name: typing.Optional[str] = None
    error_message: typing.Optional[str] = None

    @property
    def failed(self) -> bool:
        return self.error_name is not None


def system_document(params: typing.Union[LinearRnnParams, GruParams], **meta: typing.Any) -> typing.Dict[str, typing.Any]:
    """Wrap linear or GRU parameters in the JSON document read by :func:`load_system`."""
    obj = {
        'model': 'gru' if isinstance(params, GruParams) else 'linear',
    }
    obj.update(meta)
    obj['params'] = params.to_dict()

    return obj


def load_system(obj: typing.Dict[str, typing.Any]) -> typing.Union[LinearRnnParams, GruParams]:
    """
    Read a system document. Bare parameter dictionaries (with ``a`` for
    linear systems or ``d_g`` for GRUs) are accepted too.
    """
    if not isinstance(obj, dict):
        raise InvalidParamsError('extrapolab.experiments.load_system - Expected a JSON object')

    model = obj.get('model')
    params = obj.get('params', obj)

    if model is None:
        model = 'gru' if 'd_g' in params else 'linear'

    if model == 'linear':
        return LinearRnnParams.from_dict(params)
    elif model == 'gru':
        try:
            return GruParams.from_dict(params)
        except (KeyError, TypeError, ValueError) as exception:
            if isinstance(exception, InvalidParamsError):
                raise
            raise InvalidParamsError('extrapolab.experiments.load_system - Malformed GRU document: {0}'.format(exception))
    else:
        raise InvalidParamsError('extrapolab.experiments.load_system - Unknown model {0!r}'.format(model))


def build_teacher(settings: TeacherSettings, seed: int) -> LinearRnnParams:
    if settings.kind == 'balanced':
        return gen_balanced_teacher(settings.dh, seed)
    elif settings.kind == 'delay':
        return gen_delay_teacher(settings.dh)
    elif settings.kind == 'random_unbalanced':
        return gen_random_unbalanced_teacher(settings.dh, seed)
    else:
        raise ConfigurationError('extrapolab.experiments.build_teacher - {0!r} is not a linear teacher'.format(settings.kind))


def build_gru_teacher(settings: TeacherSettings, master_seed: int, seed: int) -> GruParams:
    """Generate the GRU teacher of one replicate, re-seeding degenerate fits."""
    target = None if settings.target is None else ImpulseResponse(settings.target)

    for attempt in range(GRU_TEACHER_ATTEMPTS_):
        try:
            return gen_gru_teacher(settings.dh, target, derive_seed(master_seed, TEACHER_STREAM_, seed, attempt)).params
        except DegenerateTeacherError as exception:
            logger.debug('[gru-sweep] {0}; re-seeding'.format(exception))

    raise DegenerateTeacherError('extrapolab.experiments.build_gru_teacher - No usable teacher after {0} attempts'.format(GRU_TEACHER_ATTEMPTS_))


def sweep_k_specs(config: ExperimentConfig) -> typing.List[RunSpec]:
    return [RunSpec(point, k, seed, config) for (point, k) in enumerate(config.sweep.k_values) for seed in config.sweep.seeds]

def init_scale_specs(config: ExperimentConfig) -> typing.List[RunSpec]:
    points = [(scale, k) for scale in config.sweep.scales for k in config.sweep.k_values]

    return [RunSpec(point, k, seed, config, scale=scale) for (point, (scale, k)) in enumerate(points) for seed in config.sweep.seeds]

def gru_sweep_specs(config: ExperimentConfig) -> typing.List[RunSpec]:
    return [RunSpec(point, k, seed, config, gru=True) for (point, k) in enumerate(config.sweep.k_values) for seed in config.sweep.seeds]


def finite_or_inf_(value: float) -> float:
    """Map an overflowed (inf or nan) tail error to inf."""
    return float(value) if math.isfinite(value) else math.inf


def _failed_outcome(spec: RunSpec, started: float, exception: BaseException) -> RunOutcome:
    nan = float('nan')

    return RunOutcome(
        point=spec.point, k=spec.k, seed=spec.seed, scale=spec.scale,
        final_loss=nan, extrap_error=nan, baseline_error=nan, non_extrapolating=True, diverged=True,
        stop_reason=StopReason.DIVERGED.value, min_balancedness_ratio=nan,
        wall_time_s=time.perf_counter() - started, records=[], student=None,
        error_name=type(exception).__name__, error_message=str(exception),
    )


class LinearFit(typing.NamedTuple):
    trajectory: TrainingTrajectory
    error: ExtrapolationError


def fit_linear(teacher: LinearRnnParams, k: int, config: ExperimentConfig, run_seed: int, data_seed: int, scale: typing.Optional[float] = None, progress: typing.Optional[typing.Callable[[int], None]] = None) -> LinearFit:
    """
    Train a student of the configured shape on the first k impulse-response
    entries of ``teacher`` (or on an empirical dataset of sequence length k)
    and measure its extrapolation error on the default tail window.
    """
    tail_start, tail_end = default_tail_window(k)
    teacher_ir = impulse_response(teacher, tail_end)

    if config.optimizer.loss_kind is LossKind.EMPIRICAL:
        target = make_dataset(teacher, k, config.optimizer.n_train, data_seed)
    else:
        target = teacher_ir.prefix(k)

    init = config.student.init_for(scale)
    training = config.optimizer.training_config(init, run_seed)

    trajectory = train_from_config(target, config.student.d, training, progress=progress)

    student_ir = impulse_response_padded(trajectory.final_theta, tail_end)

    return LinearFit(trajectory, extrapolation_error(student_ir, teacher_ir, tail_start, tail_end))


class GruFit(typing.NamedTuple):
    trajectory: TrainingTrajectory
    error: float
    baseline: float


def fit_gru(teacher: GruParams, k: int, config: ExperimentConfig, run_seed: int, eval_seed: int, progress: typing.Optional[typing.Callable[[int], None]] = None) -> GruFit:
    """
    Train a GRU student on last-step labels of sequences of length k and
    measure the mean tail error against ``teacher`` together with the error
    of the all-zero student.
    """
    init = Init(kind=InitKind.GAUSSIAN_SCALED, scale=config.student.init_scale)
    training = config.optimizer.training_config(init, run_seed)

    trajectory = gru_train(teacher, config.student.d, k, training, n_train=config.optimizer.n_train, progress=progress)

    horizon = default_tail_window(k)[1] if config.sweep.gru_horizon is None else config.sweep.gru_horizon
    error = gru_extrapolation_error(trajectory.final_theta, teacher, config.sweep.gru_eval_inputs, k, horizon, eval_seed)
    baseline = gru_extrapolation_error(GruParams.zeros(teacher.d), teacher, config.sweep.gru_eval_inputs, k, horizon, eval_seed)

    return GruFit(trajectory, error, baseline)


def _execute_linear(spec: RunSpec) -> RunOutcome:
    started = time.perf_counter()
    config = spec.config
    master = config.sweep.master_seed

    teacher = build_teacher(config.teacher, derive_seed(master, TEACHER_STREAM_, spec.seed))

    run_seed = derive_seed(master, STUDENT_STREAM_, spec.seed, spec.point)
    data_seed = derive_seed(master, DATA_STREAM_, spec.seed, spec.k)
    trajectory, error = fit_linear(teacher, spec.k, config, run_seed, data_seed, scale=spec.scale)

    return RunOutcome(
        point=spec.point, k=spec.k, seed=spec.seed, scale=spec.scale,
        final_loss=trajectory.final_loss,
        extrap_error=finite_or_inf_(error.error),
        baseline_error=error.baseline,
        non_extrapolating=not bool(error.error <= error.baseline),
        diverged=trajectory.diverged,
        stop_reason=trajectory.stop_reason.value,
        min_balancedness_ratio=trajectory.min_balancedness_ratio(),
        wall_time_s=time.perf_counter() - started,
        records=trajectory.to_dicts(),
        student=system_document(trajectory.final_theta),
    )


def _execute_gru(spec: RunSpec) -> RunOutcome:
    started = time.perf_counter()
    config = spec.config
    master = config.sweep.master_seed

    teacher = build_gru_teacher(config.teacher, master, spec.seed)

    run_seed = derive_seed(master, STUDENT_STREAM_, spec.seed, spec.point)
    eval_seed = derive_seed(master, EVAL_STREAM_, spec.seed, spec.point)
    trajectory, error, baseline = fit_gru(teacher, spec.k, config, run_seed, eval_seed)

    return RunOutcome(
        point=spec.point, k=spec.k, seed=spec.seed, scale=spec.scale,
        final_loss=trajectory.final_loss,
        extrap_error=finite_or_inf_(error),
        baseline_error=baseline,
        non_extrapolating=not bool(error <= baseline),
        diverged=trajectory.diverged,
        stop_reason=trajectory.stop_reason.value,
        min_balancedness_ratio=float('nan'),
        wall_time_s=time.perf_counter() - started,
        records=trajectory.to_dicts(),
        student=system_document(trajectory.final_theta),
    )


def execute_run(spec: RunSpec) -> RunOutcome:
    """Execute one run; any failure becomes a diverged outcome carrying the error."""
    started = time.perf_counter()
    try:
        if spec.gru:
            return _execute_gru(spec)
        else:
            return _execute_linear(spec)
    except Exception as exception:
        logger.warning('[sweep] Run k={0}, seed={1} failed: {2}: {3}'.format(spec.k, spec.seed, type(exception).__name__, exception))
        return _failed_outcome(spec, started, exception)


def default_jobs() -> int:
    return os.cpu_count() or 1


def run_sweep(specs: typing.Sequence[RunSpec], jobs: int = 1, progress: bool = True) -> typing.List[RunOutcome]:
    """
    Execute every spec and return the outcomes sorted by (sweep point, seed).

    ``jobs`` > 1 dispatches runs to a process pool; runs share nothing but
    their immutable specs.
    """
    outcomes = []

    with tqdm(total=len(specs), desc='runs', disable=None if progress else True, leave=False) as bar:
        if (jobs <= 1) or (len(specs) <= 1):
            for spec in specs:
                outcomes.append(execute_run(spec))
                bar.update(1)
        else:
            with multiprocessing.Pool(min(jobs, len(specs))) as pool:
                for outcome in pool.imap_unordered(execute_run, specs):
                    outcomes.append(outcome)
                    bar.update(1)

    return sorted(outcomes, key=lambda outcome: (outcome.point, outcome.seed))


def sweep_statistics(summary: pandas.DataFrame, by: typing.List[str]) -> pandas.DataFrame:
    """
    Per-point mean and (population) standard deviation of the extrapolation
    error and final loss over every run that completed.

    Overflowed tails and diverged losses stay in the statistics, clipped to
    ERROR_CEILING_; ``n_overflow`` counts them. Runs that raised (a nan
    extrapolation error) are left out and counted in ``n_failed``.
    ``n_diverged`` counts completed runs whose optimizer diverged.
    """
    failed = summary['extrap_error'].isna()
    completed = summary[~failed].copy()

    overflow = ~numpy.isfinite(completed['extrap_error'].to_numpy(dtype=numpy.float64))
    for column in ('extrap_error', 'final_loss'):
        values = completed[column].to_numpy(dtype=numpy.float64)
        completed[column] = numpy.where(numpy.isfinite(values), numpy.minimum(values, ERROR_CEILING_), ERROR_CEILING_)
    completed['overflow'] = overflow

    grouped = completed.groupby(by, sort=True)
    stats = grouped[['extrap_error', 'final_loss']].agg(['mean', lambda values: float(numpy.std(values))])
    stats.columns = ['extrap_error_mean', 'extrap_error_std', 'final_loss_mean', 'final_loss_std']
    stats['n_runs'] = grouped.size()
    stats['n_overflow'] = grouped['overflow'].sum().astype(int)
    stats['n_diverged'] = grouped['diverged'].sum().astype(int)

    points = summary[by].drop_duplicates().sort_values(by)
    n_failed = failed.groupby([summary[column] for column in by]).sum().astype(int).rename('n_failed').reset_index()

    result = points.merge(stats.reset_index(), on=by, how='left')
    result = result.merge(n_failed, on=by, how='left')

    for column in ('n_runs', 'n_overflow', 'n_diverged', 'n_failed'):
        result[column] = result[column].fillna(0).astype(int)

    return result
