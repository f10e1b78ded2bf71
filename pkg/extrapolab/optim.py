# -*- coding: utf-8 -*-
#
# extrapolab: extrapolab/optim.py
#
# Copyright (c) 2026, extrapolab developers
# All rights reserved.

"""
Training loops for student linear RNNs.

Three methods are supported, all acting on the student's free-parameter
vector (so a symmetric student stays exactly symmetric and a diagonal one
exactly diagonal):

    GD    theta <- theta - lr * grad
    GF    gradient flow d theta / d tau = -grad, integrated with classical
          fixed-step Runge-Kutta (RK4)
    Adam  first/second-moment update with bias correction

Key Classes:
    TrainingConfig: validated optimizer settings
    Init: student initialization recipe
    Adam: reusable Adam state over a flat parameter vector
    TrainingTrajectory: instrumentation records plus the final parameters

Key Functions:
    init_student(): draw an initial student
    lr_schedule_apply(): effective learning rate under milestone decay
    train(): run one optimization
"""

import dataclasses
import enum
import logging
import typing

import numpy

from .exceptions import ConfigurationError, DegenerateDenominatorError, InvalidParamsError, NonFiniteError
from .file_ops import write_jsonl
from .lds import ImpulseResponse, LinearRnnParams, Structure, balancedness_ratio, free_size_a, norm_gap, unpack_free_a
from .losses import Gradients, SequenceDataset, accumulating_loss_and_grad, empirical_loss_and_grad, population_loss_and_grad
from .validators import is_valid_milestones

logger = logging.getLogger(__name__)

POPULATION_EARLY_STOP_ = 1e-12
"""Default early-stop loss for population and accumulating objectives."""

EMPIRICAL_EARLY_STOP_ = 1e-8
"""Default early-stop loss for the empirical objective."""

DIVERGED_LOSS_ = 1e12
"""A loss above this marks the run as diverged."""

DIVERGED_PARAM_ = 1e6
"""A parameter magnitude above this marks the run as diverged."""

GF_DRIFT_TOL_ = 1e-6
"""Norm-gap drift that triggers the single automatic halving of the GF step."""

ADAM_BETA1_ = 0.9
ADAM_BETA2_ = 0.999
ADAM_EPS_ = 1e-8


class Method(enum.Enum):
    GD = 'gd'
    GF = 'gf'
    ADAM = 'adam'


class LossKind(enum.Enum):
    POPULATION = 'population'
    EMPIRICAL = 'empirical'
    ACCUMULATING = 'accumulating'


class InitKind(enum.Enum):
    BALANCED_RANDOM = 'balanced_random'
    GAUSSIAN_SCALED = 'gaussian_scaled'
    EXPLICIT = 'explicit'


class StopReason(enum.Enum):
    CONVERGED = 'converged'
    MAX_STEPS = 'max_steps'
    DIVERGED = 'diverged'


class Init(typing.NamedTuple):
    """
    Student initialization recipe.

    ``scale`` is the balanced-random scale or the epsilon of the
    epsilon-normal initialization; ``theta`` is required for EXPLICIT.
    ``structure`` overrides the default student structure (symmetric for
    balanced-random, general for Gaussian).
    """

    kind: InitKind = InitKind.BALANCED_RANDOM
    scale: float = 1e-3
    theta: typing.Optional[LinearRnnParams] = None
    structure: typing.Optional[Structure] = None


@dataclasses.dataclass(frozen=True)
class TrainingConfig(object):
    """
    Optimizer settings, validated on construction.

    ``lr`` is the learning rate for GD and Adam and the step size of the RK4
    integrator for GF. ``early_stop_loss`` defaults by objective.

    Raises:
        ConfigurationError: on any invalid combination
    """

    method: Method = Method.ADAM
    lr: float = 1e-3
    max_steps: int = 15000
    loss_kind: LossKind = LossKind.POPULATION
    early_stop_loss: typing.Optional[float] = None
    lr_milestones: typing.Tuple[typing.Tuple[int, float], ...] = ()
    batch_size: typing.Optional[int] = None
    init: Init = Init()
    seed: int = 0
    record_every: int = 100

    def __post_init__(self) -> None:
        object.__setattr__(self, 'method', Method(self.method))
        object.__setattr__(self, 'loss_kind', LossKind(self.loss_kind))
        object.__setattr__(self, 'lr_milestones', tuple((int(step), float(multiplier)) for (step, multiplier) in self.lr_milestones))

        if not (numpy.isfinite(self.lr) and self.lr > 0):
            raise ConfigurationError('extrapolab.optim.TrainingConfig - lr must be positive, got {0!r}'.format(self.lr))
        if self.max_steps < 1:
            raise ConfigurationError('extrapolab.optim.TrainingConfig - max_steps must be at least 1, got {0!r}'.format(self.max_steps))
        if self.record_every < 1:
            raise ConfigurationError('extrapolab.optim.TrainingConfig - record_every must be at least 1, got {0!r}'.format(self.record_every))
        if not is_valid_milestones(self.lr_milestones):
            raise ConfigurationError('extrapolab.optim.TrainingConfig - lr_milestones must be strictly increasing, got {0!r}'.format(self.lr_milestones))
        if self.batch_size is not None:
            if self.loss_kind is not LossKind.EMPIRICAL:
                raise ConfigurationError('extrapolab.optim.TrainingConfig - batch_size only applies to the empirical loss')
            if self.method is Method.GF:
                raise ConfigurationError('extrapolab.optim.TrainingConfig - Gradient flow needs the full-batch gradient')
            if self.batch_size < 1:
                raise ConfigurationError('extrapolab.optim.TrainingConfig - batch_size must be at least 1, got {0!r}'.format(self.batch_size))
        if (self.init.kind is InitKind.EXPLICIT) and (self.init.theta is None):
            raise ConfigurationError('extrapolab.optim.TrainingConfig - Explicit init requires parameters')
        if self.early_stop_loss is not None and not (self.early_stop_loss >= 0):
            raise ConfigurationError('extrapolab.optim.TrainingConfig - early_stop_loss must be non-negative, got {0!r}'.format(self.early_stop_loss))

    @property
    def resolved_early_stop_loss(self) -> float:
        if self.early_stop_loss is not None:
            return float(self.early_stop_loss)
        elif self.loss_kind is LossKind.EMPIRICAL:
            return EMPIRICAL_EARLY_STOP_
        else:
            return POPULATION_EARLY_STOP_

    def to_dict(self) -> typing.Dict[str, typing.Any]:
        return {
            'method': self.method.value,
            'lr': self.lr,
            'max_steps': self.max_steps,
            'loss_kind': self.loss_kind.value,
            'early_stop_loss': self.resolved_early_stop_loss,
            'lr_milestones': [list(milestone) for milestone in self.lr_milestones],
            'batch_size': self.batch_size,
            'init': {
                'kind': self.init.kind.value,
                'scale': self.init.scale,
                'structure': None if self.init.structure is None else self.init.structure.value,
            },
            'seed': self.seed,
            'record_every': self.record_every,
        }


def init_student(d: int, init: Init, seed: int) -> LinearRnnParams:
    """
    Draw an initial student of dimension d.

    GAUSSIAN_SCALED(eps): every free entry of a block with n free entries is
    drawn from Normal(0, eps^2 / n), so each block has norm close to eps.
    BALANCED_RANDOM(scale): B ~ Normal(0, scale^2 / d) per entry, C = B and a
    symmetric A from the same per-entry rule. EXPLICIT returns ``init.theta``.
    """
    if d < 1:
        raise InvalidParamsError('extrapolab.optim.init_student - Dimension must be positive, got {0}'.format(d))

    if init.kind is InitKind.EXPLICIT:
        if init.theta is None:
            raise InvalidParamsError('extrapolab.optim.init_student - Explicit init requires parameters')
        return init.theta

    rng = numpy.random.default_rng(seed)
    scale = float(init.scale)

    if init.kind is InitKind.BALANCED_RANDOM:
        structure = Structure.SYMMETRIC if init.structure is None else init.structure
        if structure is Structure.GENERAL:
            structure = Structure.SYMMETRIC

        n_a = free_size_a(d, structure)
        a = unpack_free_a(rng.normal(0.0, scale / numpy.sqrt(n_a), size=n_a), d, structure)
        b = rng.normal(0.0, scale / numpy.sqrt(d), size=d)

        return LinearRnnParams(a, b, b.copy(), structure=structure)

    structure = Structure.GENERAL if init.structure is None else init.structure

    n_a = free_size_a(d, structure)
    a = unpack_free_a(rng.normal(0.0, scale / numpy.sqrt(n_a), size=n_a), d, structure)
    b = rng.normal(0.0, scale / numpy.sqrt(d), size=d)
    c = rng.normal(0.0, scale / numpy.sqrt(d), size=d)

    return LinearRnnParams(a, b, c, structure=structure)


def lr_schedule_apply(config: TrainingConfig, step: int) -> float:
    """Return lr times the product of the multipliers of every milestone at or before ``step``."""
    lr = config.lr
    for (milestone, multiplier) in config.lr_milestones:
        if step >= milestone:
            lr = lr * multiplier

    return lr


class Adam(object):
    """Adam over a flat parameter vector, with bias-corrected moments."""

    def __init__(self, size: int, beta1: float = ADAM_BETA1_, beta2: float = ADAM_BETA2_, eps: float = ADAM_EPS_) -> None:
        super(Adam, self).__init__()

        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps

        self.m = numpy.zeros(size)
        self.v = numpy.zeros(size)
        self.t = 0

    def step(self, params: numpy.ndarray, grad: numpy.ndarray, lr: float) -> numpy.ndarray:
        self.t += 1

        self.m = self.beta1 * self.m + (1.0 - self.beta1) * grad
        self.v = self.beta2 * self.v + (1.0 - self.beta2) * numpy.square(grad)

        m_hat = self.m / (1.0 - self.beta1 ** self.t)
        v_hat = self.v / (1.0 - self.beta2 ** self.t)

        return params - lr * m_hat / (numpy.sqrt(v_hat) + self.eps)


class TrainingRecord(typing.NamedTuple):
    step: int
    time: typing.Optional[float]
    loss: float
    balancedness_ratio: typing.Optional[float]
    norm_gap: typing.Optional[float]
    grad_norm: float

    def to_dict(self) -> typing.Dict[str, typing.Any]:
        return self._asdict()


class TrainingTrajectory(object):
    """
    Records of one training run, its final parameters and the reason it stopped.

    ``final_theta`` is a LinearRnnParams for linear students and a GruParams
    for GRU students (whose records carry no balancedness diagnostics).
    """

    def __init__(self, records: typing.List[TrainingRecord], final_theta: typing.Any, stop_reason: StopReason) -> None:
        super(TrainingTrajectory, self).__init__()

        self.records = records
        self.final_theta = final_theta
        self.stop_reason = stop_reason

    @property
    def final_loss(self) -> float:
        return self.records[-1].loss

    @property
    def final_step(self) -> int:
        return self.records[-1].step

    @property
    def diverged(self) -> bool:
        return self.stop_reason is StopReason.DIVERGED

    def min_balancedness_ratio(self) -> float:
        ratios = [record.balancedness_ratio for record in self.records if record.balancedness_ratio is not None]

        return float(min(ratios)) if ratios else float('nan')

    def to_dicts(self) -> typing.List[typing.Dict[str, typing.Any]]:
        return [record.to_dict() for record in self.records]

    def write_jsonl(self, path: str) -> None:
        write_jsonl(path, self.to_dicts())


def _diagnostics(theta: LinearRnnParams) -> typing.Tuple[typing.Optional[float], float]:
    try:
        ratio = balancedness_ratio(theta)
    except DegenerateDenominatorError:
        ratio = None

    return ratio, norm_gap(theta)


def _objective(target: typing.Union[ImpulseResponse, SequenceDataset], loss_kind: LossKind) -> typing.Callable[[LinearRnnParams], typing.Tuple[float, Gradients]]:
    if loss_kind is LossKind.EMPIRICAL:
        if not isinstance(target, SequenceDataset):
            raise ConfigurationError('extrapolab.optim.train - The empirical loss needs a SequenceDataset')
        return lambda theta: empirical_loss_and_grad(theta, target)

    if not isinstance(target, ImpulseResponse):
        raise ConfigurationError('extrapolab.optim.train - The {0} loss needs a teacher impulse response'.format(loss_kind.value))
    if loss_kind is LossKind.ACCUMULATING:
        return lambda theta: accumulating_loss_and_grad(theta, target)
    else:
        return lambda theta: population_loss_and_grad(theta, target)


class _Evaluation(typing.NamedTuple):
    theta: LinearRnnParams
    loss: float
    grad: numpy.ndarray


class _Diverged(Exception):
    pass


def _check_params(x: numpy.ndarray) -> None:
    if not numpy.all(numpy.isfinite(x)) or float(numpy.max(numpy.abs(x))) > DIVERGED_PARAM_:
        raise _Diverged()


def _evaluate(x: numpy.ndarray, d: int, structure: Structure, objective: typing.Callable[[LinearRnnParams], typing.Tuple[float, Gradients]]) -> _Evaluation:
    _check_params(x)

    theta = LinearRnnParams.from_free_vector(x, d, structure)
    try:
        loss, grad = objective(theta)
    except NonFiniteError:
        raise _Diverged()

    grad_vector = grad.free_vector()
    if (not numpy.isfinite(loss)) or (loss > DIVERGED_LOSS_) or not numpy.all(numpy.isfinite(grad_vector)):
        raise _Diverged()

    return _Evaluation(theta, loss, grad_vector)


def _rk4_step(x: numpy.ndarray, h: float, field: typing.Callable[[numpy.ndarray], numpy.ndarray]) -> numpy.ndarray:
    k1 = field(x)
    k2 = field(x + 0.5 * h * k1)
    k3 = field(x + 0.5 * h * k2)
    k4 = field(x + h * k3)

    return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def train(target: typing.Union[ImpulseResponse, SequenceDataset], student_init: LinearRnnParams, config: TrainingConfig, progress: typing.Optional[typing.Callable[[int], None]] = None) -> TrainingTrajectory:
    """
    Train a student against a teacher impulse response (population and
    accumulating losses) or a dataset (empirical loss).

    Stops when the loss reaches ``config.resolved_early_stop_loss``
    (CONVERGED), after ``config.max_steps`` updates (MAX_STEPS), or when the
    loss or a parameter blows up (DIVERGED, a recorded outcome). Records are
    taken at step 0, every ``record_every`` steps and at the final step; on
    divergence the last finite parameters are returned.

    Args:
        target: teacher impulse response of length k, or a SequenceDataset
        student_init (LinearRnnParams): initial student, whose structure is kept
        config (TrainingConfig): optimizer settings
        progress (callable, optional): called with the number of completed steps

    Returns:
        TrainingTrajectory: the run
    """
    objective = _objective(target, config.loss_kind)
    d = student_init.d
    structure = student_init.structure
    early_stop_loss = config.resolved_early_stop_loss

    minibatch = (config.batch_size is not None) and isinstance(target, SequenceDataset) and (config.batch_size < target.n)
    rng = numpy.random.default_rng(config.seed)

    gf_step = config.lr
    gf_halved = False
    gap_0 = norm_gap(student_init)
    tau = 0.0

    adam = Adam(len(student_init.free_vector())) if config.method is Method.ADAM else None

    def record(step: int, evaluation: _Evaluation) -> TrainingRecord:
        ratio, gap = _diagnostics(evaluation.theta)

        return TrainingRecord(
            step=step,
            time=tau if config.method is Method.GF else None,
            loss=evaluation.loss,
            balancedness_ratio=ratio,
            norm_gap=gap,
            grad_norm=float(numpy.linalg.norm(evaluation.grad)),
        )

    def field(x: numpy.ndarray) -> numpy.ndarray:
        return -_evaluate(x, d, structure, objective).grad

    x = student_init.free_vector()
    try:
        current = _evaluate(x, d, structure, objective)
    except _Diverged:
        raise InvalidParamsError('extrapolab.optim.train - Loss is not finite at the initial student')

    records = [record(0, current)]
    step = 0
    stop_reason = StopReason.MAX_STEPS

    while True:
        if (current is not None) and (current.loss <= early_stop_loss):
            logger.debug('[train] Early stop at step {0} with loss {1!r}'.format(step, current.loss))
            stop_reason = StopReason.CONVERGED
            break
        if step >= config.max_steps:
            break

        lr = lr_schedule_apply(config, step)
        recording = ((step + 1) % config.record_every == 0) or (step + 1 == config.max_steps)

        try:
            if minibatch:
                batch = target.subset(rng.choice(target.n, size=config.batch_size, replace=False))
                grad = _evaluate(x, d, structure, lambda theta: empirical_loss_and_grad(theta, batch)).grad
            else:
                grad = current.grad

            if config.method is Method.GD:
                x_next = x - lr * grad
            elif config.method is Method.ADAM:
                x_next = adam.step(x, grad, lr)
            else:
                x_next = _rk4_step(x, gf_step, field)

            # Minibatch runs only evaluate the full objective where it is recorded.
            if minibatch and not recording:
                _check_params(x_next)
                next_evaluation = None
            else:
                next_evaluation = _evaluate(x_next, d, structure, objective)
        except _Diverged:
            logger.warning('[train] Diverged at step {0}'.format(step + 1))
            stop_reason = StopReason.DIVERGED
            break

        step += 1
        x = x_next
        current = next_evaluation

        if config.method is Method.GF:
            tau += gf_step
            drift = abs(norm_gap(current.theta) - gap_0)
            if (drift > GF_DRIFT_TOL_) and not gf_halved:
                gf_halved = True
                gf_step = gf_step / 2.0
                logger.warning('[train] Norm-gap drift {0!r} at step {1}; halving the integration step to {2!r}'.format(drift, step, gf_step))

        if (current is not None) and (step % config.record_every == 0):
            records.append(record(step, current))

        if progress is not None:
            progress(step)

    if current is None:
        try:
            current = _evaluate(x, d, structure, objective)
        except _Diverged:
            return TrainingTrajectory(records, LinearRnnParams.from_free_vector(x, d, structure), stop_reason)

    if records[-1].step != step:
        records.append(record(step, current))

    return TrainingTrajectory(records, current.theta, stop_reason)


def train_from_config(target: typing.Union[ImpulseResponse, SequenceDataset], d: int, config: TrainingConfig, progress: typing.Optional[typing.Callable[[int], None]] = None) -> TrainingTrajectory:
    """Initialize a student from ``config.init`` (seeded by ``config.seed``) and train it."""
    return train(target, init_student(d, config.init, config.seed), config, progress=progress)
