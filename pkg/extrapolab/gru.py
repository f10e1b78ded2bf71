# -*- coding: utf-8 -*-
#
# extrapolab: extrapolab/gru.py
#
# Copyright (c) 2026, extrapolab developers
# All rights reserved.

"""
A minimal gated recurrent network with a linear readout.

For a scalar input sequence x and h[0] = 0, every step computes

    z = sigmoid(W_z x[t] + U_z h + b_z)
    r = sigmoid(W_r x[t] + U_r h + b_r)
    g = tanh(W_h x[t] + U_h (r * h) + b_h)
    h = (1 - z) * h + z * g
    y[t] = c_out . h

Gradients are computed by backpropagation through time over a whole batch.

Key Classes:
    GruParams: named weight blocks of one network

Key Functions:
    gru_forward(), gru_forward_batch(): output sequences
    gru_grad(): gradient of the last-step square loss on a dataset
    gru_train(): Adam on the last-step loss against a teacher network
    gru_extrapolation_error(): mean tail l-infinity gap over random inputs
"""

import logging
import typing

import numpy
import scipy.special

from .exceptions import InvalidParamsError, NonFiniteError
from .losses import SequenceDataset
from .optim import Adam, StopReason, TrainingConfig, TrainingRecord, TrainingTrajectory, lr_schedule_apply
from .validators import is_valid_array

logger = logging.getLogger(__name__)

BLOCKS_ = ('w_z', 'u_z', 'b_z', 'w_r', 'u_r', 'b_r', 'w_h', 'u_h', 'b_h', 'c_out')
"""Weight blocks in serialization and flat-vector order."""

MATRIX_BLOCKS_ = ('u_z', 'u_r', 'u_h')
"""Blocks of shape d_g x d_g; every other block is a d_g vector."""

STUDENT_INIT_SCALE_ = 1e-4
"""Per-entry standard deviation of a near-zero student."""

DATASET_SIZE_ = 10000
"""Training sequences drawn for a GRU student."""

DIVERGED_LOSS_ = 1e12


class GruParams(object):
    """
    Weights of a GRU with scalar input, state dimension d_g and linear readout.

    Attributes:
        w_z, w_r, w_h (numpy.ndarray): input weights, length d_g
        u_z, u_r, u_h (numpy.ndarray): recurrent weights, d_g x d_g
        b_z, b_r, b_h (numpy.ndarray): biases, length d_g
        c_out (numpy.ndarray): readout, length d_g
    """

    def __init__(self, **blocks: typing.Any) -> None:
        super(GruParams, self).__init__()

        missing = [name for name in BLOCKS_ if name not in blocks]
        if missing:
            raise InvalidParamsError('extrapolab.gru.GruParams - Missing weight blocks: {0}'.format(', '.join(missing)))

        d = len(numpy.asarray(blocks['c_out']).reshape(-1))
        if d < 1:
            raise InvalidParamsError('extrapolab.gru.GruParams - State dimension must be positive')

        for name in BLOCKS_:
            shape = (d, d) if name in MATRIX_BLOCKS_ else (d, )
            value = numpy.array(blocks[name], dtype=numpy.float64)
            if value.size != int(numpy.prod(shape)):
                raise InvalidParamsError('extrapolab.gru.GruParams - Block {0} has {1} entries, expected shape {2}'.format(name, value.size, shape))
            value = value.reshape(shape)
            if not is_valid_array(value):
                raise InvalidParamsError('extrapolab.gru.GruParams - Block {0} has non-finite entries'.format(name))
            setattr(self, name, value)

    @property
    def d(self) -> int:
        return len(self.c_out)

    def __repr__(self) -> str:
        return 'GruParams(d_g={0})'.format(self.d)

    @classmethod
    def zeros(cls, d: int) -> 'GruParams':
        return cls(**{name: numpy.zeros((d, d) if name in MATRIX_BLOCKS_ else d) for name in BLOCKS_})

    @classmethod
    def random(cls, d: int, scale: float, rng: numpy.random.Generator) -> 'GruParams':
        """Draw every entry from Normal(0, scale^2)."""
        return cls(**{name: scale * rng.standard_normal((d, d) if name in MATRIX_BLOCKS_ else d) for name in BLOCKS_})

    def to_vector(self) -> numpy.ndarray:
        return numpy.concatenate([getattr(self, name).reshape(-1) for name in BLOCKS_])

    @classmethod
    def from_vector(cls, vector: numpy.ndarray, d: int) -> 'GruParams':
        blocks = {}
        offset = 0
        for name in BLOCKS_:
            size = d * d if name in MATRIX_BLOCKS_ else d
            blocks[name] = vector[offset:offset + size]
            offset += size

        return cls(**blocks)

    def to_dict(self) -> typing.Dict[str, typing.Any]:
        obj = {
            'd_g': self.d,
        }
        for name in BLOCKS_:
            obj[name] = getattr(self, name).tolist()

        return obj

    @classmethod
    def from_dict(cls, obj: typing.Dict[str, typing.Any]) -> 'GruParams':
        params = cls(**{name: obj[name] for name in BLOCKS_ if name in obj})

        if ('d_g' in obj) and (int(obj['d_g']) != params.d):
            raise InvalidParamsError('extrapolab.gru.GruParams.from_dict - Declared d_g={0} but blocks have {1}'.format(obj['d_g'], params.d))

        return params


class _Tape(typing.NamedTuple):
    h: numpy.ndarray
    z: numpy.ndarray
    r: numpy.ndarray
    g: numpy.ndarray
    y: numpy.ndarray


def _run(params: GruParams, inputs: numpy.ndarray) -> _Tape:
    n, steps = inputs.shape
    d = params.d

    h = numpy.zeros((steps + 1, n, d))
    z = numpy.empty((steps, n, d))
    r = numpy.empty((steps, n, d))
    g = numpy.empty((steps, n, d))

    for t in range(steps):
        x = inputs[:, t, numpy.newaxis]

        z[t] = scipy.special.expit(x * params.w_z + h[t] @ params.u_z.T + params.b_z)
        r[t] = scipy.special.expit(x * params.w_r + h[t] @ params.u_r.T + params.b_r)
        g[t] = numpy.tanh(x * params.w_h + (r[t] * h[t]) @ params.u_h.T + params.b_h)
        h[t + 1] = (1.0 - z[t]) * h[t] + z[t] * g[t]

    y = h[1:] @ params.c_out
    if not is_valid_array(y):
        raise NonFiniteError('extrapolab.gru.gru_forward')

    return _Tape(h, z, r, g, y.T)


def gru_forward_batch(params: GruParams, inputs: typing.Any) -> numpy.ndarray:
    """Return the N x T outputs for an N x T matrix of input sequences."""
    inputs = numpy.array(inputs, dtype=numpy.float64, ndmin=2)

    return _run(params, inputs).y

def gru_forward(params: GruParams, x: typing.Any) -> numpy.ndarray:
    """Return the output sequence y[0..T-1] for one input sequence."""
    return gru_forward_batch(params, numpy.asarray(x, dtype=numpy.float64).reshape(1, -1))[0]

def gru_impulse_response(params: GruParams, n: int) -> numpy.ndarray:
    impulse = numpy.zeros(n)
    impulse[0] = 1.0

    return gru_forward(params, impulse)


def _backward(params: GruParams, inputs: numpy.ndarray, tape: _Tape, output_grads: numpy.ndarray) -> GruParams:
    # output_grads[n][t] = dL/dy[t] for sequence n
    n, steps = inputs.shape
    grads = {name: numpy.zeros_like(getattr(params, name)) for name in BLOCKS_}

    dh_next = numpy.zeros((n, params.d))
    for t in reversed(range(steps)):
        x = inputs[:, t]
        h_prev = tape.h[t]
        z, r, g = tape.z[t], tape.r[t], tape.g[t]

        grads['c_out'] += output_grads[:, t] @ tape.h[t + 1]
        dh = dh_next + numpy.outer(output_grads[:, t], params.c_out)

        dz = dh * (g - h_prev)
        dh_prev = dh * (1.0 - z)

        da_h = dh * z * (1.0 - g * g)
        grads['w_h'] += x @ da_h
        grads['b_h'] += da_h.sum(axis=0)
        grads['u_h'] += da_h.T @ (r * h_prev)
        d_rh = da_h @ params.u_h
        dh_prev += d_rh * r
        dr = d_rh * h_prev

        da_z = dz * z * (1.0 - z)
        grads['w_z'] += x @ da_z
        grads['b_z'] += da_z.sum(axis=0)
        grads['u_z'] += da_z.T @ h_prev
        dh_prev += da_z @ params.u_z

        da_r = dr * r * (1.0 - r)
        grads['w_r'] += x @ da_r
        grads['b_r'] += da_r.sum(axis=0)
        grads['u_r'] += da_r.T @ h_prev
        dh_prev += da_r @ params.u_r

        dh_next = dh_prev

    return GruParams(**grads)


def gru_loss_and_grad(params: GruParams, data: SequenceDataset) -> typing.Tuple[float, GruParams]:
    """Return (1/N) sum_i (y_k(x_i) - label_i)^2 and its gradient."""
    tape = _run(params, data.inputs)
    residual = tape.y[:, -1] - data.labels

    output_grads = numpy.zeros_like(tape.y)
    output_grads[:, -1] = 2.0 * residual / data.n

    return float(numpy.mean(numpy.square(residual))), _backward(params, data.inputs, tape, output_grads)

def gru_loss(params: GruParams, data: SequenceDataset) -> float:
    residual = gru_forward_batch(params, data.inputs)[:, -1] - data.labels

    return float(numpy.mean(numpy.square(residual)))

def gru_grad(params: GruParams, data: SequenceDataset) -> GruParams:
    return gru_loss_and_grad(params, data)[1]


def gru_sequence_loss_and_grad(params: GruParams, inputs: typing.Any, targets: typing.Any) -> typing.Tuple[float, GruParams]:
    """Return the mean square error over every output step and its gradient."""
    inputs = numpy.array(inputs, dtype=numpy.float64, ndmin=2)
    targets = numpy.array(targets, dtype=numpy.float64, ndmin=2)

    tape = _run(params, inputs)
    residual = tape.y - targets

    return float(numpy.mean(numpy.square(residual))), _backward(params, inputs, tape, 2.0 * residual / residual.size)


def make_gru_dataset(teacher: GruParams, k: int, n: int, rng_seed: int) -> SequenceDataset:
    """Label n standard-normal sequences of length k with the teacher's last output."""
    if (n < 1) or (k < 1):
        raise InvalidParamsError('extrapolab.gru.make_gru_dataset - Need n >= 1 and k >= 1, got n={0}, k={1}'.format(n, k))

    inputs = numpy.random.default_rng(rng_seed).standard_normal((n, k))

    return SequenceDataset(inputs, gru_forward_batch(teacher, inputs)[:, -1])


def gru_train(teacher: GruParams, d: int, k: int, config: TrainingConfig, n_train: int = DATASET_SIZE_, student_init: typing.Optional[GruParams] = None, progress: typing.Optional[typing.Callable[[int], None]] = None) -> TrainingTrajectory:
    """
    Train a d-dimensional GRU student on the last-step loss over ``n_train``
    Gaussian sequences of length k labeled by ``teacher``.

    Adam with the configured learning rate and milestones; minibatches of
    ``config.batch_size`` (all data when unset). The student starts at
    per-entry scale ``config.init.scale`` unless ``student_init`` is given.
    The full loss is evaluated at record steps, where early stopping is
    decided.
    """
    rng = numpy.random.default_rng(config.seed)
    data = make_gru_dataset(teacher, k, n_train, int(rng.integers(2 ** 63)))

    params = GruParams.random(d, config.init.scale, rng) if student_init is None else student_init
    early_stop_loss = config.resolved_early_stop_loss
    batch_size = data.n if config.batch_size is None else min(config.batch_size, data.n)

    adam = Adam(len(params.to_vector()))

    def record(step: int, current: GruParams) -> typing.Optional[TrainingRecord]:
        try:
            loss, grad = gru_loss_and_grad(current, data)
        except NonFiniteError:
            return None
        if not (numpy.isfinite(loss) and loss <= DIVERGED_LOSS_):
            return None

        return TrainingRecord(step=step, time=None, loss=loss, balancedness_ratio=None, norm_gap=None, grad_norm=float(numpy.linalg.norm(grad.to_vector())))

    first = record(0, params)
    if first is None:
        raise InvalidParamsError('extrapolab.gru.gru_train - Loss is not finite at the initial student')

    records = [first]
    recorded = params
    stop_reason = StopReason.MAX_STEPS
    step = 0
    x = params.to_vector()

    while records[-1].loss > early_stop_loss and step < config.max_steps:
        batch = data if batch_size == data.n else data.subset(rng.choice(data.n, size=batch_size, replace=False))

        try:
            _, grad = gru_loss_and_grad(params, batch)
            x = adam.step(x, grad.to_vector(), lr_schedule_apply(config, step))
            params = GruParams.from_vector(x, d)
        except (NonFiniteError, InvalidParamsError):
            stop_reason = StopReason.DIVERGED
            break

        step += 1

        if (step % config.record_every == 0) or (step == config.max_steps):
            current = record(step, params)
            if current is None:
                stop_reason = StopReason.DIVERGED
                break
            records.append(current)
            recorded = params

        if progress is not None:
            progress(step)

    if stop_reason is StopReason.DIVERGED:
        logger.warning('[gru-train] Diverged at step {0}'.format(step + 1))
        params = recorded
    elif records[-1].loss <= early_stop_loss:
        stop_reason = StopReason.CONVERGED
    elif records[-1].step != step:
        current = record(step, params)
        if current is not None:
            records.append(current)

    return TrainingTrajectory(records, params, stop_reason)


def gru_extrapolation_error(student: GruParams, teacher: GruParams, n_inputs: int, k: int, horizon: int, seed: int) -> float:
    """
    Return the mean over ``n_inputs`` standard-normal sequences of length
    ``horizon`` of max_{k <= t < horizon} |student y[t] - teacher y[t]|.
    """
    if not horizon > k:
        raise InvalidParamsError('extrapolab.gru.gru_extrapolation_error - Need horizon > k, got horizon={0}, k={1}'.format(horizon, k))
    if n_inputs < 1:
        raise InvalidParamsError('extrapolab.gru.gru_extrapolation_error - Need at least one input sequence')

    inputs = numpy.random.default_rng(seed).standard_normal((n_inputs, horizon))
    gaps = numpy.abs(gru_forward_batch(student, inputs) - gru_forward_batch(teacher, inputs))

    return float(numpy.mean(numpy.max(gaps[:, k:], axis=1)))
