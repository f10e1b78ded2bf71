# -*- coding: utf-8 -*-
#
# extrapolab: extrapolab/losses.py
#
# Copyright (c) 2026, extrapolab developers
# All rights reserved.

"""
Losses of a student linear RNN against a teacher, with analytic gradients.

The population loss over length-k sequences drawn from a whitened input
distribution reduces to a sum over the impulse response,

    L(A, B, C) = sum_{i<k} (C A^i B - w_i)^2,    w_i = teacher impulse response,

and the accumulating loss (summing the square loss over every output step)
reweights the same residuals by (k - i). The empirical loss is the mean
last-step square loss over a finite dataset.

Gradients are reported for the student's own parameterization: for a
symmetric A the reported g_a is the symmetrized gradient (G + G^T) / 2, whose
free-variable form (see :meth:`Gradients.free_vector`) is G[i][j] + G[j][i]
off the diagonal and G[i][i] on it; for a diagonal A only the diagonal is kept.
All gradients include the factor 2 of the square loss.
"""

import logging
import typing

import numpy
import pandas
import scipy.linalg

from .exceptions import InvalidParamsError, NonFiniteError
from .lds import ImpulseResponse, LinearRnnParams, Structure, adjoint_states, forward_states, free_size_a, impulse_response, pack_free_a, rnn_forward_last_batch, rnn_states_batch, unpack_free_a
from .validators import is_valid_array

logger = logging.getLogger(__name__)

FINITE_DIFF_STEP_ = 1e-6
"""Default step of the central finite-difference oracle."""


class SequenceDataset(object):
    """
    N input sequences of length k with last-step teacher labels.

    Attributes:
        inputs (numpy.ndarray): N x k matrix, one sequence per row
        labels (numpy.ndarray): length-N vector
    """

    def __init__(self, inputs: typing.Any, labels: typing.Any) -> None:
        super(SequenceDataset, self).__init__()

        inputs = numpy.array(inputs, dtype=numpy.float64, ndmin=2)
        labels = numpy.array(labels, dtype=numpy.float64).reshape(-1)

        if (inputs.shape[0] < 1) or (inputs.shape[1] < 1):
            raise InvalidParamsError('extrapolab.losses.SequenceDataset - Empty dataset')
        if labels.shape != (inputs.shape[0], ):
            raise InvalidParamsError('extrapolab.losses.SequenceDataset - {0} labels for {1} sequences'.format(len(labels), inputs.shape[0]))
        if not (is_valid_array(inputs) and is_valid_array(labels)):
            raise InvalidParamsError('extrapolab.losses.SequenceDataset - Non-finite entries')

        inputs.setflags(write=False)
        labels.setflags(write=False)

        self.inputs = inputs
        self.labels = labels

    @property
    def k(self) -> int:
        return int(self.inputs.shape[1])

    @property
    def n(self) -> int:
        return int(self.inputs.shape[0])

    def __len__(self) -> int:
        return self.n

    def subset(self, indices: numpy.ndarray) -> 'SequenceDataset':
        return SequenceDataset(self.inputs[indices], self.labels[indices])

    def to_dict(self) -> typing.Dict[str, typing.Any]:
        return {
            'k': self.k,
            'n': self.n,
            'inputs': self.inputs.tolist(),
            'labels': self.labels.tolist(),
        }

    @classmethod
    def from_dict(cls, obj: typing.Dict[str, typing.Any]) -> 'SequenceDataset':
        dataset = cls(obj['inputs'], obj['labels'])

        if ('k' in obj and int(obj['k']) != dataset.k) or ('n' in obj and int(obj['n']) != dataset.n):
            raise InvalidParamsError('extrapolab.losses.SequenceDataset.from_dict - Declared shape does not match the data')

        return dataset

    def to_data_frame(self) -> pandas.DataFrame:
        """One row per example, columns x0..x{k-1} then label."""
        data_frame = pandas.DataFrame(self.inputs, columns=['x{0}'.format(j) for j in range(self.k)])
        data_frame['label'] = self.labels

        return data_frame


class Gradients(object):
    """
    Gradients of a loss with respect to (A, B, C), in the student's parameterization.

    Attributes:
        g_a (numpy.ndarray): d x d
        g_b (numpy.ndarray): length d
        g_c (numpy.ndarray): length d
        structure (Structure): parameterization the gradient refers to
    """

    def __init__(self, g_a: numpy.ndarray, g_b: numpy.ndarray, g_c: numpy.ndarray, structure: Structure) -> None:
        super(Gradients, self).__init__()

        self.g_a = numpy.asarray(g_a, dtype=numpy.float64)
        self.g_b = numpy.asarray(g_b, dtype=numpy.float64)
        self.g_c = numpy.asarray(g_c, dtype=numpy.float64)
        self.structure = structure

    @classmethod
    def from_general(cls, g_a: numpy.ndarray, g_b: numpy.ndarray, g_c: numpy.ndarray, structure: Structure) -> 'Gradients':
        """Project an unconstrained gradient G of A onto the given structure."""
        if structure is Structure.SYMMETRIC:
            g_a = (g_a + g_a.T) / 2.0
        elif structure is Structure.DIAGONAL:
            g_a = numpy.diag(numpy.diag(g_a))

        return cls(g_a, g_b, g_c, structure)

    def free_vector(self) -> numpy.ndarray:
        """Return dL/d(free variables), laid out like :meth:`LinearRnnParams.free_vector`."""
        g_a = pack_free_a(self.g_a, self.structure)

        if self.structure is Structure.SYMMETRIC:
            rows, cols = numpy.triu_indices(self.g_a.shape[0])
            g_a = g_a * numpy.where(rows == cols, 1.0, 2.0)

        return numpy.concatenate([g_a, self.g_b, self.g_c])

    @classmethod
    def from_free_vector(cls, vector: numpy.ndarray, d: int, structure: Structure) -> 'Gradients':
        n_a = free_size_a(d, structure)
        g_a = numpy.array(vector[:n_a], dtype=numpy.float64)

        if structure is Structure.SYMMETRIC:
            rows, cols = numpy.triu_indices(d)
            g_a = g_a / numpy.where(rows == cols, 1.0, 2.0)

        return cls(unpack_free_a(g_a, d, structure), vector[n_a:n_a + d], vector[n_a + d:n_a + 2 * d], structure)

    def norm(self) -> float:
        return float(numpy.linalg.norm(self.free_vector()))


def _check_horizon(theta: LinearRnnParams, teacher_ir: ImpulseResponse) -> int:
    k = teacher_ir.n
    if k < 1:
        raise InvalidParamsError('extrapolab.losses - Training length must be positive')

    return k


def weighted_population_loss_and_grad(theta: LinearRnnParams, teacher_ir: ImpulseResponse, weights: typing.Any) -> typing.Tuple[float, Gradients]:
    """
    Return sum_i weights[i] (C A^i B - w_i)^2 and its gradient.

    With residuals r_i and rho_i = 2 weights[i] r_i, and forward states
    u_j = A^j B, adjoint states v_j = (A^T)^j C^T:

        dL/dB = sum_i rho_i v_i,    dL/dC = sum_i rho_i u_i,
        dL/dA = sum_{i>=1} rho_i sum_{r<i} v_r u_{i-r-1}^T = V^T H U,

    where H[r][s] = rho_{r+s+1} is a Hankel matrix, so the A-gradient costs
    O(k^2 d + k d^2) and never forms a matrix power.
    """
    k = _check_horizon(theta, teacher_ir)
    weights = numpy.asarray(weights, dtype=numpy.float64).reshape(-1)
    if weights.shape != (k, ):
        raise InvalidParamsError('extrapolab.losses.weighted_population_loss_and_grad - Need {0} weights, got {1}'.format(k, len(weights)))

    ir = impulse_response(theta, k).values
    u = forward_states(theta, k)
    v = adjoint_states(theta, k)

    residual = ir - teacher_ir.values
    loss = float(weights @ numpy.square(residual))
    if not numpy.isfinite(loss):
        raise NonFiniteError('extrapolab.losses.weighted_population_loss_and_grad')

    rho = 2.0 * weights * residual

    g_b = rho @ v
    g_c = rho @ u

    if k > 1:
        hankel = scipy.linalg.hankel(rho[1:], numpy.zeros(k - 1))
        g_a = v[:k - 1].T @ (hankel @ u[:k - 1])
    else:
        g_a = numpy.zeros((theta.d, theta.d))

    return loss, Gradients.from_general(g_a, g_b, g_c, theta.structure)


def population_loss(theta: LinearRnnParams, teacher_ir: ImpulseResponse) -> float:
    """Return sum_{j<k} (C A^j B - w_j)^2 with w = teacher_ir and k its horizon."""
    k = _check_horizon(theta, teacher_ir)
    residual = impulse_response(theta, k).values - teacher_ir.values

    return float(residual @ residual)

def population_grad(theta: LinearRnnParams, teacher_ir: ImpulseResponse) -> Gradients:
    return population_loss_and_grad(theta, teacher_ir)[1]

def population_loss_and_grad(theta: LinearRnnParams, teacher_ir: ImpulseResponse) -> typing.Tuple[float, Gradients]:
    return weighted_population_loss_and_grad(theta, teacher_ir, numpy.ones(teacher_ir.n))


def accumulating_weights(k: int) -> numpy.ndarray:
    return numpy.arange(k, 0, -1, dtype=numpy.float64)

def accumulating_loss(theta: LinearRnnParams, teacher_ir: ImpulseResponse) -> float:
    """Return sum_{i<k} (k - i) (C A^i B - w_i)^2."""
    k = _check_horizon(theta, teacher_ir)
    residual = impulse_response(theta, k).values - teacher_ir.values

    return float(accumulating_weights(k) @ numpy.square(residual))

def accumulating_grad(theta: LinearRnnParams, teacher_ir: ImpulseResponse) -> Gradients:
    return accumulating_loss_and_grad(theta, teacher_ir)[1]

def accumulating_loss_and_grad(theta: LinearRnnParams, teacher_ir: ImpulseResponse) -> typing.Tuple[float, Gradients]:
    return weighted_population_loss_and_grad(theta, teacher_ir, accumulating_weights(teacher_ir.n))


def empirical_loss(theta: LinearRnnParams, data: SequenceDataset) -> float:
    """Return (1/N) sum_i (RNN(x_i) - y_i)^2 over the last-step outputs."""
    residual = rnn_forward_last_batch(theta, data.inputs) - data.labels
    loss = float(numpy.mean(numpy.square(residual)))

    if not numpy.isfinite(loss):
        raise NonFiniteError('extrapolab.losses.empirical_loss')

    return loss

def empirical_grad(theta: LinearRnnParams, data: SequenceDataset) -> Gradients:
    return empirical_loss_and_grad(theta, data)[1]

def empirical_loss_and_grad(theta: LinearRnnParams, data: SequenceDataset) -> typing.Tuple[float, Gradients]:
    """
    Return the empirical loss and its gradient by backpropagation through the
    k-step recurrence s[t+1] = A s[t] + B x[t].
    """
    states = rnn_states_batch(theta, data.inputs)
    residual = states[-1] @ theta.c - data.labels

    loss = float(numpy.mean(numpy.square(residual)))
    if not numpy.isfinite(loss):
        raise NonFiniteError('extrapolab.losses.empirical_loss_and_grad')

    delta = 2.0 * residual / data.n

    g_c = delta @ states[-1]
    g_a = numpy.zeros((theta.d, theta.d))
    g_b = numpy.zeros(theta.d)

    adjoint = numpy.outer(delta, theta.c)
    for t in reversed(range(data.k)):
        g_a += adjoint.T @ states[t]
        g_b += adjoint.T @ data.inputs[:, t]
        adjoint = adjoint @ theta.a

    return loss, Gradients.from_general(g_a, g_b, g_c, theta.structure)


def make_dataset(teacher: LinearRnnParams, k: int, n: int, rng_seed: int) -> SequenceDataset:
    """
    Sample n standard-normal input sequences of length k and label each with
    the teacher's last-step output. Deterministic under ``rng_seed``.
    """
    if (n < 1) or (k < 1):
        raise InvalidParamsError('extrapolab.losses.make_dataset - Need n >= 1 and k >= 1, got n={0}, k={1}'.format(n, k))

    rng = numpy.random.default_rng(rng_seed)
    inputs = rng.standard_normal((n, k))

    return SequenceDataset(inputs, rnn_forward_last_batch(teacher, inputs))


def finite_diff_grad(loss_fn: typing.Callable[[LinearRnnParams], float], theta: LinearRnnParams, h: float = FINITE_DIFF_STEP_) -> Gradients:
    """
    Central finite differences over every free parameter of ``theta``.

    Symmetric structure perturbs the upper-triangle variables and diagonal
    structure the diagonal ones, so the result is directly comparable with
    the analytic gradients.
    """
    if not h > 0:
        raise InvalidParamsError('extrapolab.losses.finite_diff_grad - Step must be positive, got {0!r}'.format(h))

    base = theta.free_vector()
    gradient = numpy.empty_like(base)

    for i in range(len(base)):
        shifted = base.copy()

        shifted[i] = base[i] + h
        loss_plus = loss_fn(LinearRnnParams.from_free_vector(shifted, theta.d, theta.structure))

        shifted[i] = base[i] - h
        loss_minus = loss_fn(LinearRnnParams.from_free_vector(shifted, theta.d, theta.structure))

        gradient[i] = (loss_plus - loss_minus) / (2.0 * h)

    return Gradients.from_free_vector(gradient, theta.d, theta.structure)
