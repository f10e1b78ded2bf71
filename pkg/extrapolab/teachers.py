# -*- coding: utf-8 -*-
#
# extrapolab: extrapolab/teachers.py
#
# Copyright (c) 2026, extrapolab developers
# All rights reserved.

"""
Teacher generators.

Key Functions:
    gen_balanced_teacher(): balanced diagonal teacher with CB = 1
    gen_delay_teacher(): nilpotent shift (delay line) teacher
    gen_random_unbalanced_teacher(): random upper-bidiagonal teacher
    gen_gru_teacher(): GRU fitted to a prescribed impulse response
"""

import logging
import typing

import numpy

from .exceptions import DegenerateTeacherError, InvalidParamsError
from .gru import GruParams, gru_impulse_response, gru_sequence_loss_and_grad
from .lds import ImpulseResponse, LinearRnnParams, Structure
from .optim import Adam

logger = logging.getLogger(__name__)

BALANCED_EIG_RANGE_ = (0.6, 1.05)
"""Eigenvalues of the balanced teacher are uniform on this interval."""

BALANCED_B_MEAN_ = 0.5
BALANCED_B_STD_ = 1.0

MIN_B_NORM_SQ_ = 1e-6
"""A balanced-teacher draw with sum(b^2) below this is redrawn."""

UNBALANCED_DIAG_ = (0.0, 0.1)
UNBALANCED_SUPERDIAG_ = (0.7, 0.1)
"""(mean, standard deviation) of the random unbalanced teacher's bands."""

GRU_TEACHER_STEPS_ = 1000
GRU_TEACHER_LR_ = 1e-3
GRU_TEACHER_INIT_SCALE_ = 1e-6

GRU_TAIL_MIN_ = 1e-3
"""A fitted GRU whose response tail stays below this is degenerate."""

GRU_TARGET_LENGTH_ = 20


def gen_balanced_teacher(dh: int, seed: int) -> LinearRnnParams:
    """
    Return a diagonal teacher with eigenvalues uniform on [0.6, 1.05], B drawn
    entrywise from Normal(0.5, 1) and rescaled to unit norm, and C = B^T, so
    that CB = 1 and the system is exactly balanced.
    """
    if dh < 1:
        raise InvalidParamsError('extrapolab.teachers.gen_balanced_teacher - Dimension must be positive, got {0}'.format(dh))

    rng = numpy.random.default_rng(seed)
    eigenvalues = rng.uniform(BALANCED_EIG_RANGE_[0], BALANCED_EIG_RANGE_[1], size=dh)

    b = rng.normal(BALANCED_B_MEAN_, BALANCED_B_STD_, size=dh)
    while float(b @ b) < MIN_B_NORM_SQ_:
        b = rng.normal(BALANCED_B_MEAN_, BALANCED_B_STD_, size=dh)

    b = b / numpy.sqrt(b @ b)

    return LinearRnnParams(numpy.diag(eigenvalues), b, b.copy(), structure=Structure.DIAGONAL)


def _shift_io(dh: int) -> typing.Tuple[numpy.ndarray, numpy.ndarray]:
    b = numpy.zeros(dh)
    b[-1] = 1.0
    c = numpy.zeros(dh)
    c[0] = 1.0

    return b, c


def gen_delay_teacher(dh: int) -> LinearRnnParams:
    """
    Return the delay line of length dh: A has ones on the superdiagonal,
    B = e_{dh-1}, C = e_0^T, so the impulse response is 1 at index dh - 1 and
    0 elsewhere.
    """
    if dh < 1:
        raise InvalidParamsError('extrapolab.teachers.gen_delay_teacher - Dimension must be positive, got {0}'.format(dh))

    b, c = _shift_io(dh)

    return LinearRnnParams(numpy.eye(dh, k=1), b, c, structure=Structure.GENERAL)


def gen_random_unbalanced_teacher(dh: int, seed: int) -> LinearRnnParams:
    """
    Return an upper-bidiagonal teacher with diagonal ~ Normal(0, 0.1) and
    superdiagonal ~ Normal(0.7, 0.1), with the delay line's B and C. Its first
    dh - 1 impulse-response entries are exactly zero.
    """
    if dh < 1:
        raise InvalidParamsError('extrapolab.teachers.gen_random_unbalanced_teacher - Dimension must be positive, got {0}'.format(dh))

    rng = numpy.random.default_rng(seed)
    diagonal = rng.normal(UNBALANCED_DIAG_[0], UNBALANCED_DIAG_[1], size=dh)
    superdiagonal = rng.normal(UNBALANCED_SUPERDIAG_[0], UNBALANCED_SUPERDIAG_[1], size=dh - 1)

    b, c = _shift_io(dh)

    return LinearRnnParams(numpy.diag(diagonal) + numpy.diag(superdiagonal, k=1), b, c, structure=Structure.GENERAL)


def default_gru_target(n: int = GRU_TARGET_LENGTH_) -> ImpulseResponse:
    """Return the decaying sinusoid 0.8^j cos(0.7 j), j < n."""
    j = numpy.arange(n)

    return ImpulseResponse(0.8 ** j * numpy.cos(0.7 * j))


class GruTeacher(typing.NamedTuple):
    params: GruParams
    fit_error: float
    """Mean square error of the fitted unit-impulse response against the target."""


def gen_gru_teacher(dhg: int, target_ir: typing.Optional[ImpulseResponse], seed: int, steps: int = GRU_TEACHER_STEPS_, lr: float = GRU_TEACHER_LR_, init_scale: float = GRU_TEACHER_INIT_SCALE_) -> GruTeacher:
    """
    Fit a dhg-dimensional GRU to ``target_ir`` as its unit-impulse output.

    The network starts at per-entry scale ``init_scale`` and runs ``steps``
    full-batch Adam steps on the mean square error over the target horizon.

    Raises:
        DegenerateTeacherError: if the target is identically zero, or the fitted
            response over the second half of the target horizon stays below
            1e-3 (the network decayed to a trivial teacher)
    """
    if dhg < 1:
        raise InvalidParamsError('extrapolab.teachers.gen_gru_teacher - Dimension must be positive, got {0}'.format(dhg))

    target_ir = default_gru_target() if target_ir is None else target_ir
    if not numpy.any(target_ir.values):
        raise DegenerateTeacherError('extrapolab.teachers.gen_gru_teacher - Target impulse response is identically zero')

    n = target_ir.n
    impulse = numpy.zeros((1, n))
    impulse[0, 0] = 1.0
    targets = target_ir.values.reshape(1, n)

    rng = numpy.random.default_rng(seed)
    params = GruParams.random(dhg, init_scale, rng)
    x = params.to_vector()
    adam = Adam(len(x))

    for _ in range(steps):
        _, grad = gru_sequence_loss_and_grad(params, impulse, targets)
        x = adam.step(x, grad.to_vector(), lr)
        params = GruParams.from_vector(x, dhg)

    fit_error = gru_sequence_loss_and_grad(params, impulse, targets)[0]

    tail = numpy.abs(gru_impulse_response(params, n)[n // 2:])
    if float(numpy.max(tail)) < GRU_TAIL_MIN_:
        raise DegenerateTeacherError('extrapolab.teachers.gen_gru_teacher - Fitted response decays to zero (tail max {0!r})'.format(float(numpy.max(tail))))

    logger.debug('[gen-teacher] GRU teacher d_g={0}: fit error {1!r}'.format(dhg, fit_error))

    return GruTeacher(params, fit_error)
