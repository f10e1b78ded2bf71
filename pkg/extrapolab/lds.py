# -*- coding: utf-8 -*-
#
# extrapolab: extrapolab/lds.py
#
# Copyright (c) 2026, extrapolab developers
# All rights reserved.

"""
Linear recurrent networks (single-input single-output linear dynamical systems).

A linear RNN with parameters (A, B, C) and state dimension d runs the recurrence

    s[t+1] = A s[t] + B x[t],    y[t] = C s[t+1],    s[0] = 0

and is fully characterized by its impulse response (CB, CAB, CA^2B, ...), the
output sequence produced by the input (1, 0, 0, ...).

Key Classes:
    Structure: parameterization of the transition matrix (general / symmetric / diagonal)
    LinearRnnParams: immutable (A, B, C) triple with its structure flag
    ImpulseResponse: finite prefix of an impulse response
    ExtrapolationError: tail error of a student against a teacher

Key Functions:
    impulse_response(): impulse response via the matrix-vector recurrence
    rnn_forward_last(): last-step output for one input sequence
    diagonalize_balanced(): equivalent diagonal system of a balanced symmetric system
    balancedness_ratio(), norm_gap(): balancedness diagnostics
    construct_nonextrapolating_student(): a zero-loss student with a prescribed continuation
    extrapolation_error(): l-infinity error on the tail of the impulse response

Example Usage:
    >>> from extrapolab import lds
    >>> theta = lds.LinearRnnParams([[0.5]], [1.0], [1.0], structure=lds.Structure.DIAGONAL)
    >>> lds.impulse_response(theta, 3).values
    array([1.  , 0.5 , 0.25])
"""

import enum
import logging
import typing

import numpy

from .exceptions import DegenerateDenominatorError, IllConditionedVandermondeError, InvalidParamsError, NonFiniteError, NotBalancedError, NotSymmetricError, WindowOutOfRangeError
from .linalg import jacobi_eigh, solve_with_residual, vandermonde
from .validators import is_valid_array, is_valid_balanced, is_valid_diagonal, is_valid_distinct, is_valid_square, is_valid_symmetric, is_valid_window

logger = logging.getLogger(__name__)

TOL_BALANCE_ = 1e-9
"""Round-off scale tolerance on ``max|B - C^T|`` for structural balancedness checks."""

EIG_TOL_ = 1e-12
"""Off-diagonal threshold handed to the Jacobi eigensolver."""

VANDERMONDE_TOL_ = 1e-8
"""Maximum residual ``max|V g - r|`` accepted from the Vandermonde solve."""

DEDUPE_TOL_ = 1e-8
"""Minimum gap between eigenvalues requested for a constructed student."""


class Structure(enum.Enum):
    """Parameterization of the transition matrix A."""

    GENERAL = 'general'
    SYMMETRIC = 'symmetric'
    DIAGONAL = 'diagonal'


def _readonly(value: numpy.ndarray) -> numpy.ndarray:
    value.setflags(write=False)

    return value


class LinearRnnParams(object):
    """
    Immutable parameters (A, B, C) of a single-input single-output linear RNN.

    ``c`` stores the output map C as a vector (that is, C transposed). Symmetric
    structure means A equals its transpose exactly; its free parameters are the
    d(d+1)/2 entries of the upper triangle. Diagonal structure means every
    off-diagonal entry of A is exactly zero; its free parameters are the d
    diagonal entries.

    Attributes:
        a (numpy.ndarray): d x d transition matrix
        b (numpy.ndarray): input map, length d
        c (numpy.ndarray): output map (transposed), length d
        structure (Structure): parameterization of ``a``
    """

    def __init__(self, a: typing.Any, b: typing.Any, c: typing.Any, structure: Structure = Structure.GENERAL) -> None:
        super(LinearRnnParams, self).__init__()

        a = numpy.array(a, dtype=numpy.float64, ndmin=2)
        b = numpy.array(b, dtype=numpy.float64).reshape(-1)
        c = numpy.array(c, dtype=numpy.float64).reshape(-1)
        structure = Structure(structure)

        if not is_valid_square(a):
            raise InvalidParamsError('extrapolab.lds.LinearRnnParams - Transition matrix must be square, got shape {0}'.format(a.shape))
        if (b.shape != (a.shape[0], )) or (c.shape != (a.shape[0], )):
            raise InvalidParamsError('extrapolab.lds.LinearRnnParams - Inconsistent dimensions: a {0}, b {1}, c {2}'.format(a.shape, b.shape, c.shape))
        if not (is_valid_array(a) and is_valid_array(b) and is_valid_array(c)):
            raise InvalidParamsError('extrapolab.lds.LinearRnnParams - Non-finite entries')
        if (structure is Structure.SYMMETRIC) and not is_valid_symmetric(a):
            raise InvalidParamsError('extrapolab.lds.LinearRnnParams - Symmetric structure requires A == A^T')
        if (structure is Structure.DIAGONAL) and not is_valid_diagonal(a):
            raise InvalidParamsError('extrapolab.lds.LinearRnnParams - Diagonal structure requires zero off-diagonal entries')

        self.a = _readonly(a)
        self.b = _readonly(b)
        self.c = _readonly(c)
        self.structure = structure

    @property
    def d(self) -> int:
        return int(self.a.shape[0])

    def __repr__(self) -> str:
        return 'LinearRnnParams(d={0}, structure={1})'.format(self.d, self.structure.value)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LinearRnnParams):
            return NotImplemented

        return (self.structure is other.structure) and numpy.array_equal(self.a, other.a) and numpy.array_equal(self.b, other.b) and numpy.array_equal(self.c, other.c)

    def replace(self, a: typing.Any = None, b: typing.Any = None, c: typing.Any = None, structure: typing.Optional[Structure] = None) -> 'LinearRnnParams':
        return LinearRnnParams(
            self.a if a is None else a,
            self.b if b is None else b,
            self.c if c is None else c,
            structure=self.structure if structure is None else structure,
        )

    def free_vector(self) -> numpy.ndarray:
        """Return the free parameters as one vector: the free entries of A, then B, then C."""
        return numpy.concatenate([pack_free_a(self.a, self.structure), self.b, self.c])

    @classmethod
    def from_free_vector(cls, vector: numpy.ndarray, d: int, structure: Structure) -> 'LinearRnnParams':
        n_a = free_size_a(d, structure)
        vector = numpy.asarray(vector, dtype=numpy.float64)

        return cls(unpack_free_a(vector[:n_a], d, structure), vector[n_a:n_a + d], vector[n_a + d:n_a + 2 * d], structure=structure)

    def to_dict(self) -> typing.Dict[str, typing.Any]:
        return {
            'd': self.d,
            'structure': self.structure.value,
            'a': self.a.reshape(-1).tolist(),
            'b': self.b.tolist(),
            'c': self.c.tolist(),
        }

    @classmethod
    def from_dict(cls, obj: typing.Dict[str, typing.Any]) -> 'LinearRnnParams':
        try:
            d = int(obj['d'])
            a = numpy.asarray(obj['a'], dtype=numpy.float64).reshape(d, d)
            return cls(a, obj['b'], obj['c'], structure=Structure(obj.get('structure', Structure.GENERAL.value)))
        except (KeyError, TypeError, ValueError) as exception:
            if isinstance(exception, InvalidParamsError):
                raise
            raise InvalidParamsError('extrapolab.lds.LinearRnnParams.from_dict - Malformed document: {0}'.format(exception))


def free_size_a(d: int, structure: Structure) -> int:
    if structure is Structure.SYMMETRIC:
        return d * (d + 1) // 2
    elif structure is Structure.DIAGONAL:
        return d
    else:
        return d * d

def pack_free_a(a: numpy.ndarray, structure: Structure) -> numpy.ndarray:
    if structure is Structure.SYMMETRIC:
        return a[numpy.triu_indices(a.shape[0])]
    elif structure is Structure.DIAGONAL:
        return numpy.diag(a).copy()
    else:
        return a.reshape(-1).copy()

def unpack_free_a(values: numpy.ndarray, d: int, structure: Structure) -> numpy.ndarray:
    if structure is Structure.SYMMETRIC:
        rows, cols = numpy.triu_indices(d)
        a = numpy.zeros((d, d))
        a[rows, cols] = values
        a[cols, rows] = values
        return a
    elif structure is Structure.DIAGONAL:
        return numpy.diag(values)
    else:
        return numpy.asarray(values, dtype=numpy.float64).reshape(d, d)


class ImpulseResponse(object):
    """
    A finite prefix (CB, CAB, ..., CA^{n-1}B) of an impulse response.

    Attributes:
        values (numpy.ndarray): read-only vector of length n
    """

    def __init__(self, values: typing.Any) -> None:
        super(ImpulseResponse, self).__init__()

        values = numpy.array(values, dtype=numpy.float64).reshape(-1)
        if len(values) < 1:
            raise InvalidParamsError('extrapolab.lds.ImpulseResponse - Empty impulse response')
        if not is_valid_array(values):
            raise InvalidParamsError('extrapolab.lds.ImpulseResponse - Non-finite entries')

        self.values = _readonly(values)

    @property
    def n(self) -> int:
        return len(self.values)

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, index: typing.Any) -> typing.Any:
        return self.values[index]

    def __repr__(self) -> str:
        return 'ImpulseResponse(n={0})'.format(self.n)

    def prefix(self, n: int) -> 'ImpulseResponse':
        return ImpulseResponse(self.values[:n])


def _transition_matvec(theta: LinearRnnParams, transpose: bool = False) -> typing.Callable[[numpy.ndarray], numpy.ndarray]:
    # Symmetric and diagonal A are multiplied without transposing so that
    # forward and adjoint states of a balanced system agree bitwise.
    if transpose and (theta.structure is Structure.GENERAL):
        a = theta.a.T
    else:
        a = theta.a

    return lambda v: a @ v


def forward_states(theta: LinearRnnParams, n: int) -> numpy.ndarray:
    """
    Return the n x d matrix whose row j is A^j B, computed by the recurrence
    v[0] = B, v[j+1] = A v[j].

    Raises:
        NonFiniteError: on the first row containing a non-finite entry
    """
    matvec = _transition_matvec(theta)
    states = numpy.empty((n, theta.d))

    v = theta.b.copy()
    for j in range(n):
        if not is_valid_array(v):
            raise NonFiniteError('extrapolab.lds.forward_states', j)
        states[j] = v
        v = matvec(v)

    return states

def adjoint_states(theta: LinearRnnParams, n: int) -> numpy.ndarray:
    """Return the n x d matrix whose row j is (A^T)^j C^T."""
    matvec = _transition_matvec(theta, transpose=True)
    states = numpy.empty((n, theta.d))

    v = theta.c.copy()
    for j in range(n):
        if not is_valid_array(v):
            raise NonFiniteError('extrapolab.lds.adjoint_states', j)
        states[j] = v
        v = matvec(v)

    return states


def impulse_response(theta: LinearRnnParams, n: int) -> ImpulseResponse:
    """
    Compute the first ``n`` entries of the impulse response, values[j] = C A^j B.

    Never forms matrix powers: v[0] = B, v[j+1] = A v[j], values[j] = C . v[j],
    in O(n d^2).

    Args:
        theta (LinearRnnParams): system
        n (int): horizon (n >= 1)

    Returns:
        ImpulseResponse: the prefix of length n

    Raises:
        NonFiniteError: with the first offending index, if the recurrence overflows
    """
    if n < 1:
        raise InvalidParamsError('extrapolab.lds.impulse_response - Horizon must be positive, got {0}'.format(n))

    matvec = _transition_matvec(theta)
    values = numpy.empty(n)

    v = theta.b.copy()
    for j in range(n):
        value = float(theta.c @ v)
        if not (numpy.isfinite(value) and is_valid_array(v)):
            raise NonFiniteError('extrapolab.lds.impulse_response', j)
        values[j] = value
        v = matvec(v)

    return ImpulseResponse(values)


def impulse_response_padded(theta: LinearRnnParams, n: int) -> numpy.ndarray:
    """Like :func:`impulse_response`, but entries from the first overflow onwards are ``inf``."""
    try:
        return impulse_response(theta, n).values.copy()
    except NonFiniteError as exception:
        values = numpy.full(n, numpy.inf)
        if exception.index:
            values[:exception.index] = impulse_response(theta, exception.index).values

        return values


def rnn_forward_last(theta: LinearRnnParams, x: typing.Any) -> float:
    """
    Return the last-step output sum_j C A^{k-1-j} B x[j] of the state recurrence
    s[t+1] = A s[t] + B x[t], s[0] = 0.

    Raises:
        NonFiniteError: if the state overflows
    """
    x = numpy.asarray(x, dtype=numpy.float64).reshape(-1)
    if len(x) < 1:
        raise InvalidParamsError('extrapolab.lds.rnn_forward_last - Empty input sequence')

    matvec = _transition_matvec(theta)

    s = numpy.zeros(theta.d)
    for t in range(len(x)):
        s = matvec(s) + theta.b * x[t]
        if not is_valid_array(s):
            raise NonFiniteError('extrapolab.lds.rnn_forward_last', t)

    y = float(theta.c @ s)
    if not numpy.isfinite(y):
        raise NonFiniteError('extrapolab.lds.rnn_forward_last', len(x) - 1)

    return y

def rnn_states_batch(theta: LinearRnnParams, inputs: numpy.ndarray) -> numpy.ndarray:
    """
    Run the recurrence on every row of an N x k input matrix at once.

    Returns:
        numpy.ndarray: (k + 1) x N x d array of states s[0..k]
    """
    inputs = numpy.asarray(inputs, dtype=numpy.float64)
    n_rows, k = inputs.shape

    states = numpy.zeros((k + 1, n_rows, theta.d))
    for t in range(k):
        states[t + 1] = states[t] @ theta.a.T + numpy.outer(inputs[:, t], theta.b)
        if not is_valid_array(states[t + 1]):
            raise NonFiniteError('extrapolab.lds.rnn_states_batch', t)

    return states


def rnn_forward_last_batch(theta: LinearRnnParams, inputs: numpy.ndarray) -> numpy.ndarray:
    return rnn_states_batch(theta, inputs)[-1] @ theta.c


def diagonalize_balanced(theta: LinearRnnParams, tol_balance: float = TOL_BALANCE_, eig_tol: float = EIG_TOL_) -> LinearRnnParams:
    """
    Return the equivalent diagonal system of a balanced system with symmetric A.

    With A = U diag(w) U^T (cyclic Jacobi), the result is A' = diag(w),
    B' = U^T B, C' = C U. Since U is orthogonal, the impulse response and
    balancedness are preserved up to round-off. Eigenvalues are ordered
    descending, ties broken by original index.

    Raises:
        NotSymmetricError: unless the structure is Symmetric or Diagonal
        NotBalancedError: if max|B - C^T| > tol_balance
        JacobiNoConvergenceError: if the eigensolver exceeds its sweep limit
    """
    if theta.structure is Structure.GENERAL:
        raise NotSymmetricError('extrapolab.lds.diagonalize_balanced - Expected a symmetric or diagonal structure, got general')
    if not is_valid_balanced(theta.b, theta.c, tol_balance):
        raise NotBalancedError('extrapolab.lds.diagonalize_balanced - System is not balanced within {0!r}'.format(tol_balance))

    eigenvalues, u = jacobi_eigh(theta.a, tol=eig_tol)

    order = numpy.argsort(-eigenvalues, kind='stable')
    eigenvalues = eigenvalues[order]
    u = u[:, order]

    return LinearRnnParams(numpy.diag(eigenvalues), u.T @ theta.b, u.T @ theta.c, structure=Structure.DIAGONAL)


def balancedness_ratio(theta: LinearRnnParams) -> float:
    """
    Return ||B - C^T|| / ||B + C^T|| (Euclidean norms).

    Raises:
        DegenerateDenominatorError: if B + C^T = 0
    """
    denominator = float(numpy.linalg.norm(theta.b + theta.c))
    if denominator == 0.0:
        raise DegenerateDenominatorError('extrapolab.lds.balancedness_ratio - ||B + C^T|| is zero')

    return float(numpy.linalg.norm(theta.b - theta.c)) / denominator


def norm_gap(theta: LinearRnnParams) -> float:
    """Return ||B||^2 - ||C||^2, which gradient flow conserves."""
    return float(theta.b @ theta.b) - float(theta.c @ theta.c)


def construct_nonextrapolating_student(teacher_ir: ImpulseResponse, d: int, tail: typing.Any, eigs: typing.Any, vandermonde_tol: float = VANDERMONDE_TOL_) -> LinearRnnParams:
    """
    Construct a diagonal student whose first k impulse-response entries equal
    ``teacher_ir`` and whose entries k..d-1 equal ``tail``.

    The coefficients g_i = C_i B_i solve the d x d Vandermonde system V g = r
    with V[j][i] = eigs[i] ** j and r = (teacher_ir, tail). They are split as
    B_i = sign(g_i) sqrt|g_i|, C_i = sqrt|g_i|.

    Args:
        teacher_ir (ImpulseResponse): the k entries to reproduce
        d (int): student dimension, d > k
        tail (array-like): the d - k entries that follow
        eigs (array-like): d pairwise distinct eigenvalues

    Raises:
        IllConditionedVandermondeError: if the solve residual exceeds vandermonde_tol
    """
    k = teacher_ir.n
    tail = numpy.asarray(tail, dtype=numpy.float64).reshape(-1)
    eigs = numpy.asarray(eigs, dtype=numpy.float64).reshape(-1)

    if d <= k:
        raise InvalidParamsError('extrapolab.lds.construct_nonextrapolating_student - Need d > k, got d={0}, k={1}'.format(d, k))
    if len(tail) != d - k:
        raise InvalidParamsError('extrapolab.lds.construct_nonextrapolating_student - Tail must have {0} entries, got {1}'.format(d - k, len(tail)))
    if len(eigs) != d:
        raise InvalidParamsError('extrapolab.lds.construct_nonextrapolating_student - Need {0} eigenvalues, got {1}'.format(d, len(eigs)))
    if not is_valid_distinct(eigs, DEDUPE_TOL_):
        raise InvalidParamsError('extrapolab.lds.construct_nonextrapolating_student - Eigenvalues must be pairwise distinct')

    target = numpy.concatenate([teacher_ir.values, tail])
    g, residual = solve_with_residual(vandermonde(eigs), target)

    if not (numpy.isfinite(residual) and (residual <= vandermonde_tol)):
        raise IllConditionedVandermondeError('extrapolab.lds.construct_nonextrapolating_student', residual, vandermonde_tol)

    magnitude = numpy.sqrt(numpy.abs(g))

    return LinearRnnParams(numpy.diag(eigs), numpy.sign(g) * magnitude, magnitude, structure=Structure.DIAGONAL)


class ExtrapolationError(typing.NamedTuple):
    """Tail error of a student impulse response against a teacher's."""

    error: float
    """max |student[j] - teacher[j]| over the window."""

    baseline: float
    """Error of the trivial all-zero solution, max |teacher[j]| over the window."""

    non_extrapolating: bool
    """True when ``error`` is worse than (strictly exceeds) ``baseline``."""


def default_tail_window(k: int) -> typing.Tuple[int, int]:
    """Return the default window [k, max(4k, 200)) for a training length k."""
    return k, max(4 * k, 200)


def extrapolation_error(student_ir: typing.Any, teacher_ir: typing.Any, tail_start: int, tail_end: int) -> ExtrapolationError:
    """
    Return the l-infinity error on the tail window [tail_start, tail_end).

    Either input may be an ImpulseResponse or a plain vector (an ``inf`` entry
    marks an overflowed student).

    Raises:
        WindowOutOfRangeError: unless 0 <= tail_start < tail_end <= both horizons
    """
    student = numpy.asarray(getattr(student_ir, 'values', student_ir), dtype=numpy.float64)
    teacher = numpy.asarray(getattr(teacher_ir, 'values', teacher_ir), dtype=numpy.float64)

    if not is_valid_window(tail_start, tail_end, min(len(student), len(teacher))):
        raise WindowOutOfRangeError('extrapolab.lds.extrapolation_error - Window [{0}, {1}) out of range for horizons {2} and {3}'.format(tail_start, tail_end, len(student), len(teacher)))

    error = float(numpy.max(numpy.abs(student[tail_start:tail_end] - teacher[tail_start:tail_end])))
    baseline = float(numpy.max(numpy.abs(teacher[tail_start:tail_end])))

    return ExtrapolationError(error, baseline, bool(error > baseline))
