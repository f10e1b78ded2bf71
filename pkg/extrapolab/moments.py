# -*- coding: utf-8 -*-
#
# extrapolab: extrapolab/moments.py
#
# Copyright (c) 2026, extrapolab developers
# All rights reserved.

"""
Moment-problem toolkit for balanced linear RNNs.

A balanced diagonal system (B = C^T, A = diag(a)) with CB = 1 defines a
probability distribution on its eigenvalues, p_i = C_i B_i, and its impulse
response is the moment sequence of that distribution:

    C A^j B = sum_i p_i a_i^j = E[Z^j]

so questions about extrapolation become questions about which distributions
share a prefix of moments.

Key Classes:
    AtomicDistribution: finitely many atoms with probability weights
    MomentVector: moments m_0 = 1, m_1, ..., m_{order-1}
    ExtrapolationReport: per-index gaps between a student and a teacher

Key Functions:
    dist_from_balanced(): the distribution of a balanced diagonal system
    moments(): moments of a distribution
    recover_atomic(), recover_atomic_auto(): Prony/Hankel recovery of atoms and weights
    wasserstein_p(), wasserstein_1_cdf(): 1-D optimal transport distances
    verify_extrapolation(): compare two systems over a horizon
    construct_moment_confounders(): two distributions agreeing on all but the last moment

Example Usage:
    >>> from extrapolab import moments
    >>> dist = moments.AtomicDistribution([0.2, 0.8], [0.5, 0.5])
    >>> m = moments.moments(dist, 4)
    >>> moments.recover_atomic(m, 2).atoms
    array([0.2, 0.8])
"""

import logging
import typing

import numpy
import numpy.polynomial.polynomial
import scipy.linalg
import scipy.optimize
import scipy.stats

from .exceptions import ComplexOrOutOfRangeRootsError, CustomException, IllConditionedVandermondeError, InvalidParamsError, NegativeWeightError, NotBalancedError, NotDiagonalError, RankDeficientHankelError, SearchFailedError, ZeroSystemError
from .lds import TOL_BALANCE_, LinearRnnParams, Structure, diagonalize_balanced, impulse_response_padded
from .linalg import lu_min_pivot, solve_with_residual, vandermonde
from .validators import is_valid_array, is_valid_balanced, is_valid_diagonal, is_valid_symmetric

logger = logging.getLogger(__name__)

DEDUPE_TOL_ = 1e-8
"""Atoms closer than this are merged (weights summed)."""

WEIGHT_TOL_ = 1e-10
"""Weights in [-WEIGHT_TOL_, 0) are clamped to zero; more negative ones are an error."""

CB_ZERO_TOL_ = 1e-12
"""A system with |CB| at or below this has an identically zero impulse response."""

SUM_TOL_ = 1e-6
"""Weights summing to within this of one are renormalized."""

PIVOT_TOL_ = 1e-10
"""Hankel rank threshold, relative to the largest moment magnitude."""

BRACKET_PAD_ = 0.1
"""Padding of the root bracket around a known support."""

ROOT_TOL_ = 1e-12
"""Absolute accuracy of the polished polynomial roots."""

VANDERMONDE_TOL_ = 1e-8
"""Maximum residual accepted from the weight solve."""

CONFOUNDER_GAP_ = 1e-3
"""Minimum disagreement of the last moment of two confounders."""

CONFOUNDER_MATCH_TOL_ = 1e-9
"""Maximum disagreement of the shared moments of two confounders."""

CONFOUNDER_MAX_ITER_ = 50
"""Damped Newton iterations per correction."""

CONFOUNDER_MAX_RESTARTS_ = 20
"""Fresh starting distributions tried before giving up."""

CONFOUNDER_STEP_ = 0.02
"""Arc-length step along the solution family."""

CONFOUNDER_MAX_STEPS_ = 200
"""Continuation steps per restart."""

W1_AGREEMENT_TOL_ = 1e-12
"""Largest disagreement (relative above 1) between the quantile-coupling and CDF-area W_1."""


class AtomicDistribution(object):
    """
    A probability distribution on finitely many real atoms.

    The constructor sorts atoms, merges atoms closer than ``dedupe_tol``,
    clamps weights in [-weight_tol, 0) to zero and renormalizes weights that
    sum to within 1e-6 of one.

    Attributes:
        atoms (numpy.ndarray): ascending, pairwise distinct
        weights (numpy.ndarray): non-negative, summing to one

    Raises:
        NegativeWeightError: if a weight is below -weight_tol
        InvalidParamsError: on empty, mismatched, non-finite or unnormalized input
    """

    def __init__(self, atoms: typing.Any, weights: typing.Any, dedupe_tol: float = DEDUPE_TOL_, weight_tol: float = WEIGHT_TOL_) -> None:
        super(AtomicDistribution, self).__init__()

        atoms = numpy.array(atoms, dtype=numpy.float64).reshape(-1)
        weights = numpy.array(weights, dtype=numpy.float64).reshape(-1)

        if (len(atoms) < 1) or (atoms.shape != weights.shape):
            raise InvalidParamsError('extrapolab.moments.AtomicDistribution - Need matching non-empty atoms and weights, got {0} and {1}'.format(len(atoms), len(weights)))
        if not (is_valid_array(atoms) and is_valid_array(weights)):
            raise InvalidParamsError('extrapolab.moments.AtomicDistribution - Non-finite entries')
        if numpy.any(weights < -weight_tol):
            raise NegativeWeightError('extrapolab.moments.AtomicDistribution - Negative weight {0!r}'.format(float(numpy.min(weights))))

        weights = numpy.maximum(weights, 0.0)

        order = numpy.argsort(atoms, kind='stable')
        atoms = atoms[order]
        weights = weights[order]

        merged_atoms = [atoms[0]]
        merged_weights = [weights[0]]
        for (atom, weight) in zip(atoms[1:], weights[1:]):
            if atom - merged_atoms[-1] <= dedupe_tol:
                merged_weights[-1] += weight
            else:
                merged_atoms.append(atom)
                merged_weights.append(weight)

        atoms = numpy.array(merged_atoms)
        weights = numpy.array(merged_weights)

        total = float(numpy.sum(weights))
        if abs(total - 1.0) > SUM_TOL_:
            raise InvalidParamsError('extrapolab.moments.AtomicDistribution - Weights sum to {0!r}, not 1'.format(total))

        self.atoms = atoms
        self.weights = weights / total

    @property
    def n(self) -> int:
        return len(self.atoms)

    def __len__(self) -> int:
        return len(self.atoms)

    def __repr__(self) -> str:
        return 'AtomicDistribution(n={0})'.format(self.n)

    def to_dict(self) -> typing.Dict[str, typing.Any]:
        return {
            'atoms': self.atoms.tolist(),
            'weights': self.weights.tolist(),
        }

    @classmethod
    def from_dict(cls, obj: typing.Dict[str, typing.Any]) -> 'AtomicDistribution':
        try:
            return cls(obj['atoms'], obj['weights'])
        except (KeyError, TypeError) as exception:
            raise InvalidParamsError('extrapolab.moments.AtomicDistribution.from_dict - Malformed document: {0}'.format(exception))


class MomentVector(object):
    """
    Moments m_0, ..., m_{order-1} of a probability distribution (m_0 = 1).
    """

    def __init__(self, values: typing.Any) -> None:
        super(MomentVector, self).__init__()

        values = numpy.array(values, dtype=numpy.float64).reshape(-1)

        if len(values) < 1:
            raise InvalidParamsError('extrapolab.moments.MomentVector - Empty moment vector')
        if not is_valid_array(values):
            raise InvalidParamsError('extrapolab.moments.MomentVector - Non-finite entries')
        if abs(values[0] - 1.0) > SUM_TOL_:
            raise InvalidParamsError('extrapolab.moments.MomentVector - m_0 must be 1, got {0!r}'.format(float(values[0])))

        values[0] = 1.0
        self.values = values

    @property
    def order(self) -> int:
        return len(self.values)

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, index: typing.Any) -> typing.Any:
        return self.values[index]

    def to_dict(self) -> typing.Dict[str, typing.Any]:
        return {
            'moments': self.values.tolist(),
        }

    @classmethod
    def from_dict(cls, obj: typing.Dict[str, typing.Any]) -> 'MomentVector':
        try:
            return cls(obj['moments'])
        except (KeyError, TypeError) as exception:
            raise InvalidParamsError('extrapolab.moments.MomentVector.from_dict - Malformed document: {0}'.format(exception))


def dist_from_balanced(theta: LinearRnnParams, tol_balance: float = TOL_BALANCE_, cb_zero_tol: float = CB_ZERO_TOL_, weight_tol: float = WEIGHT_TOL_) -> AtomicDistribution:
    """
    Return the distribution p_i = C_i B_i / (CB) on the eigenvalues A_ii of a
    balanced diagonal system. Atoms whose weight is at most ``weight_tol`` are
    dropped.

    Raises:
        NotDiagonalError: if A has a non-zero off-diagonal entry
        NotBalancedError: if max|B - C^T| > tol_balance
        ZeroSystemError: if |CB| <= cb_zero_tol
    """
    if not is_valid_diagonal(theta.a):
        raise NotDiagonalError('extrapolab.moments.dist_from_balanced - Transition matrix is not diagonal')
    if not is_valid_balanced(theta.b, theta.c, tol_balance):
        raise NotBalancedError('extrapolab.moments.dist_from_balanced - System is not balanced within {0!r}'.format(tol_balance))

    cb = float(theta.c @ theta.b)
    if abs(cb) <= cb_zero_tol:
        raise ZeroSystemError('extrapolab.moments.dist_from_balanced - CB = {0!r}; the impulse response is identically zero'.format(cb))

    p = theta.c * theta.b / cb
    keep = p > weight_tol

    return AtomicDistribution(numpy.diag(theta.a)[keep], p[keep])


def balanced_dist(theta: LinearRnnParams) -> AtomicDistribution:
    """Like :func:`dist_from_balanced`, diagonalizing a symmetric system first."""
    if is_valid_diagonal(theta.a):
        return dist_from_balanced(theta)
    elif theta.structure is Structure.SYMMETRIC:
        return dist_from_balanced(diagonalize_balanced(theta))
    elif is_valid_symmetric(theta.a):
        return dist_from_balanced(diagonalize_balanced(LinearRnnParams(theta.a, theta.b, theta.c, structure=Structure.SYMMETRIC)))
    else:
        raise NotDiagonalError('extrapolab.moments.balanced_dist - Transition matrix is neither diagonal nor symmetric')


def moments(dist: AtomicDistribution, order: int) -> MomentVector:
    """Return m_j = sum_i w_i a_i^j for j = 0, ..., order - 1."""
    if order < 1:
        raise InvalidParamsError('extrapolab.moments.moments - Order must be positive, got {0}'.format(order))

    return MomentVector(vandermonde(dist.atoms, order) @ dist.weights)


def _as_moment_values(m: typing.Any) -> numpy.ndarray:
    return numpy.asarray(getattr(m, 'values', m), dtype=numpy.float64).reshape(-1)


def _real_roots(coefficients: numpy.ndarray, lo: float, hi: float, n: int) -> numpy.ndarray:
    # coefficients in increasing degree order, leading coefficient 1
    derivative = numpy.polynomial.polynomial.polyder(coefficients)

    def f(x: float) -> float:
        return float(numpy.polynomial.polynomial.polyval(x, coefficients))

    grid_size = 64 * n + 1
    roots = []

    for _ in range(4):
        grid = numpy.linspace(lo, hi, grid_size)
        values = numpy.polynomial.polynomial.polyval(grid, coefficients)

        roots = [float(x) for (x, value) in zip(grid, values) if value == 0.0]
        for i in numpy.nonzero(values[:-1] * values[1:] < 0.0)[0]:
            root = scipy.optimize.brentq(f, grid[i], grid[i + 1], xtol=ROOT_TOL_, rtol=4.0 * numpy.finfo(numpy.float64).eps)

            # Newton polish
            for _ in range(3):
                slope = float(numpy.polynomial.polynomial.polyval(root, derivative))
                if slope == 0.0:
                    break
                candidate = root - f(root) / slope
                if not (grid[i] <= candidate <= grid[i + 1]) or abs(f(candidate)) >= abs(f(root)):
                    break
                root = candidate

            roots.append(root)

        if len(roots) >= n:
            break

        grid_size = 4 * (grid_size - 1) + 1

    return numpy.sort(numpy.array(roots))


def recover_atomic(m: typing.Any, n: int, support: typing.Optional[typing.Tuple[float, float]] = None, pivot_tol: float = PIVOT_TOL_) -> AtomicDistribution:
    """
    Recover an n-atomic distribution from its moments m_0, ..., m_{2n-1}.

    The monic polynomial x^n + c_{n-1} x^{n-1} + ... + c_0 whose roots are the
    atoms solves the Hankel system H c = -(m_n, ..., m_{2n-1}) with
    H[i][j] = m_{i+j}. Its real roots are isolated by sign changes on a grid
    over the bracket (``support`` padded by 0.1, or the Cauchy root bound),
    refined by Brent's method and polished by Newton steps; the weights then
    solve the Vandermonde system V w = (m_0, ..., m_{n-1}).

    Rank is checked on m_0, ..., m_{2n-2} first, so a length 2n-1 vector is
    enough to detect that fewer than n atoms are present.

    Args:
        m (MomentVector or array-like): the moments
        n (int): number of atoms
        support (tuple, optional): (lo, hi) interval known to contain the atoms

    Raises:
        RankDeficientHankelError: if the smallest Hankel pivot is at most pivot_tol * max|m|
        ComplexOrOutOfRangeRootsError: if fewer than n real roots lie in the bracket
        NegativeWeightError: if a recovered weight is negative beyond tolerance
        IllConditionedVandermondeError: if the weight solve residual is too large
    """
    values = _as_moment_values(m)

    if n < 1:
        raise InvalidParamsError('extrapolab.moments.recover_atomic - Atom count must be positive, got {0}'.format(n))
    if len(values) < 2 * n - 1:
        raise InvalidParamsError('extrapolab.moments.recover_atomic - Need at least {0} moments for n={1}, got {2}'.format(2 * n - 1, n, len(values)))

    hankel = scipy.linalg.hankel(values[:n], values[n - 1:2 * n - 1])
    scale = float(numpy.max(numpy.abs(values[:2 * n - 1])))
    pivot, lu = lu_min_pivot(hankel)

    if pivot <= pivot_tol * scale:
        raise RankDeficientHankelError('extrapolab.moments.recover_atomic', n, pivot)

    if len(values) < 2 * n:
        raise InvalidParamsError('extrapolab.moments.recover_atomic - Need {0} moments for n={1}, got {2}'.format(2 * n, n, len(values)))

    coefficients = numpy.append(scipy.linalg.lu_solve(lu, -values[n:2 * n]), 1.0)

    if support is None:
        bound = 1.0 + float(numpy.max(numpy.abs(coefficients[:-1])))
        lo, hi = -bound, bound
    else:
        lo, hi = float(support[0]) - BRACKET_PAD_, float(support[1]) + BRACKET_PAD_

    roots = _real_roots(coefficients, lo, hi, n)
    if len(roots) != n:
        raise ComplexOrOutOfRangeRootsError('extrapolab.moments.recover_atomic - Found {0} real roots in [{1!r}, {2!r}], expected {3}'.format(len(roots), lo, hi, n))

    weights, residual = solve_with_residual(vandermonde(roots), values[:n])
    if not (residual <= VANDERMONDE_TOL_ * max(1.0, scale)):
        raise IllConditionedVandermondeError('extrapolab.moments.recover_atomic', residual, VANDERMONDE_TOL_)

    dist = AtomicDistribution(roots, weights)

    if logger.isEnabledFor(logging.DEBUG):
        mismatch = float(numpy.max(numpy.abs(moments(dist, 2 * n).values - values[:2 * n])))
        logger.debug('[recover] n={0}, moment mismatch {1!r}'.format(n, mismatch))

    return dist


def recover_atomic_auto(m: typing.Any, n_max: typing.Optional[int] = None, support: typing.Optional[typing.Tuple[float, float]] = None) -> AtomicDistribution:
    """
    Try :func:`recover_atomic` for n = n_max, n_max - 1, ..., 1 and return the
    first recovery whose Hankel matrix has full rank. ``n_max`` defaults to
    the largest n the moment vector supports.
    """
    values = _as_moment_values(m)
    if n_max is None:
        n_max = (len(values) + 1) // 2

    for n in range(n_max, 0, -1):
        try:
            return recover_atomic(values, n, support=support)
        except RankDeficientHankelError as exception:
            logger.debug('[recover] {0}; retrying with {1} atom{2}'.format(exception, n - 1, '' if n == 2 else 's'))

    raise RankDeficientHankelError('extrapolab.moments.recover_atomic_auto', 1, 0.0)


def wasserstein_1_cdf(d1: AtomicDistribution, d2: AtomicDistribution) -> float:
    """Return W_1 as the area between the two cumulative distribution functions."""
    return float(scipy.stats.wasserstein_distance(d1.atoms, d2.atoms, d1.weights, d2.weights))


def wasserstein_p(d1: AtomicDistribution, d2: AtomicDistribution, p: float = 1.0) -> float:
    """
    Return the p-Wasserstein distance of two distributions on the real line.

    In one dimension the monotone (quantile) coupling is optimal: both
    cumulative weight sequences are merged into common quantile slices, and
    each slice moves its mass between the atoms that own it on either side.
    """
    if not p >= 1:
        raise InvalidParamsError('extrapolab.moments.wasserstein_p - Order must be at least 1, got {0!r}'.format(p))

    cdf_1 = numpy.cumsum(d1.weights)
    cdf_2 = numpy.cumsum(d2.weights)
    cdf_1[-1] = 1.0
    cdf_2[-1] = 1.0

    levels = numpy.unique(numpy.concatenate([cdf_1, cdf_2]))
    previous = numpy.concatenate([[0.0], levels[:-1]])
    masses = levels - previous
    midpoints = (levels + previous) / 2.0

    index_1 = numpy.minimum(numpy.searchsorted(cdf_1, midpoints, side='left'), d1.n - 1)
    index_2 = numpy.minimum(numpy.searchsorted(cdf_2, midpoints, side='left'), d2.n - 1)

    distances = numpy.abs(d1.atoms[index_1] - d2.atoms[index_2])
    distance = float(numpy.sum(masses * distances ** p)) ** (1.0 / p)

    if __debug__ and (p == 1):
        cross_check = wasserstein_1_cdf(d1, d2)
        assert abs(distance - cross_check) <= W1_AGREEMENT_TOL_ * max(1.0, cross_check), 'quantile coupling {0!r} disagrees with CDF area {1!r}'.format(distance, cross_check)

    return distance


class ExtrapolationReport(typing.NamedTuple):
    """Comparison of a student and a teacher impulse response over a horizon."""

    gaps: numpy.ndarray
    """|student[j] - teacher[j]| for j < horizon (inf after a student overflow)."""

    first_k_match: bool
    extrapolates: bool

    student_dist: typing.Optional[AtomicDistribution] = None
    teacher_dist: typing.Optional[AtomicDistribution] = None
    w1: typing.Optional[float] = None

    @property
    def max_gap(self) -> float:
        return float(numpy.max(self.gaps))

    def to_dict(self) -> typing.Dict[str, typing.Any]:
        return {
            'gaps': [float(gap) if numpy.isfinite(gap) else None for gap in self.gaps],
            'first_k_match': self.first_k_match,
            'extrapolates': self.extrapolates,
            'student_dist': None if self.student_dist is None else self.student_dist.to_dict(),
            'teacher_dist': None if self.teacher_dist is None else self.teacher_dist.to_dict(),
            'w1': self.w1,
        }


def _try_balanced_dist(theta: LinearRnnParams) -> typing.Optional[AtomicDistribution]:
    try:
        return balanced_dist(theta)
    except CustomException as exception:
        logger.debug('[verify] No distribution: {0}'.format(exception))
        return None


def verify_extrapolation(student: LinearRnnParams, teacher: LinearRnnParams, k: int, horizon: int, eps: float) -> ExtrapolationReport:
    """
    Compare the impulse responses of ``student`` and ``teacher`` on [0, horizon).

    ``first_k_match`` holds when every gap below k is at most eps,
    ``extrapolates`` when every gap below the horizon is. When both systems
    are balanced and diagonalizable their distributions and W_1 distance are
    attached as diagnostics.
    """
    if not (1 <= horizon) or not (0 <= k <= horizon):
        raise InvalidParamsError('extrapolab.moments.verify_extrapolation - Need 0 <= k <= horizon and horizon >= 1, got k={0}, horizon={1}'.format(k, horizon))

    gaps = numpy.abs(impulse_response_padded(student, horizon) - impulse_response_padded(teacher, horizon))
    gaps = numpy.where(numpy.isnan(gaps), numpy.inf, gaps)

    student_dist = _try_balanced_dist(student)
    teacher_dist = _try_balanced_dist(teacher)
    w1 = None
    if (student_dist is not None) and (teacher_dist is not None):
        w1 = wasserstein_p(student_dist, teacher_dist, 1.0)

    return ExtrapolationReport(
        gaps=gaps,
        first_k_match=bool(numpy.all(gaps[:k] <= eps)),
        extrapolates=bool(numpy.all(gaps <= eps)),
        student_dist=student_dist,
        teacher_dist=teacher_dist,
        w1=w1,
    )


class MomentConfounders(typing.NamedTuple):
    first: AtomicDistribution
    second: AtomicDistribution
    gap: float


def _project(z: numpy.ndarray, dh: int) -> numpy.ndarray:
    # atoms into [-1, 1], weights onto the probability simplex
    atoms = numpy.clip(z[:dh], -1.0, 1.0)

    weights = z[dh:]
    ordered = numpy.sort(weights)[::-1]
    cumulative = numpy.cumsum(ordered) - 1.0
    rho = numpy.nonzero(ordered - cumulative / numpy.arange(1, dh + 1) > 0)[0][-1]
    weights = numpy.maximum(weights - cumulative[rho] / (rho + 1.0), 0.0)

    return numpy.concatenate([atoms, weights])


def _moment_residual(z: numpy.ndarray, dh: int, target: numpy.ndarray) -> numpy.ndarray:
    return vandermonde(z[:dh], len(target)) @ z[dh:] - target

def _moment_jacobian(z: numpy.ndarray, dh: int, order: int) -> numpy.ndarray:
    atoms, weights = z[:dh], z[dh:]
    powers = vandermonde(atoms, order)

    d_powers = numpy.zeros_like(powers)
    d_powers[1:] = numpy.arange(1, order)[:, numpy.newaxis] * powers[:-1]

    return numpy.hstack([d_powers * weights, powers])


def _newton_correct(z: numpy.ndarray, dh: int, target: numpy.ndarray, max_iter: int) -> typing.Optional[numpy.ndarray]:
    residual = _moment_residual(z, dh, target)
    norm = float(numpy.max(numpy.abs(residual)))

    for _ in range(max_iter):
        if norm <= 1e-13:
            break

        # minimum-norm Newton step for the underdetermined system
        step = scipy.linalg.lstsq(_moment_jacobian(z, dh, len(target)), -residual)[0]

        alpha = 1.0
        while alpha > 1e-8:
            candidate = _project(z + alpha * step, dh)
            candidate_residual = _moment_residual(candidate, dh, target)
            candidate_norm = float(numpy.max(numpy.abs(candidate_residual)))
            if candidate_norm < norm:
                break
            alpha = alpha / 2.0
        else:
            return None

        z, residual, norm = candidate, candidate_residual, candidate_norm

    return z if norm <= 0.1 * CONFOUNDER_MATCH_TOL_ else None


def _base_distribution(dh: int, rng: numpy.random.Generator) -> AtomicDistribution:
    width = 1.6 / dh
    atoms = -0.8 + width * (numpy.arange(dh) + 0.5) + rng.uniform(-0.2 * width, 0.2 * width, size=dh)
    weights = 0.5 / dh + 0.5 * rng.dirichlet(numpy.ones(dh))

    return AtomicDistribution(atoms, weights)


def construct_moment_confounders(dh: int, seed: int, gap_min: float = CONFOUNDER_GAP_, match_tol: float = CONFOUNDER_MATCH_TOL_, max_iter: int = CONFOUNDER_MAX_ITER_, max_restarts: int = CONFOUNDER_MAX_RESTARTS_) -> MomentConfounders:
    """
    Construct two dh-atomic distributions on [-1, 1] whose moments agree up to
    order 2 dh - 2 (within ``match_tol``) and differ at order 2 dh - 1 by at
    least ``gap_min``.

    Distributions with dh atoms matching 2 dh - 1 moments form a
    one-dimensional family. Starting from a random well-separated
    distribution, the search steps along the family's tangent (the null
    space of the moment Jacobian) and pulls each prediction back onto the
    family with damped minimum-norm Newton corrections, projecting atoms into
    [-1, 1] and weights onto the simplex, until the last moment has moved by
    ``gap_min``.

    Raises:
        SearchFailedError: if ``max_restarts`` starting distributions all fail
    """
    if dh < 1:
        raise InvalidParamsError('extrapolab.moments.construct_moment_confounders - Teacher dimension must be positive, got {0}'.format(dh))

    if dh == 1:
        return MomentConfounders(AtomicDistribution([0.5], [1.0]), AtomicDistribution([-0.5], [1.0]), 1.0)

    rng = numpy.random.default_rng(seed)
    order = 2 * dh - 1

    for restart in range(max_restarts):
        first = _base_distribution(dh, rng)
        first_moments = moments(first, order + 1).values
        target = first_moments[:order]

        z = numpy.concatenate([first.atoms, first.weights])
        tangent = None
        direction = rng.choice([-1.0, 1.0])

        for _ in range(CONFOUNDER_MAX_STEPS_):
            null_space = scipy.linalg.null_space(_moment_jacobian(z, dh, order))
            if null_space.shape[1] != 1:
                break

            next_tangent = null_space[:, 0]
            if tangent is None:
                next_tangent = direction * next_tangent
            elif next_tangent @ tangent < 0.0:
                next_tangent = -next_tangent
            tangent = next_tangent

            corrected = _newton_correct(_project(z + CONFOUNDER_STEP_ * tangent, dh), dh, target, max_iter)
            if corrected is None:
                break
            if (numpy.min(numpy.diff(numpy.sort(corrected[:dh]))) < 1e-3) or (numpy.min(corrected[dh:]) < 1e-6):
                break
            z = corrected

            second = AtomicDistribution(z[:dh], z[dh:])
            second_moments = moments(second, order + 1).values

            match = float(numpy.max(numpy.abs(second_moments[:order] - target)))
            gap = float(abs(second_moments[order] - first_moments[order]))

            if (match <= match_tol) and (gap >= gap_min):
                logger.debug('[confound] dh={0}: gap {1!r} after {2} restart{3}'.format(dh, gap, restart, '' if restart == 1 else 's'))
                return MomentConfounders(first, second, gap)

        logger.debug('[confound] dh={0}: restart {1} reached the end of its family'.format(dh, restart + 1))

    raise SearchFailedError('extrapolab.moments.construct_moment_confounders - No confounders found for dh={0} after {1} restarts'.format(dh, max_restarts))
