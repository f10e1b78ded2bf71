# -*- coding: utf-8 -*-
#
# extrapolab: extrapolab/linalg.py
#
# Copyright (c) 2026, extrapolab developers
# All rights reserved.

"""
Small dense linear-algebra kernels shared by the model and moment modules.

Key Functions:
    jacobi_eigh(): eigendecomposition of a real symmetric matrix by cyclic Jacobi rotations
    vandermonde(): the square Vandermonde matrix V[j][i] = nodes[i] ** j
    solve_with_residual(): partial-pivoting LU solve followed by a residual check
    lu_min_pivot(): smallest pivot magnitude of a partial-pivoting LU factorization
"""

import logging
import math
import typing

import numpy
import scipy.linalg

from .exceptions import JacobiNoConvergenceError

logger = logging.getLogger(__name__)

JACOBI_TOL_ = 1e-12
"""Off-diagonal Frobenius threshold (relative to the Frobenius norm of the input)."""

JACOBI_MAX_SWEEPS_ = 100
"""Maximum number of cyclic sweeps before giving up."""


def off_diagonal_norm(a: numpy.ndarray) -> float:
    return float(numpy.sqrt(numpy.sum(numpy.square(a)) - numpy.sum(numpy.square(numpy.diag(a)))))


def jacobi_eigh(a: numpy.ndarray, tol: float = JACOBI_TOL_, max_sweeps: int = JACOBI_MAX_SWEEPS_) -> typing.Tuple[numpy.ndarray, numpy.ndarray]:
    """
    Diagonalize a real symmetric matrix with cyclic Jacobi rotations.

    Each sweep visits every pair (p, q), p < q, and applies the rotation that
    zeroes a[p][q]. Sweeps stop once the off-diagonal Frobenius norm falls
    below ``tol`` times the Frobenius norm of the input.

    Args:
        a (numpy.ndarray): symmetric d x d matrix (not modified)
        tol (float, optional): relative off-diagonal threshold
        max_sweeps (int, optional): sweep limit

    Returns:
        Tuple[numpy.ndarray, numpy.ndarray]: eigenvalues (in diagonal order) and the
            orthogonal matrix U whose columns are the eigenvectors, so that a = U diag(w) U^T

    Raises:
        JacobiNoConvergenceError: if the sweep limit is exceeded
    """
    a = numpy.array(a, dtype=numpy.float64)
    d = a.shape[0]
    u = numpy.eye(d)

    threshold = tol * max(float(numpy.linalg.norm(a)), numpy.finfo(numpy.float64).tiny)

    for sweep in range(max_sweeps + 1):
        off = off_diagonal_norm(a)
        if off <= threshold:
            logger.debug('[jacobi] Converged after {0} sweep{1}'.format(sweep, '' if sweep == 1 else 's'))
            return numpy.diag(a).copy(), u
        if sweep == max_sweeps:
            raise JacobiNoConvergenceError('extrapolab.linalg.jacobi_eigh', max_sweeps, off)

        for p in range(d - 1):
            for q in range(p + 1, d):
                apq = a[p, q]
                if apq == 0.0:
                    continue

                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                if abs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = 1.0 / (abs(theta) + math.sqrt(theta * theta + 1.0))
                    if theta < 0.0:
                        t = -t
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c

                # a <- P^T a P, with P[p][p] = P[q][q] = c, P[p][q] = s, P[q][p] = -s
                col_p = a[:, p].copy()
                col_q = a[:, q].copy()
                a[:, p] = c * col_p - s * col_q
                a[:, q] = s * col_p + c * col_q

                row_p = a[p, :].copy()
                row_q = a[q, :].copy()
                a[p, :] = c * row_p - s * row_q
                a[q, :] = s * row_p + c * row_q

                a[p, q] = 0.0
                a[q, p] = 0.0

                col_p = u[:, p].copy()
                col_q = u[:, q].copy()
                u[:, p] = c * col_p - s * col_q
                u[:, q] = s * col_p + c * col_q

    raise JacobiNoConvergenceError('extrapolab.linalg.jacobi_eigh', max_sweeps, off_diagonal_norm(a))  # pragma: no cover


def vandermonde(nodes: numpy.ndarray, rows: typing.Optional[int] = None) -> numpy.ndarray:
    nodes = numpy.asarray(nodes, dtype=numpy.float64)
    rows = len(nodes) if rows is None else rows

    return numpy.vander(nodes, rows, increasing=True).T


def solve_with_residual(m: numpy.ndarray, rhs: numpy.ndarray) -> typing.Tuple[numpy.ndarray, float]:
    """Solve ``m x = rhs`` by partial-pivoting Gaussian elimination; return ``x`` and ``max|m x - rhs|``.
    """
    lu, piv = scipy.linalg.lu_factor(m, check_finite=True)
    x = scipy.linalg.lu_solve((lu, piv), rhs)

    residual = float(numpy.max(numpy.abs(m @ x - rhs), initial=0.0))

    return x, residual


def lu_min_pivot(m: numpy.ndarray) -> typing.Tuple[float, typing.Tuple[numpy.ndarray, numpy.ndarray]]:
    lu, piv = scipy.linalg.lu_factor(m, check_finite=True)

    return float(numpy.min(numpy.abs(numpy.diag(lu)))), (lu, piv)
