# -*- coding: utf-8 -*-
#
# extrapolab: extrapolab/exceptions.py
#
# Copyright (c) 2026, extrapolab developers
# All rights reserved.

import typing


class CustomException(Exception):
    def __init__(self, msg: str) -> None:
        super(CustomException, self).__init__(msg)

        self.msg = msg

    def __str__(self) -> str:
        return self.msg


class InvalidParamsError(CustomException, ValueError):
    pass


class ConfigurationError(CustomException, ValueError):
    pass


class NonFiniteError(CustomException, ArithmeticError):
    def __init__(self, where: str, index: typing.Optional[int] = None) -> None:
        if index is None:
            msg = '{0} - Non-finite value'.format(where)
        else:
            msg = '{0} - Non-finite value at index {1}'.format(where, index)

        super(NonFiniteError, self).__init__(msg)

        self.index = index


class NotSymmetricError(CustomException, ValueError):
    pass


class NotBalancedError(CustomException, ValueError):
    pass


class NotDiagonalError(CustomException, ValueError):
    pass


class JacobiNoConvergenceError(CustomException, ArithmeticError):
    def __init__(self, where: str, sweeps: int, off_norm: float) -> None:
        msg = '{0} - No convergence after {1} sweeps (off-diagonal norm {2!r})'.format(where, sweeps, off_norm)

        super(JacobiNoConvergenceError, self).__init__(msg)

        self.sweeps = sweeps
        self.off_norm = off_norm


class DegenerateDenominatorError(CustomException, ZeroDivisionError):
    pass


class IllConditionedVandermondeError(CustomException, ArithmeticError):
    def __init__(self, where: str, residual: float, tol: float) -> None:
        msg = '{0} - Solve residual {1!r} exceeds tolerance {2!r}'.format(where, residual, tol)

        super(IllConditionedVandermondeError, self).__init__(msg)

        self.residual = residual
        self.tol = tol


class WindowOutOfRangeError(CustomException, IndexError):
    pass


class ZeroSystemError(CustomException, ValueError):
    pass


class RankDeficientHankelError(CustomException, ArithmeticError):
    def __init__(self, where: str, n: int, pivot: float) -> None:
        msg = '{0} - Hankel matrix of size {1} is rank deficient (smallest pivot {2!r})'.format(where, n, pivot)

        super(RankDeficientHankelError, self).__init__(msg)

        self.n = n
        self.pivot = pivot


class ComplexOrOutOfRangeRootsError(CustomException, ArithmeticError):
    pass


class NegativeWeightError(CustomException, ValueError):
    pass


class SearchFailedError(CustomException, RuntimeError):
    pass


class DegenerateTeacherError(CustomException, ValueError):
    pass
