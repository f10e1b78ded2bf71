# -*- coding: utf-8 -*-
#
# extrapolab: extrapolab/validators.py
#
# Copyright (c) 2026, extrapolab developers
# All rights reserved.

import typing

import numpy


def is_valid_array(value: numpy.ndarray) -> bool:
    return bool(numpy.all(numpy.isfinite(value)))

def is_valid_square(a: numpy.ndarray) -> bool:
    return (a.ndim == 2) and (a.shape[0] == a.shape[1]) and (a.shape[0] >= 1)

def is_valid_symmetric(a: numpy.ndarray) -> bool:
    return is_valid_square(a) and bool(numpy.array_equal(a, a.T))

def is_valid_diagonal(a: numpy.ndarray) -> bool:
    return is_valid_square(a) and not bool(numpy.any(a - numpy.diag(numpy.diag(a))))

def is_valid_balanced(b: numpy.ndarray, c: numpy.ndarray, tol: float) -> bool:
    return (b.shape == c.shape) and (float(numpy.max(numpy.abs(b - c), initial=0.0)) <= tol)

def is_valid_window(tail_start: int, tail_end: int, horizon: int) -> bool:
    return 0 <= tail_start < tail_end <= horizon

def is_valid_milestones(milestones: typing.Sequence[typing.Tuple[int, float]]) -> bool:
    steps = [step for (step, _) in milestones]

    return all(step >= 0 for step in steps) and all(lo < hi for (lo, hi) in zip(steps, steps[1:]))

def is_valid_distinct(values: numpy.ndarray, tol: float) -> bool:
    if len(values) < 2:
        return True

    return float(numpy.min(numpy.diff(numpy.sort(values)))) > tol
