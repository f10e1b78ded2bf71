# -*- coding: utf-8 -*-
#
# extrapolab: tests/test_teachers.py
#
# Copyright (c) 2026, extrapolab developers
# All rights reserved.

import numpy
import pytest

from extrapolab.exceptions import DegenerateTeacherError, InvalidParamsError
from extrapolab.lds import ImpulseResponse, Structure, balancedness_ratio, impulse_response
from extrapolab.teachers import default_gru_target, gen_balanced_teacher, gen_delay_teacher, gen_gru_teacher, gen_random_unbalanced_teacher


class TestBalancedTeacher:
    def test_is_balanced_with_unit_gain(self):
        for seed in range(10):
            teacher = gen_balanced_teacher(5, seed)

            assert teacher.structure is Structure.DIAGONAL
            assert balancedness_ratio(teacher) == 0.0
            assert float(teacher.c @ teacher.b) == pytest.approx(1.0, abs=1e-12)

    def test_eigenvalues_lie_in_range(self):
        eigenvalues = numpy.diag(gen_balanced_teacher(50, 0).a)

        assert numpy.all((eigenvalues >= 0.6) & (eigenvalues <= 1.05))

    def test_deterministic_under_seed(self):
        assert gen_balanced_teacher(4, 1) == gen_balanced_teacher(4, 1)

    def test_rejects_empty_teacher(self):
        with pytest.raises(InvalidParamsError):
            gen_balanced_teacher(0, 0)


class TestDelayTeacher:
    def test_impulse_response_is_a_single_spike(self):
        values = impulse_response(gen_delay_teacher(10), 30).values

        expected = numpy.zeros(30)
        expected[9] = 1.0
        numpy.testing.assert_array_equal(values, expected)

    def test_single_state(self):
        teacher = gen_delay_teacher(1)

        numpy.testing.assert_array_equal(teacher.a, [[0.0]])
        numpy.testing.assert_array_equal(impulse_response(teacher, 4).values, [1.0, 0.0, 0.0, 0.0])

    def test_is_maximally_unbalanced(self):
        assert balancedness_ratio(gen_delay_teacher(10)) == pytest.approx(1.0)


class TestRandomUnbalancedTeacher:
    def test_leading_entries_vanish(self):
        teacher = gen_random_unbalanced_teacher(5, 0)

        values = impulse_response(teacher, 10).values

        numpy.testing.assert_array_equal(values[:4], numpy.zeros(4))
        assert values[4] != 0.0

    def test_is_upper_bidiagonal(self):
        a = gen_random_unbalanced_teacher(6, 3).a

        numpy.testing.assert_array_equal(numpy.tril(a, k=-1), numpy.zeros((6, 6)))
        numpy.testing.assert_array_equal(numpy.triu(a, k=2), numpy.zeros((6, 6)))


class TestGruTeacher:
    def test_default_target(self):
        target = default_gru_target()

        assert target.n == 20
        assert target.values[0] == 1.0
        assert target.values[3] == pytest.approx(0.8 ** 3 * numpy.cos(2.1))

    def test_rejects_zero_target(self):
        with pytest.raises(DegenerateTeacherError):
            gen_gru_teacher(2, ImpulseResponse(numpy.zeros(10)), 0, steps=1)

    def test_rejects_trivially_decayed_fit(self):
        # one step from a near-zero network leaves the response far below the threshold
        with pytest.raises(DegenerateTeacherError):
            gen_gru_teacher(2, None, 0, steps=1)

    @pytest.mark.slow
    def test_fit_improves_on_the_zero_network(self):
        target = default_gru_target()

        teacher = gen_gru_teacher(4, target, 0, steps=3000, lr=1e-2, init_scale=0.1)

        assert teacher.fit_error < float(numpy.mean(numpy.square(target.values)))
