# -*- coding: utf-8 -*-
#
# extrapolab: tests/test_losses.py
#
# Copyright (c) 2026, extrapolab developers
# All rights reserved.

import numpy
import pytest

from extrapolab.exceptions import InvalidParamsError
from extrapolab.lds import ImpulseResponse, LinearRnnParams, Structure, impulse_response
from extrapolab.losses import Gradients, SequenceDataset, accumulating_loss, accumulating_loss_and_grad, accumulating_weights, empirical_loss, empirical_loss_and_grad, finite_diff_grad, make_dataset, population_grad, population_loss, population_loss_and_grad, weighted_population_loss_and_grad
from extrapolab.teachers import gen_balanced_teacher

STRUCTURES = (Structure.GENERAL, Structure.SYMMETRIC, Structure.DIAGONAL)

GRAD_RTOL = 1e-5


def random_student(rng, d, structure):
    a = rng.normal(0.0, 0.6 / numpy.sqrt(d), size=(d, d))
    if structure is Structure.SYMMETRIC:
        a = (a + a.T) / 2.0
    elif structure is Structure.DIAGONAL:
        a = numpy.diag(numpy.diag(a))

    return LinearRnnParams(a, rng.normal(0.0, 0.5, size=d), rng.normal(0.0, 0.5, size=d), structure=structure)


def relative_error(analytic, numeric):
    return float(numpy.linalg.norm(analytic - numeric)) / max(float(numpy.linalg.norm(numeric)), 1e-12)


def naive_population_grad(theta, teacher_ir):
    """dL/dA, dL/dB, dL/dC of the population loss through explicit matrix powers."""
    k = teacher_ir.n
    powers = [numpy.linalg.matrix_power(theta.a, j) for j in range(k)]
    residual = numpy.array([theta.c @ powers[j] @ theta.b for j in range(k)]) - teacher_ir.values

    g_a = numpy.zeros((theta.d, theta.d))
    for i in range(1, k):
        for r in range(i):
            g_a += 2.0 * residual[i] * numpy.outer(powers[r].T @ theta.c, powers[i - 1 - r] @ theta.b)
    g_b = sum(2.0 * residual[j] * (powers[j].T @ theta.c) for j in range(k))
    g_c = sum(2.0 * residual[j] * (powers[j] @ theta.b) for j in range(k))

    return g_a, g_b, g_c


class TestPopulationLoss:
    def test_loss_is_sum_of_squared_residuals(self):
        theta = LinearRnnParams([[0.5]], [1.0], [2.0])
        teacher_ir = ImpulseResponse([1.0, 1.0, 1.0])

        # student response (2, 1, 0.5)
        assert population_loss(theta, teacher_ir) == pytest.approx(1.0 + 0.0 + 0.25)

    def test_teacher_has_zero_loss_and_gradient(self):
        teacher = gen_balanced_teacher(4, 0)
        teacher_ir = impulse_response(teacher, 10)

        loss, grad = population_loss_and_grad(teacher, teacher_ir)

        assert loss == pytest.approx(0.0, abs=1e-28)
        assert grad.norm() == pytest.approx(0.0, abs=1e-13)

    def test_gradient_matches_explicit_matrix_powers(self):
        rng = numpy.random.default_rng(5)
        theta = random_student(rng, 5, Structure.GENERAL)
        teacher_ir = ImpulseResponse(rng.normal(size=6))

        g_a, g_b, g_c = naive_population_grad(theta, teacher_ir)
        grad = population_grad(theta, teacher_ir)

        numpy.testing.assert_allclose(grad.g_a, g_a, rtol=1e-10, atol=1e-12)
        numpy.testing.assert_allclose(grad.g_b, g_b, rtol=1e-10, atol=1e-12)
        numpy.testing.assert_allclose(grad.g_c, g_c, rtol=1e-10, atol=1e-12)

    @pytest.mark.parametrize('structure', STRUCTURES)
    def test_gradient_matches_finite_differences(self, structure):
        rng = numpy.random.default_rng(100)

        for _ in range(50):
            d = int(rng.integers(1, 7))
            k = int(rng.integers(1, 9))
            theta = random_student(rng, d, structure)
            teacher_ir = ImpulseResponse(rng.normal(size=k))

            analytic = population_grad(theta, teacher_ir).free_vector()
            numeric = finite_diff_grad(lambda t: population_loss(t, teacher_ir), theta).free_vector()

            assert relative_error(analytic, numeric) < GRAD_RTOL

    @pytest.mark.parametrize('structure', (Structure.SYMMETRIC, Structure.DIAGONAL))
    def test_balanced_system_has_identical_input_and_output_gradients(self, structure):
        rng = numpy.random.default_rng(110)

        for _ in range(20):
            d = int(rng.integers(1, 7))
            student = random_student(rng, d, structure)
            theta = LinearRnnParams(student.a, student.b, student.b.copy(), structure=structure)
            teacher_ir = ImpulseResponse(rng.normal(size=int(rng.integers(1, 12))))

            grad = population_grad(theta, teacher_ir)

            numpy.testing.assert_array_equal(grad.g_b, grad.g_c)

    def test_single_step_horizon_has_no_transition_gradient(self):
        theta = LinearRnnParams([[0.3, 0.1], [0.2, 0.4]], [1.0, 0.5], [0.2, 0.7])

        grad = population_grad(theta, ImpulseResponse([1.0]))

        numpy.testing.assert_array_equal(grad.g_a, numpy.zeros((2, 2)))


class TestAccumulatingLoss:
    def test_weights(self):
        numpy.testing.assert_array_equal(accumulating_weights(4), [4.0, 3.0, 2.0, 1.0])

    def test_is_a_reweighted_population_loss(self):
        rng = numpy.random.default_rng(6)
        theta = random_student(rng, 3, Structure.GENERAL)
        teacher_ir = ImpulseResponse(rng.normal(size=5))

        loss, grad = accumulating_loss_and_grad(theta, teacher_ir)
        weighted_loss, weighted_grad = weighted_population_loss_and_grad(theta, teacher_ir, [5.0, 4.0, 3.0, 2.0, 1.0])

        assert loss == weighted_loss
        numpy.testing.assert_array_equal(grad.free_vector(), weighted_grad.free_vector())

    @pytest.mark.parametrize('structure', STRUCTURES)
    def test_gradient_matches_finite_differences(self, structure):
        rng = numpy.random.default_rng(200)

        for _ in range(50):
            d = int(rng.integers(1, 7))
            k = int(rng.integers(1, 9))
            theta = random_student(rng, d, structure)
            teacher_ir = ImpulseResponse(rng.normal(size=k))

            analytic = accumulating_loss_and_grad(theta, teacher_ir)[1].free_vector()
            numeric = finite_diff_grad(lambda t: accumulating_loss(t, teacher_ir), theta).free_vector()

            assert relative_error(analytic, numeric) < GRAD_RTOL

    def test_dominates_the_population_loss(self):
        rng = numpy.random.default_rng(210)

        for _ in range(50):
            structure = STRUCTURES[int(rng.integers(0, 3))]
            theta = random_student(rng, int(rng.integers(1, 7)), structure)
            teacher_ir = ImpulseResponse(rng.normal(size=int(rng.integers(1, 12))))

            assert accumulating_loss(theta, teacher_ir) >= population_loss(theta, teacher_ir)

    def test_rejects_wrong_number_of_weights(self):
        with pytest.raises(InvalidParamsError):
            weighted_population_loss_and_grad(LinearRnnParams([[0.5]], [1.0], [1.0]), ImpulseResponse([1.0, 0.5]), [1.0])


class TestEmpiricalLoss:
    def test_teacher_labels_have_zero_loss(self):
        teacher = gen_balanced_teacher(3, 2)
        data = make_dataset(teacher, 6, 50, 0)

        assert empirical_loss(teacher, data) == pytest.approx(0.0, abs=1e-28)

    @pytest.mark.parametrize('structure', STRUCTURES)
    def test_gradient_matches_finite_differences(self, structure):
        rng = numpy.random.default_rng(300)

        for _ in range(50):
            d = int(rng.integers(1, 6))
            k = int(rng.integers(1, 7))
            theta = random_student(rng, d, structure)
            data = SequenceDataset(rng.normal(size=(8, k)), rng.normal(size=8))

            analytic = empirical_loss_and_grad(theta, data)[1].free_vector()
            numeric = finite_diff_grad(lambda t: empirical_loss(t, data), theta).free_vector()

            assert relative_error(analytic, numeric) < GRAD_RTOL

    def test_impulse_inputs_reduce_to_the_last_population_term(self):
        # x_i = s_i e_0 only reaches the output through C A^{k-1} B
        rng = numpy.random.default_rng(310)

        for structure in STRUCTURES:
            k = 6
            theta = random_student(rng, 4, structure)
            target = rng.normal(size=k)
            scales = rng.normal(size=40)

            inputs = numpy.zeros((40, k))
            inputs[:, 0] = scales
            data = SequenceDataset(inputs, scales * target[-1])

            weights = numpy.zeros(k)
            weights[-1] = numpy.mean(numpy.square(scales))

            loss, grad = empirical_loss_and_grad(theta, data)
            expected_loss, expected_grad = weighted_population_loss_and_grad(theta, ImpulseResponse(target), weights)

            assert loss == pytest.approx(expected_loss, rel=1e-10)
            numpy.testing.assert_allclose(grad.free_vector(), expected_grad.free_vector(), rtol=1e-10, atol=1e-12)

    def test_equals_population_loss_in_expectation(self):
        # E[(sum_j (h_j - w_j) x_{k-1-j})^2] = sum_j (h_j - w_j)^2 for standard-normal inputs
        teacher = gen_balanced_teacher(2, 3)
        student = LinearRnnParams(numpy.diag([0.5, 0.1]), [0.3, 0.2], [0.4, 0.1], structure=Structure.DIAGONAL)
        data = make_dataset(teacher, 4, 200000, 1)

        expected = population_loss(student, impulse_response(teacher, 4))

        assert empirical_loss(student, data) == pytest.approx(expected, rel=0.02)


class TestSequenceDataset:
    def test_make_dataset_is_deterministic(self):
        teacher = gen_balanced_teacher(2, 0)

        first = make_dataset(teacher, 5, 20, 7)
        second = make_dataset(teacher, 5, 20, 7)

        numpy.testing.assert_array_equal(first.inputs, second.inputs)
        numpy.testing.assert_array_equal(first.labels, second.labels)

    def test_rejects_mismatched_labels(self):
        with pytest.raises(InvalidParamsError):
            SequenceDataset(numpy.zeros((3, 2)), numpy.zeros(2))

    def test_data_frame_columns(self):
        data = SequenceDataset(numpy.arange(6.0).reshape(2, 3), [1.0, 2.0])

        data_frame = data.to_data_frame()

        assert list(data_frame.columns) == ['x0', 'x1', 'x2', 'label']
        numpy.testing.assert_array_equal(data_frame['label'].to_numpy(), [1.0, 2.0])

    def test_subset(self):
        data = SequenceDataset(numpy.arange(6.0).reshape(3, 2), [1.0, 2.0, 3.0])

        subset = data.subset(numpy.array([2, 0]))

        numpy.testing.assert_array_equal(subset.labels, [3.0, 1.0])
        assert subset.k == 2


class TestGradients:
    def test_symmetric_projection(self):
        grad = Gradients.from_general(numpy.array([[1.0, 2.0], [4.0, 3.0]]), numpy.zeros(2), numpy.zeros(2), Structure.SYMMETRIC)

        numpy.testing.assert_array_equal(grad.g_a, [[1.0, 3.0], [3.0, 3.0]])
        # off-diagonal free variable moves both mirrored entries
        numpy.testing.assert_array_equal(grad.free_vector()[:3], [1.0, 6.0, 3.0])

    def test_free_vector_round_trip_for_symmetric_structure(self):
        grad = Gradients(numpy.array([[1.0, 3.0], [3.0, 2.0]]), numpy.array([1.0, 2.0]), numpy.array([3.0, 4.0]), Structure.SYMMETRIC)

        restored = Gradients.from_free_vector(grad.free_vector(), 2, Structure.SYMMETRIC)

        numpy.testing.assert_array_equal(restored.g_a, grad.g_a)
