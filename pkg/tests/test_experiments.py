# -*- coding: utf-8 -*-
#
# extrapolab: tests/test_experiments.py
#
# Copyright (c) 2026, extrapolab developers
# All rights reserved.

import math

import numpy
import pandas
import pytest

from extrapolab.command_line.dict_decoders import ExperimentConfigDictDecoder
from extrapolab.command_line.dict_encoders import ErrorDictEncoder, RunKeyDictEncoder, SweepRowDictEncoder
from extrapolab.command_line.dict_pipe import RowPipe
from extrapolab.command_line.exceptions import FieldNotFoundError, FieldNotUniqueError, FieldValueError
from extrapolab.exceptions import ConfigurationError, InvalidParamsError
from extrapolab.experiments import ERROR_CEILING_, ExperimentConfig, OptimizerSettings, RunSpec, StudentSettings, SweepSettings, TeacherSettings, build_teacher, derive_seed, execute_run, gru_sweep_specs, init_scale_specs, load_system, run_sweep, sweep_k_specs, sweep_statistics, system_document
from extrapolab.gru import GruParams
from extrapolab.lds import ExtrapolationError, LinearRnnParams, Structure
from extrapolab.optim import InitKind, LossKind, Method

SMOKE = {
    'teacher': {'kind': 'balanced', 'dh': 1},
    'student': {'d': 4, 'structure': 'symmetric', 'init': 'balanced_random', 'init_scale': 0.001},
    'optimizer': {'method': 'adam', 'lr': 0.001, 'max_steps': 100, 'loss_kind': 'population', 'record_every': 10},
    'sweep': {'k_values': [3], 'seeds': [0], 'master_seed': 0},
}


def smoke_config(**sweep):
    obj = dict(SMOKE)
    obj['sweep'] = dict(SMOKE['sweep'], **sweep)

    return ExperimentConfigDictDecoder().decode(obj)


class TestDeriveSeed:
    def test_deterministic(self):
        assert derive_seed(0, 1, 2) == derive_seed(0, 1, 2)

    def test_counters_are_ordered(self):
        assert derive_seed(0, 1, 2) != derive_seed(0, 2, 1)

    def test_master_seed_matters(self):
        assert derive_seed(0, 1) != derive_seed(1, 1)

    def test_fits_in_63_bits(self):
        seeds = [derive_seed(master, counter) for master in range(20) for counter in range(20)]

        assert all(0 <= seed < 2 ** 63 for seed in seeds)
        assert len(set(seeds)) == len(seeds)


class TestSettings:
    def test_unknown_teacher_kind(self):
        with pytest.raises(ConfigurationError):
            TeacherSettings(kind='chaotic')

    def test_explicit_student_init_is_rejected(self):
        with pytest.raises(ConfigurationError):
            StudentSettings(init=InitKind.EXPLICIT)

    def test_optimizer_settings_are_validated(self):
        with pytest.raises(ConfigurationError):
            OptimizerSettings(lr=-1.0)

    def test_duplicate_seeds_are_rejected(self):
        with pytest.raises(ConfigurationError):
            SweepSettings(seeds=(0, 0))

    def test_config_hash_is_canonical(self):
        assert ExperimentConfig().config_hash() == ExperimentConfig().config_hash()
        assert ExperimentConfig().config_hash() != ExperimentConfig(sweep=SweepSettings(seeds=(0, 1))).config_hash()
        assert len(ExperimentConfig().config_hash()) == 64


class TestExperimentConfigDictDecoder:
    def test_decodes_every_block(self):
        config = smoke_config()

        assert config.teacher.dh == 1
        assert config.student.structure is Structure.SYMMETRIC
        assert config.optimizer.method is Method.ADAM
        assert config.optimizer.max_steps == 100
        assert config.sweep.k_values == (3, )

    def test_k_range_is_inclusive(self):
        assert smoke_config(k_values={'from': 4, 'to': 7}).sweep.k_values == (4, 5, 6, 7)

    def test_gru_student_defaults(self):
        config = ExperimentConfigDictDecoder().decode({'teacher': {'kind': 'gru', 'dh': 4}, 'student': {'d': 8}, 'sweep': {'k_values': [4]}})

        assert config.student.init is InitKind.GAUSSIAN_SCALED
        assert config.student.structure is Structure.GENERAL
        assert config.student.init_scale == 1e-4

    def test_unknown_field(self):
        obj = dict(SMOKE, student={'d': 4, 'width': 3})

        with pytest.raises(FieldValueError):
            ExperimentConfigDictDecoder().decode(obj)

    def test_missing_required_block(self):
        with pytest.raises(FieldNotFoundError):
            ExperimentConfigDictDecoder().decode({'student': {'d': 4}})

    def test_bad_enum_value(self):
        obj = dict(SMOKE, optimizer={'loss_kind': 'hinge'})

        with pytest.raises(FieldValueError):
            ExperimentConfigDictDecoder().decode(obj)

    def test_boolean_is_not_an_integer(self):
        obj = dict(SMOKE, student={'d': True})

        with pytest.raises(FieldValueError):
            ExperimentConfigDictDecoder().decode(obj)

    def test_train_block(self):
        decoder = ExperimentConfigDictDecoder(required=('student', ))

        settings = decoder.decode_train({'student': {'d': 4}, 'train': {'k': 11, 'seed': 2}})

        assert (settings.k, settings.seed) == (11, 2)

    def test_field_errors_are_configuration_errors(self):
        assert issubclass(FieldValueError, ConfigurationError)
        assert issubclass(FieldNotFoundError, ConfigurationError)


class TestSpecs:
    def test_sweep_k_points_follow_k_values(self):
        specs = sweep_k_specs(smoke_config(k_values=[5, 3], seeds=[0, 1]))

        assert [(spec.point, spec.k, spec.seed) for spec in specs] == [(0, 5, 0), (0, 5, 1), (1, 3, 0), (1, 3, 1)]

    def test_init_scale_points_cross_scales_and_k(self):
        specs = init_scale_specs(smoke_config(k_values=[3, 4], scales=[0.1, 0.01]))

        assert [(spec.point, spec.scale, spec.k) for spec in specs] == [(0, 0.1, 3), (1, 0.1, 4), (2, 0.01, 3), (3, 0.01, 4)]

    def test_gru_specs_are_flagged(self):
        assert all(spec.gru for spec in gru_sweep_specs(smoke_config()))


class TestSystemDocuments:
    def test_linear_envelope(self):
        theta = LinearRnnParams([[0.5]], [1.0], [1.0])

        document = system_document(theta, kind='balanced')

        assert document['model'] == 'linear'
        assert document['kind'] == 'balanced'
        assert load_system(document) == theta

    def test_gru_envelope(self):
        params = GruParams.random(2, 0.1, numpy.random.default_rng(0))

        restored = load_system(system_document(params))

        numpy.testing.assert_array_equal(restored.to_vector(), params.to_vector())

    def test_bare_documents(self):
        assert isinstance(load_system(LinearRnnParams([[0.5]], [1.0], [1.0]).to_dict()), LinearRnnParams)
        assert isinstance(load_system(GruParams.zeros(1).to_dict()), GruParams)

    def test_unknown_model(self):
        with pytest.raises(InvalidParamsError):
            load_system({'model': 'lstm', 'params': {}})

    def test_gru_is_not_a_linear_teacher(self):
        with pytest.raises(ConfigurationError):
            build_teacher(TeacherSettings(kind='gru', dh=2), 0)


class TestExecuteRun:
    def test_smoke_run(self):
        outcome = execute_run(sweep_k_specs(smoke_config())[0])

        assert not outcome.failed
        assert not outcome.diverged
        assert outcome.stop_reason == 'max_steps'
        assert [record['step'] for record in outcome.records] == list(range(0, 101, 10))
        assert outcome.min_balancedness_ratio <= 1e-12
        assert math.isfinite(outcome.extrap_error)
        assert outcome.student['model'] == 'linear'

    def test_runs_are_reproducible(self):
        spec = sweep_k_specs(smoke_config())[0]

        first = execute_run(spec)
        second = execute_run(spec)

        assert first.final_loss == second.final_loss
        assert first.extrap_error == second.extrap_error

    def test_failure_becomes_an_outcome(self):
        config = ExperimentConfig(teacher=TeacherSettings(kind='gru', dh=2), sweep=SweepSettings(k_values=(3, ), seeds=(0, )))

        outcome = execute_run(RunSpec(0, 3, 0, config))

        assert outcome.failed
        assert outcome.diverged
        assert outcome.error_name == 'ConfigurationError'
        assert math.isnan(outcome.final_loss)

    def test_sweep_is_sorted_by_point_and_seed(self):
        outcomes = run_sweep(sweep_k_specs(smoke_config(k_values=[3, 4], seeds=[1, 0])), jobs=1, progress=False)

        assert [(outcome.point, outcome.seed) for outcome in outcomes] == [(0, 0), (0, 1), (1, 0), (1, 1)]

    @pytest.mark.slow
    def test_pool_matches_serial_execution(self):
        specs = sweep_k_specs(smoke_config(k_values=[3, 4], seeds=[0, 1]))

        serial = run_sweep(specs, jobs=1, progress=False)
        pooled = run_sweep(specs, jobs=2, progress=False)

        assert [outcome.final_loss for outcome in serial] == [outcome.final_loss for outcome in pooled]

    @pytest.mark.slow
    def test_empirical_gru_run(self):
        obj = {
            'teacher': {'kind': 'gru', 'dh': 2},
            'student': {'d': 3},
            'optimizer': {'lr': 0.01, 'max_steps': 20, 'loss_kind': 'empirical', 'batch_size': 20, 'n_train': 100, 'record_every': 10},
            'sweep': {'k_values': [4], 'seeds': [0], 'gru_eval_inputs': 10, 'gru_horizon': 12},
        }

        outcome = execute_run(gru_sweep_specs(ExperimentConfigDictDecoder().decode(obj))[0])

        assert not outcome.failed
        assert outcome.student['model'] == 'gru'
        assert math.isnan(outcome.min_balancedness_ratio)


class TestRowPipe:
    def test_error_rows_only_for_failed_runs(self):
        config = ExperimentConfig(teacher=TeacherSettings(kind='gru', dh=2), sweep=SweepSettings(k_values=(3, ), seeds=(0, )))
        failed = execute_run(RunSpec(0, 3, 0, config))
        succeeded = execute_run(sweep_k_specs(smoke_config())[0])

        pipe = RowPipe(RunKeyDictEncoder(), SweepRowDictEncoder(with_balancedness=True), ErrorDictEncoder())
        out_df, err_df = pipe.run([succeeded, failed])

        assert list(out_df.columns) == ['k', 'seed', 'final_loss', 'extrap_error', 'non_extrapolating', 'diverged', 'stop_reason', 'min_balancedness_ratio']
        assert len(out_df) == 2
        assert list(err_df.columns) == ['k', 'seed', 'Run_Error_Name', 'Run_Error_Message']
        assert err_df['Run_Error_Name'].tolist() == ['ConfigurationError']

    def test_duplicate_columns(self):
        with pytest.raises(FieldNotUniqueError):
            RowPipe(RunKeyDictEncoder(), RunKeyDictEncoder(), ErrorDictEncoder())


class TestSweepStatistics:
    def test_mean_and_population_std(self):
        summary = pandas.DataFrame({
            'k': [3, 3, 4],
            'seed': [0, 1, 0],
            'extrap_error': [1.0, 3.0, 5.0],
            'final_loss': [0.1, 0.3, 0.5],
            'diverged': [False, False, False],
        })

        stats = sweep_statistics(summary, ['k'])

        assert stats['k'].tolist() == [3, 4]
        assert stats.loc[0, 'extrap_error_mean'] == pytest.approx(2.0)
        assert stats.loc[0, 'extrap_error_std'] == pytest.approx(1.0)
        assert stats['n_runs'].tolist() == [2, 1]

    def test_overflowed_tails_are_kept_at_the_ceiling(self):
        summary = pandas.DataFrame({
            'k': [18, 18, 18, 22, 22, 22],
            'seed': [0, 1, 2, 0, 1, 2],
            'extrap_error': [math.inf, math.inf, 0.5, 1e-4, 2e-4, 3e-4],
            'final_loss': [1e-9, math.nan, 1e-9, 1e-9, 1e-9, 1e-9],
            'diverged': [False, True, False, False, False, False],
        })

        stats = sweep_statistics(summary, ['k']).set_index('k')

        assert stats.loc[18, 'n_runs'] == 3
        assert stats.loc[18, 'n_overflow'] == 2
        assert stats.loc[18, 'n_diverged'] == 1
        assert stats.loc[18, 'extrap_error_mean'] == pytest.approx((2 * ERROR_CEILING_ + 0.5) / 3)
        assert math.isfinite(stats.loc[18, 'extrap_error_std'])
        assert stats.loc[18, 'extrap_error_mean'] > 1e6 * stats.loc[22, 'extrap_error_mean']
        assert stats.loc[22, 'n_overflow'] == 0

    def test_failed_runs_are_counted_apart(self):
        summary = pandas.DataFrame({
            'k': [3, 3, 4],
            'seed': [0, 1, 0],
            'extrap_error': [1.0, math.nan, math.nan],
            'final_loss': [0.1, math.nan, math.nan],
            'diverged': [False, True, True],
        })

        stats = sweep_statistics(summary, ['k'])

        assert stats['n_runs'].tolist() == [1, 0]
        assert stats['n_failed'].tolist() == [1, 1]
        assert stats.loc[0, 'extrap_error_mean'] == pytest.approx(1.0)
        assert math.isnan(stats.loc[1, 'extrap_error_mean'])

    def test_overflowed_student_is_not_a_diverged_run(self, monkeypatch):
        monkeypatch.setattr('extrapolab.experiments.extrapolation_error', lambda *args: ExtrapolationError(math.nan, 1.0, False))

        outcome = execute_run(sweep_k_specs(smoke_config())[0])

        assert not outcome.failed
        assert not outcome.diverged
        assert outcome.extrap_error == math.inf
        assert outcome.non_extrapolating


class TestOptimizerSettings:
    def test_dict_document_has_no_per_run_fields(self):
        document = OptimizerSettings(loss_kind=LossKind.EMPIRICAL, batch_size=100).to_dict()

        assert 'seed' not in document
        assert 'init' not in document
        assert document['n_train'] == 10000
        assert document['batch_size'] == 100
