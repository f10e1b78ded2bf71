# -*- coding: utf-8 -*-
#
# extrapolab: tests/test_command_line.py
#
# Copyright (c) 2026, extrapolab developers
# All rights reserved.

import json
import os

import numpy
import pandas
import pytest

from click.testing import CliRunner

from extrapolab.command_line import cli
from extrapolab.file_ops import read_json, read_jsonl, write_json

SMOKE = {
    'teacher': {'kind': 'balanced', 'dh': 1},
    'student': {'d': 4, 'structure': 'symmetric', 'init': 'balanced_random', 'init_scale': 0.001},
    'optimizer': {'method': 'adam', 'lr': 0.001, 'max_steps': 100, 'loss_kind': 'population', 'record_every': 10},
    'sweep': {'k_values': [3], 'seeds': [0], 'master_seed': 0},
}


@pytest.fixture
def runner():
    return CliRunner()


def invoke(runner, *args):
    return runner.invoke(cli, [str(arg) for arg in args])


def write_document(tmp_path, name, obj):
    path = os.path.join(str(tmp_path), name)
    write_json(path, obj)

    return path


class TestGenTeacher:
    def test_delay_teacher_spike(self, runner, tmp_path):
        out = tmp_path / 'teacher'

        result = invoke(runner, 'gen-teacher', '--kind', 'delay', '--dh', 10, '--out', out)
        assert result.exit_code == 0, result.output

        document = read_json(str(out / 'teacher.json'))
        assert document['model'] == 'linear'
        assert document['kind'] == 'delay'

        result = invoke(runner, 'impulse', out / 'teacher.json', '--n', 30, '--format', 'json', '--out', out)
        assert result.exit_code == 0, result.output

        values = read_json(str(out / 'impulse.json'))['teacher']
        assert values[9] == 1.0
        assert sum(values) == 1.0

    def test_balanced_teacher_is_seeded(self, runner, tmp_path):
        invoke(runner, 'gen-teacher', '--dh', 3, '--seed', 4, '--out', tmp_path / 'first')
        invoke(runner, 'gen-teacher', '--dh', 3, '--seed', 4, '--out', tmp_path / 'second')

        assert read_json(str(tmp_path / 'first' / 'teacher.json')) == read_json(str(tmp_path / 'second' / 'teacher.json'))

    def test_missing_dimension_is_a_usage_error(self, runner):
        result = invoke(runner, 'gen-teacher', '--kind', 'delay')

        assert result.exit_code == 1

    def test_unknown_kind_is_a_usage_error(self, runner):
        result = invoke(runner, 'gen-teacher', '--kind', 'chaotic', '--dh', 2)

        assert result.exit_code == 1


class TestImpulse:
    def test_csv_with_student(self, runner, tmp_path):
        invoke(runner, 'gen-teacher', '--dh', 2, '--out', tmp_path)
        teacher = str(tmp_path / 'teacher.json')

        result = invoke(runner, 'impulse', teacher, '--student', teacher, '--n', 5, '--out', tmp_path)
        assert result.exit_code == 0, result.output

        data_frame = pandas.read_csv(str(tmp_path / 'impulse.csv'))
        assert list(data_frame.columns) == ['j', 'teacher', 'student']
        numpy.testing.assert_array_equal(data_frame['teacher'], data_frame['student'])

    def test_overflow_is_written_as_null(self, runner, tmp_path):
        path = write_document(tmp_path, 'exploding.json', {'model': 'linear', 'params': {'d': 1, 'a': [10.0], 'b': [1.0], 'c': [1.0]}})

        result = invoke(runner, 'impulse', path, '--n', 320, '--format', 'json', '--out', tmp_path)
        assert result.exit_code == 0, result.output

        values = read_json(str(tmp_path / 'impulse.json'))['teacher']
        assert values[308] is not None
        assert values[309] is None


class TestTrain:
    def test_writes_result_student_and_trajectory(self, runner, tmp_path):
        config = write_document(tmp_path, 'config.json', SMOKE)
        invoke(runner, 'gen-teacher', '--dh', 1, '--out', tmp_path)

        result = invoke(runner, 'train', '--config', config, '--teacher', tmp_path / 'teacher.json', '--k', 3, '--out', tmp_path / 'run')
        assert result.exit_code == 0, result.output

        summary = read_json(str(tmp_path / 'run' / 'result.json'))
        assert summary['k'] == 3
        assert summary['stop_reason'] == 'max_steps'
        assert len(summary['config_hash']) == 64

        records = read_jsonl(str(tmp_path / 'run' / 'trajectory.jsonl'))
        assert [record['step'] for record in records] == list(range(0, 101, 10))
        assert read_json(str(tmp_path / 'run' / 'student.json'))['model'] == 'linear'

    def test_csv_trajectory(self, runner, tmp_path):
        config = write_document(tmp_path, 'config.json', SMOKE)
        invoke(runner, 'gen-teacher', '--dh', 1, '--out', tmp_path)

        result = invoke(runner, 'train', '--config', config, '--teacher', tmp_path / 'teacher.json', '--k', 3, '--format', 'csv', '--out', tmp_path / 'run')
        assert result.exit_code == 0, result.output

        data_frame = pandas.read_csv(str(tmp_path / 'run' / 'trajectory.csv'))
        assert 'balancedness_ratio' in data_frame.columns

    def test_empirical_run_writes_its_dataset(self, runner, tmp_path):
        obj = dict(SMOKE, optimizer={'method': 'adam', 'lr': 0.001, 'max_steps': 20, 'loss_kind': 'empirical', 'n_train': 50, 'record_every': 10})
        config = write_document(tmp_path, 'config.json', obj)
        invoke(runner, 'gen-teacher', '--dh', 2, '--out', tmp_path)

        result = invoke(runner, 'train', '--config', config, '--teacher', tmp_path / 'teacher.json', '--k', 4, '--format', 'csv', '--out', tmp_path / 'run')
        assert result.exit_code == 0, result.output

        data_frame = pandas.read_csv(str(tmp_path / 'run' / 'dataset.csv'))
        assert list(data_frame.columns) == ['x0', 'x1', 'x2', 'x3', 'label']
        assert len(data_frame) == 50

    def test_training_length_is_required(self, runner, tmp_path):
        config = write_document(tmp_path, 'config.json', SMOKE)
        invoke(runner, 'gen-teacher', '--dh', 1, '--out', tmp_path)

        result = invoke(runner, 'train', '--config', config, '--teacher', tmp_path / 'teacher.json')

        assert result.exit_code == 1


class TestSweepK:
    def test_smoke_sweep_outputs(self, runner, tmp_path):
        config = write_document(tmp_path, 'config.json', SMOKE)
        out = tmp_path / 'sweep'

        result = invoke(runner, 'sweep-k', '--config', config, '--jobs', 1, '--out', out)
        assert result.exit_code == 0, result.output

        summary = pandas.read_csv(str(out / 'summary.csv'))
        assert list(summary.columns) == ['k', 'seed', 'final_loss', 'extrap_error', 'non_extrapolating', 'diverged', 'stop_reason']
        assert summary['k'].tolist() == [3]

        stats = pandas.read_csv(str(out / 'stats.csv'))
        assert stats.loc[0, 'n_runs'] == 1

        metadata = read_json(str(out / 'metadata.json'))
        assert metadata['command'] == 'sweep-k'
        assert metadata['runs'] == 1
        assert metadata['failed'] == 0

        assert os.path.exists(str(out / 'timings.csv'))
        assert os.path.exists(str(out / 'trajectories' / 'k003_seed0.jsonl'))
        assert os.path.exists(str(out / 'students' / 'k003_seed0.json'))
        assert not os.path.exists(str(out / 'errors.csv'))

    def test_sweep_is_deterministic(self, runner, tmp_path):
        config = write_document(tmp_path, 'config.json', SMOKE)

        invoke(runner, 'sweep-k', '--config', config, '--jobs', 1, '--out', tmp_path / 'first')
        invoke(runner, 'sweep-k', '--config', config, '--jobs', 1, '--out', tmp_path / 'second')

        with open(str(tmp_path / 'first' / 'summary.csv')) as first, open(str(tmp_path / 'second' / 'summary.csv')) as second:
            assert first.read() == second.read()

    @pytest.mark.slow
    def test_worker_pool_writes_identical_tables(self, runner, tmp_path):
        config = write_document(tmp_path, 'config.json', dict(SMOKE, sweep=dict(SMOKE['sweep'], k_values=[3, 4], seeds=[0, 1])))

        invoke(runner, 'sweep-k', '--config', config, '--jobs', 1, '--out', tmp_path / 'serial')
        invoke(runner, 'sweep-k', '--config', config, '--jobs', 2, '--out', tmp_path / 'pooled')

        for name in ('summary.csv', 'stats.csv'):
            assert (tmp_path / 'serial' / name).read_bytes() == (tmp_path / 'pooled' / name).read_bytes()

    def test_seed_override_is_recorded(self, runner, tmp_path):
        config = write_document(tmp_path, 'config.json', SMOKE)

        invoke(runner, 'sweep-k', '--config', config, '--jobs', 1, '--seed', 7, '--out', tmp_path)

        assert read_json(str(tmp_path / 'metadata.json'))['config']['sweep']['master_seed'] == 7

    def test_unknown_field_is_a_configuration_error(self, runner, tmp_path):
        config = write_document(tmp_path, 'config.json', dict(SMOKE, student={'d': 4, 'width': 2}))

        result = invoke(runner, 'sweep-k', '--config', config, '--jobs', 1, '--out', tmp_path)

        assert result.exit_code == 1

    def test_malformed_json_is_a_configuration_error(self, runner, tmp_path):
        path = tmp_path / 'config.json'
        path.write_text('{"teacher": ')

        result = invoke(runner, 'sweep-k', '--config', path, '--jobs', 1)

        assert result.exit_code == 1

    def test_gru_config_needs_the_gru_command(self, runner, tmp_path):
        config = write_document(tmp_path, 'config.json', dict(SMOKE, teacher={'kind': 'gru', 'dh': 2}))

        result = invoke(runner, 'sweep-k', '--config', config, '--jobs', 1)

        assert result.exit_code == 1

    def test_init_scale_sweep_names_runs_by_scale(self, runner, tmp_path):
        obj = dict(SMOKE, sweep=dict(SMOKE['sweep'], scales=[0.01, 0.1]))
        config = write_document(tmp_path, 'config.json', obj)

        result = invoke(runner, 'sweep-init-scale', '--config', config, '--jobs', 1, '--out', tmp_path / 'sweep')
        assert result.exit_code == 0, result.output

        summary = pandas.read_csv(str(tmp_path / 'sweep' / 'summary.csv'))
        assert summary['scale'].tolist() == [0.01, 0.1]
        assert 'min_balancedness_ratio' in summary.columns
        assert os.path.exists(str(tmp_path / 'sweep' / 'trajectories' / 'scale0.01_k003_seed0.jsonl'))


class TestMoments:
    def test_compute_then_recover(self, runner, tmp_path):
        source = write_document(tmp_path, 'dist.json', {'atoms': [0.2, 0.8], 'weights': [0.5, 0.5]})

        result = invoke(runner, 'moments', 'compute', source, '--order', 4, '--out', tmp_path)
        assert result.exit_code == 0, result.output
        numpy.testing.assert_allclose(read_json(str(tmp_path / 'moments.json'))['moments'], [1.0, 0.5, 0.34, 0.26])

        result = invoke(runner, 'moments', 'recover', tmp_path / 'moments.json', '--out', tmp_path)
        assert result.exit_code == 0, result.output

        dist = read_json(str(tmp_path / 'distribution.json'))
        numpy.testing.assert_allclose(dist['atoms'], [0.2, 0.8], atol=1e-10)

    def test_compute_from_a_balanced_system(self, runner, tmp_path):
        invoke(runner, 'gen-teacher', '--dh', 3, '--out', tmp_path)

        result = invoke(runner, 'moments', 'compute', tmp_path / 'teacher.json', '--order', 5, '--out', tmp_path)
        assert result.exit_code == 0, result.output

        assert read_json(str(tmp_path / 'moments.json'))['moments'][0] == 1.0

    def test_rank_deficient_recovery_is_a_numeric_failure(self, runner, tmp_path):
        source = write_document(tmp_path, 'moments.json', {'moments': [1.0, 0.7, 0.49, 0.343]})

        result = invoke(runner, 'moments', 'recover', source, '--n', 2)

        assert result.exit_code == 2
        assert 'RankDeficientHankelError' in result.output

    def test_unbalanced_system_is_a_numeric_failure(self, runner, tmp_path):
        invoke(runner, 'gen-teacher', '--kind', 'delay', '--dh', 3, '--out', tmp_path)

        result = invoke(runner, 'moments', 'compute', tmp_path / 'teacher.json')

        assert result.exit_code == 2

    def test_wasserstein(self, runner, tmp_path):
        first = write_document(tmp_path, 'first.json', {'atoms': [0.0, 1.0], 'weights': [0.5, 0.5]})
        second = write_document(tmp_path, 'second.json', {'atoms': [0.5], 'weights': [1.0]})

        result = invoke(runner, 'moments', 'wasserstein', first, second, '--p', 2, '--out', tmp_path)
        assert result.exit_code == 0, result.output

        distances = read_json(str(tmp_path / 'wasserstein.json'))
        assert distances['w1'] == pytest.approx(0.5)
        assert distances['w1_cdf'] == pytest.approx(0.5)
        assert distances['wp'] == pytest.approx(0.5)

    def test_csv_tables(self, runner, tmp_path):
        source = write_document(tmp_path, 'dist.json', {'atoms': [0.2, 0.8], 'weights': [0.5, 0.5]})
        other = write_document(tmp_path, 'other.json', {'atoms': [0.5], 'weights': [1.0]})

        result = invoke(runner, 'moments', 'compute', source, '--order', 4, '--format', 'csv', '--out', tmp_path)
        assert result.exit_code == 0, result.output

        table = pandas.read_csv(str(tmp_path / 'moments.csv'))
        assert table['order'].tolist() == [0, 1, 2, 3]
        numpy.testing.assert_allclose(table['moment'], [1.0, 0.5, 0.34, 0.26])

        invoke(runner, 'moments', 'compute', source, '--order', 4, '--out', tmp_path)
        result = invoke(runner, 'moments', 'recover', tmp_path / 'moments.json', '--format', 'csv', '--out', tmp_path)
        assert result.exit_code == 0, result.output

        table = pandas.read_csv(str(tmp_path / 'distribution.csv'))
        assert list(table.columns) == ['atom', 'weight']
        numpy.testing.assert_allclose(table['atom'], [0.2, 0.8], atol=1e-10)

        result = invoke(runner, 'moments', 'wasserstein', source, other, '--format', 'csv', '--out', tmp_path)
        assert result.exit_code == 0, result.output

        table = pandas.read_csv(str(tmp_path / 'wasserstein.csv'))
        assert list(table.columns) == ['p', 'w1', 'w1_cdf', 'wp']
        assert table.loc[0, 'w1'] == pytest.approx(0.3)


class TestConfound:
    def test_writes_both_distributions(self, runner, tmp_path):
        result = invoke(runner, 'confound', '--dh', 2, '--out', tmp_path)
        assert result.exit_code == 0, result.output

        document = read_json(str(tmp_path / 'confounders.json'))
        numpy.testing.assert_allclose(document['moments_first'][:3], document['moments_second'][:3], atol=1e-9)
        assert document['gap'] >= 1e-3

    def test_csv_table(self, runner, tmp_path):
        result = invoke(runner, 'confound', '--dh', 2, '--format', 'csv', '--out', tmp_path)
        assert result.exit_code == 0, result.output

        table = pandas.read_csv(str(tmp_path / 'confounders.csv'))
        assert list(table.columns) == ['distribution', 'atom', 'weight']
        assert table['distribution'].tolist() == ['first', 'first', 'second', 'second']
        assert table.groupby('distribution')['weight'].sum().tolist() == pytest.approx([1.0, 1.0])


class TestVerify:
    def test_teacher_extrapolates_itself(self, runner, tmp_path):
        invoke(runner, 'gen-teacher', '--dh', 3, '--out', tmp_path)
        teacher = tmp_path / 'teacher.json'

        result = invoke(runner, 'verify', teacher, teacher, '--k', 5, '--out', tmp_path)
        assert result.exit_code == 0, result.output

        report = read_json(str(tmp_path / 'report.json'))
        assert report['first_k_match']
        assert report['extrapolates']
        assert report['w1'] == 0.0

    def test_training_length_beyond_horizon_is_a_numeric_failure(self, runner, tmp_path):
        invoke(runner, 'gen-teacher', '--dh', 3, '--out', tmp_path)
        teacher = tmp_path / 'teacher.json'

        result = invoke(runner, 'verify', teacher, teacher, '--k', 50, '--horizon', 10)

        assert result.exit_code == 2


class TestLogging:
    def test_unknown_level_falls_back(self, runner, tmp_path):
        result = runner.invoke(cli, ['gen-teacher', '--dh', '1', '--out', str(tmp_path)], env={'EXTRAPOLAB_LOG': 'chatty'})

        assert result.exit_code == 0
        assert json.loads((tmp_path / 'teacher.json').read_text())['model'] == 'linear'
