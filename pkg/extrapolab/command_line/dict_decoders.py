# -*- coding: utf-8 -*-
#
# extrapolab: extrapolab/command_line/dict_decoders.py
#
# Copyright (c) 2026, extrapolab developers
# All rights reserved.

"""
Decoders for the blocks of an experiment configuration file.

Each decoder lists its ``fieldnames``, rejects unknown and missing required
fields, converts values to their types and fills the documented defaults.
Range checks live in the settings classes themselves.
"""

import enum
import typing

from .dict_pipe import DictDecoder
from .exceptions import FieldNotFoundError, FieldValueError

from ..experiments import ExperimentConfig, OptimizerSettings, OutputSettings, StudentSettings, SweepSettings, TeacherSettings, TrainSettings
from ..gru import STUDENT_INIT_SCALE_
from ..lds import Structure
from ..optim import InitKind, LossKind, Method

T = typing.TypeVar('T')
E = typing.TypeVar('E', bound=enum.Enum)


class BlockDictDecoder(DictDecoder[T]):
    block: str = ''
    required: typing.Tuple[str, ...] = ()

    def _check(self, obj: typing.Any) -> typing.Dict[str, typing.Any]:
        if not isinstance(obj, dict):
            raise FieldValueError(self.block, 'must be an object')

        for fieldname in obj:
            if fieldname not in self.fieldnames:
                raise FieldValueError(fieldname, 'is not recognized', block=self.block)

        for fieldname in self.required:
            if fieldname not in obj:
                raise FieldNotFoundError(fieldname, block=self.block)

        return obj

    def _int(self, obj: typing.Dict[str, typing.Any], fieldname: str, default: typing.Optional[int]) -> typing.Optional[int]:
        value = obj.get(fieldname, default)
        if value is None:
            return None
        if isinstance(value, bool) or not isinstance(value, int):
            raise FieldValueError(fieldname, 'must be an integer, got {0!r}'.format(value), block=self.block)

        return value

    def _float(self, obj: typing.Dict[str, typing.Any], fieldname: str, default: typing.Optional[float]) -> typing.Optional[float]:
        value = obj.get(fieldname, default)
        if value is None:
            return None
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise FieldValueError(fieldname, 'must be a number, got {0!r}'.format(value), block=self.block)

        return float(value)

    def _bool(self, obj: typing.Dict[str, typing.Any], fieldname: str, default: bool) -> bool:
        value = obj.get(fieldname, default)
        if not isinstance(value, bool):
            raise FieldValueError(fieldname, 'must be true or false, got {0!r}'.format(value), block=self.block)

        return value

    def _enum(self, obj: typing.Dict[str, typing.Any], fieldname: str, cls: typing.Type[E], default: E) -> E:
        value = obj.get(fieldname, default.value)
        try:
            return cls(value)
        except ValueError:
            raise FieldValueError(fieldname, 'must be one of {0}, got {1!r}'.format(', '.join(member.value for member in cls), value), block=self.block)

    def _list(self, obj: typing.Dict[str, typing.Any], fieldname: str, default: typing.Optional[typing.Sequence[typing.Any]]) -> typing.Optional[typing.List[typing.Any]]:
        value = obj.get(fieldname, default)
        if value is None:
            return None
        if not isinstance(value, (list, tuple)):
            raise FieldValueError(fieldname, 'must be a list, got {0!r}'.format(value), block=self.block)

        return list(value)

    def _int_list(self, obj: typing.Dict[str, typing.Any], fieldname: str, default: typing.Optional[typing.Sequence[int]]) -> typing.Optional[typing.Tuple[int, ...]]:
        values = self._list(obj, fieldname, default)
        if values is None:
            return None
        if any(isinstance(value, bool) or not isinstance(value, int) for value in values):
            raise FieldValueError(fieldname, 'must be a list of integers, got {0!r}'.format(values), block=self.block)

        return tuple(values)

    def _float_list(self, obj: typing.Dict[str, typing.Any], fieldname: str, default: typing.Optional[typing.Sequence[float]]) -> typing.Optional[typing.Tuple[float, ...]]:
        values = self._list(obj, fieldname, default)
        if values is None:
            return None
        if any(isinstance(value, bool) or not isinstance(value, (int, float)) for value in values):
            raise FieldValueError(fieldname, 'must be a list of numbers, got {0!r}'.format(values), block=self.block)

        return tuple(float(value) for value in values)


class TeacherDictDecoder(BlockDictDecoder[TeacherSettings]):
    block = 'teacher'
    required = ('kind', 'dh')

    def decode(self, obj: typing.Dict[str, typing.Any]) -> TeacherSettings:
        obj = self._check(obj)

        kind = obj['kind']
        if not isinstance(kind, str):
            raise FieldValueError('kind', 'must be a string, got {0!r}'.format(kind), block=self.block)

        return TeacherSettings(kind=kind, dh=self._int(obj, 'dh', None), target=self._float_list(obj, 'target', None))

    @property
    def fieldnames(self) -> typing.List[str]:
        return [
            'kind',
            'dh',
            'target',
        ]


class StudentDictDecoder(BlockDictDecoder[StudentSettings]):
    """
    Defaults: a symmetric balanced-random student at scale 1e-3; GRU students
    (``gru=True``) default to per-entry scale 1e-4.
    """

    block = 'student'
    required = ('d', )

    def __init__(self, gru: bool = False) -> None:
        super(StudentDictDecoder, self).__init__()

        self.gru = gru

    def decode(self, obj: typing.Dict[str, typing.Any]) -> StudentSettings:
        obj = self._check(obj)

        default_init = InitKind.GAUSSIAN_SCALED if self.gru else InitKind.BALANCED_RANDOM
        default_scale = STUDENT_INIT_SCALE_ if self.gru else StudentSettings.init_scale

        return StudentSettings(
            d=self._int(obj, 'd', None),
            structure=self._enum(obj, 'structure', Structure, Structure.GENERAL if self.gru else Structure.SYMMETRIC),
            init=self._enum(obj, 'init', InitKind, default_init),
            init_scale=self._float(obj, 'init_scale', default_scale),
        )

    @property
    def fieldnames(self) -> typing.List[str]:
        return [
            'd',
            'structure',
            'init',
            'init_scale',
        ]


class OptimizerDictDecoder(BlockDictDecoder[OptimizerSettings]):
    block = 'optimizer'

    def decode(self, obj: typing.Dict[str, typing.Any]) -> OptimizerSettings:
        obj = self._check(obj)

        milestones = self._list(obj, 'lr_milestones', [])
        for milestone in milestones:
            if not (isinstance(milestone, (list, tuple)) and len(milestone) == 2):
                raise FieldValueError('lr_milestones', 'must be a list of [step, multiplier] pairs, got {0!r}'.format(milestones), block=self.block)

        defaults = OptimizerSettings()

        return OptimizerSettings(
            method=self._enum(obj, 'method', Method, defaults.method),
            lr=self._float(obj, 'lr', defaults.lr),
            max_steps=self._int(obj, 'max_steps', defaults.max_steps),
            loss_kind=self._enum(obj, 'loss_kind', LossKind, defaults.loss_kind),
            early_stop_loss=self._float(obj, 'early_stop_loss', defaults.early_stop_loss),
            lr_milestones=tuple((int(step), float(multiplier)) for (step, multiplier) in milestones),
            batch_size=self._int(obj, 'batch_size', defaults.batch_size),
            record_every=self._int(obj, 'record_every', defaults.record_every),
            n_train=self._int(obj, 'n_train', defaults.n_train),
        )

    @property
    def fieldnames(self) -> typing.List[str]:
        return [
            'method',
            'lr',
            'max_steps',
            'loss_kind',
            'early_stop_loss',
            'lr_milestones',
            'batch_size',
            'record_every',
            'n_train',
        ]


class SweepDictDecoder(BlockDictDecoder[SweepSettings]):
    """
    ``k_values`` is either a list of training lengths or an inclusive
    ``{"from": a, "to": b}`` range.
    """

    block = 'sweep'
    required = ('k_values', )

    def decode(self, obj: typing.Dict[str, typing.Any]) -> SweepSettings:
        obj = self._check(obj)

        k_values = obj['k_values']
        if isinstance(k_values, dict):
            if set(k_values) != {'from', 'to'}:
                raise FieldValueError('k_values', 'range must have exactly the keys "from" and "to"', block=self.block)
            k_values = list(range(self._int(k_values, 'from', None), self._int(k_values, 'to', None) + 1))

        defaults = SweepSettings()

        return SweepSettings(
            k_values=self._int_list({'k_values': k_values}, 'k_values', None),
            seeds=self._int_list(obj, 'seeds', defaults.seeds),
            master_seed=self._int(obj, 'master_seed', defaults.master_seed),
            scales=self._float_list(obj, 'scales', defaults.scales),
            gru_eval_inputs=self._int(obj, 'gru_eval_inputs', defaults.gru_eval_inputs),
            gru_horizon=self._int(obj, 'gru_horizon', defaults.gru_horizon),
        )

    @property
    def fieldnames(self) -> typing.List[str]:
        return [
            'k_values',
            'seeds',
            'master_seed',
            'scales',
            'gru_eval_inputs',
            'gru_horizon',
        ]


class OutputDictDecoder(BlockDictDecoder[OutputSettings]):
    block = 'output'

    def decode(self, obj: typing.Dict[str, typing.Any]) -> OutputSettings:
        obj = self._check(obj)

        return OutputSettings(trajectories=self._bool(obj, 'trajectories', True), students=self._bool(obj, 'students', True))

    @property
    def fieldnames(self) -> typing.List[str]:
        return [
            'trajectories',
            'students',
        ]


class TrainDictDecoder(BlockDictDecoder[TrainSettings]):
    block = 'train'

    def decode(self, obj: typing.Dict[str, typing.Any]) -> TrainSettings:
        obj = self._check(obj)

        return TrainSettings(k=self._int(obj, 'k', None), seed=self._int(obj, 'seed', 0))

    @property
    def fieldnames(self) -> typing.List[str]:
        return [
            'k',
            'seed',
        ]


class ExperimentConfigDictDecoder(BlockDictDecoder[ExperimentConfig]):
    """
    Decode a whole configuration file. Sweeps need the ``teacher``,
    ``student`` and ``sweep`` blocks; the single-run command needs only
    ``student``.
    """

    block = 'config'

    def __init__(self, required: typing.Sequence[str] = ('teacher', 'student', 'sweep')) -> None:
        super(ExperimentConfigDictDecoder, self).__init__()

        self.required = tuple(required)

    def decode(self, obj: typing.Dict[str, typing.Any]) -> ExperimentConfig:
        obj = self._check(obj)

        teacher = TeacherDictDecoder().decode(obj['teacher']) if 'teacher' in obj else TeacherSettings()
        gru = teacher.kind == 'gru'
        student = StudentDictDecoder(gru=gru).decode(obj['student'])

        return ExperimentConfig(
            teacher=teacher,
            student=student,
            optimizer=OptimizerDictDecoder().decode(obj.get('optimizer', {})),
            sweep=SweepDictDecoder().decode(obj['sweep']) if 'sweep' in obj else SweepSettings(),
            output=OutputDictDecoder().decode(obj.get('output', {})),
        )

    def decode_train(self, obj: typing.Dict[str, typing.Any]) -> TrainSettings:
        obj = self._check(obj)

        return TrainDictDecoder().decode(obj.get('train', {}))

    @property
    def fieldnames(self) -> typing.List[str]:
        return [
            'teacher',
            'student',
            'optimizer',
            'sweep',
            'output',
            'train',
        ]
