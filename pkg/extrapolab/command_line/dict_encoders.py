# -*- coding: utf-8 -*-
#
# extrapolab: extrapolab/command_line/dict_encoders.py
#
# Copyright (c) 2026, extrapolab developers
# All rights reserved.

import typing

from .dict_pipe import DictEncoder

from ..experiments import RunOutcome


class RunKeyDictEncoder(DictEncoder[RunOutcome]):
    def __init__(self, with_scale: bool = False) -> None:
        super(RunKeyDictEncoder, self).__init__()

        self.with_scale = with_scale

    def encode(self, outcome: RunOutcome) -> typing.Dict[str, typing.Any]:
        row = {}

        if self.with_scale:
            row['scale'] = outcome.scale

        row['k'] = outcome.k
        row['seed'] = outcome.seed

        return row

    @property
    def fieldnames(self) -> typing.List[str]:
        return (['scale'] if self.with_scale else []) + [
            'k',
            'seed',
        ]


class SweepRowDictEncoder(DictEncoder[RunOutcome]):
    def __init__(self, with_balancedness: bool = False) -> None:
        super(SweepRowDictEncoder, self).__init__()

        self.with_balancedness = with_balancedness

    def encode(self, outcome: RunOutcome) -> typing.Dict[str, typing.Any]:
        row = {}

        row['final_loss'] = outcome.final_loss
        row['extrap_error'] = outcome.extrap_error
        row['non_extrapolating'] = outcome.non_extrapolating
        row['diverged'] = outcome.diverged
        row['stop_reason'] = outcome.stop_reason

        if self.with_balancedness:
            row['min_balancedness_ratio'] = outcome.min_balancedness_ratio

        return row

    @property
    def fieldnames(self) -> typing.List[str]:
        return [
            'final_loss',
            'extrap_error',
            'non_extrapolating',
            'diverged',
            'stop_reason',
        ] + (['min_balancedness_ratio'] if self.with_balancedness else [])


class TimingDictEncoder(DictEncoder[RunOutcome]):
    def encode(self, outcome: RunOutcome) -> typing.Dict[str, typing.Any]:
        return {
            'wall_time_s': outcome.wall_time_s,
        }

    @property
    def fieldnames(self) -> typing.List[str]:
        return [
            'wall_time_s',
        ]


class ErrorDictEncoder(DictEncoder[RunOutcome]):
    def __init__(self, fieldname_prefix: str = 'Run') -> None:
        super(ErrorDictEncoder, self).__init__()

        self.fieldname_prefix = fieldname_prefix

    def encode(self, outcome: RunOutcome) -> typing.Dict[str, typing.Any]:
        row = {}

        row['{0}_Error_Name'.format(self.fieldname_prefix)] = outcome.error_name
        row['{0}_Error_Message'.format(self.fieldname_prefix)] = outcome.error_message

        return row

    @property
    def fieldnames(self) -> typing.List[str]:
        return [
            '{0}_Error_Name'.format(self.fieldname_prefix),
            '{0}_Error_Message'.format(self.fieldname_prefix),
        ]
