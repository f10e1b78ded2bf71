# -*- coding: utf-8 -*-
#
# extrapolab: extrapolab/command_line/dict_pipe.py
#
# Copyright (c) 2026, extrapolab developers
# All rights reserved.

import abc
import typing

import pandas

from .exceptions import FieldNotUniqueError

from ..experiments import RunOutcome

T = typing.TypeVar('T')


class DictDecoder(abc.ABC, typing.Generic[T]):
    def __init__(self) -> None:
        super(DictDecoder, self).__init__()

    @abc.abstractmethod
    def decode(self, obj: typing.Dict[str, typing.Any]) -> T:
        raise NotImplementedError()  # pragma: no cover

    @property
    @abc.abstractmethod
    def fieldnames(self) -> typing.List[str]:
        raise NotImplementedError()  # pragma: no cover


class DictEncoder(abc.ABC, typing.Generic[T]):
    def __init__(self) -> None:
        super(DictEncoder, self).__init__()

    @abc.abstractmethod
    def encode(self, inst: T) -> typing.Dict[str, typing.Any]:
        raise NotImplementedError()  # pragma: no cover

    @property
    @abc.abstractmethod
    def fieldnames(self) -> typing.List[str]:
        raise NotImplementedError()  # pragma: no cover


class RowPipe(object):
    """
    Turn sorted run outcomes into an output table and an error table.

    Every outcome produces an output row (key columns then ``encoder_out``
    columns); failed outcomes also produce an error row (key columns then
    ``encoder_err`` columns).
    """

    def __init__(self, encoder_key: DictEncoder[RunOutcome], encoder_out: DictEncoder[RunOutcome], encoder_err: DictEncoder[RunOutcome]) -> None:
        super(RowPipe, self).__init__()

        self.encoder_key = encoder_key
        self.encoder_out = encoder_out
        self.encoder_err = encoder_err

        self.fieldnames_out = self._join(encoder_key.fieldnames, encoder_out.fieldnames)
        self.fieldnames_err = self._join(encoder_key.fieldnames, encoder_err.fieldnames)

    @staticmethod
    def _join(fieldnames_key: typing.List[str], fieldnames: typing.List[str]) -> typing.List[str]:
        joined = list(fieldnames_key)

        for fieldname in fieldnames:
            if fieldname in joined:
                raise FieldNotUniqueError(fieldname)

            joined.append(fieldname)

        return joined

    def run(self, outcomes: typing.Iterable[RunOutcome]) -> typing.Tuple[pandas.DataFrame, pandas.DataFrame]:
        rows_out = []
        rows_err = []

        for outcome in outcomes:
            key_row = self.encoder_key.encode(outcome)

            out_row = key_row.copy()
            out_row.update(self.encoder_out.encode(outcome))
            rows_out.append(out_row)

            if outcome.failed:
                err_row = key_row.copy()
                err_row.update(self.encoder_err.encode(outcome))
                rows_err.append(err_row)

        return pandas.DataFrame(rows_out, columns=self.fieldnames_out), pandas.DataFrame(rows_err, columns=self.fieldnames_err)
