# -*- coding: utf-8 -*-
#
# extrapolab: extrapolab/command_line/exceptions.py
#
# Copyright (c) 2026, extrapolab developers
# All rights reserved.

import typing

from ..exceptions import ConfigurationError, CustomException


class FieldNotFoundError(ConfigurationError):
    def __init__(self, fieldname: str, block: typing.Optional[str] = None) -> None:
        if block is None:
            msg = 'field \'{0}\' is not defined'.format(fieldname.replace('\'', '\\\''))
        else:
            msg = 'field \'{0}\' is not defined in block \'{1}\''.format(fieldname.replace('\'', '\\\''), block)

        super(FieldNotFoundError, self).__init__(msg)

        self.fieldname = fieldname
        self.block = block


class FieldValueError(ConfigurationError):
    def __init__(self, fieldname: str, reason: str, block: typing.Optional[str] = None) -> None:
        if block is None:
            msg = 'field \'{0}\' {1}'.format(fieldname.replace('\'', '\\\''), reason)
        else:
            msg = 'field \'{0}\' in block \'{1}\' {2}'.format(fieldname.replace('\'', '\\\''), block, reason)

        super(FieldValueError, self).__init__(msg)

        self.fieldname = fieldname
        self.block = block


class FieldNotUniqueError(CustomException):
    def __init__(self, fieldname: str) -> None:
        msg = 'field \'{0}\' has already been taken'.format(fieldname.replace('\'', '\\\''))

        super(FieldNotUniqueError, self).__init__(msg)

        self.fieldname = fieldname
