# -*- coding: utf-8 -*-
#
# extrapolab: extrapolab/file_ops.py
#
# Copyright (c) 2026, extrapolab developers
# All rights reserved.

"""
Readers and atomic writers for the JSON, JSON-lines and CSV artifacts.

Every writer renders the whole file in memory, writes it to a temporary file
in the destination directory and renames it into place, so a reader never
sees a partial file.
"""

import io
import json
import os
import tempfile
import typing

import pandas


def write_text_atomic(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)

    handle, tmp_path = tempfile.mkstemp(dir=directory, prefix='.', suffix='.tmp')
    try:
        with os.fdopen(handle, 'w', encoding='utf-8', newline='') as f:
            f.write(text)
        os.replace(tmp_path, path)
    except BaseException:
        if os.path.exists(tmp_path):
            os.remove(tmp_path)
        raise


def to_json(obj: typing.Any) -> str:
    return json.dumps(obj, indent=2) + '\n'

def read_json(path: str) -> typing.Any:
    with open(path, 'r', encoding='utf-8') as f:
        return json.load(f)

def write_json(path: str, obj: typing.Any) -> None:
    write_text_atomic(path, to_json(obj))


def to_jsonl(rows: typing.Iterable[typing.Dict[str, typing.Any]]) -> str:
    return ''.join(json.dumps(row) + '\n' for row in rows)

def read_jsonl(path: str) -> typing.List[typing.Dict[str, typing.Any]]:
    with open(path, 'r', encoding='utf-8') as f:
        return [json.loads(line) for line in f if line.strip()]

def write_jsonl(path: str, rows: typing.Iterable[typing.Dict[str, typing.Any]]) -> None:
    write_text_atomic(path, to_jsonl(rows))


def to_csv(data_frame: pandas.DataFrame) -> str:
    buffer = io.StringIO()
    data_frame.to_csv(buffer, index=False, lineterminator='\n')

    return buffer.getvalue()

def read_csv(path: str) -> pandas.DataFrame:
    return pandas.read_csv(path)

def write_csv(path: str, data_frame: pandas.DataFrame) -> None:
    write_text_atomic(path, to_csv(data_frame))
