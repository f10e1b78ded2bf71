# -*- coding: utf-8 -*-
#
# extrapolab: extrapolab/version.py
#
# Copyright (c) 2026, extrapolab developers
# All rights reserved.

__version__ = '0.1.0'
