# -*- coding: utf-8 -*-
#
# extrapolab: extrapolab/__init__.py
#
# Copyright (c) 2026, extrapolab developers
# All rights reserved.
