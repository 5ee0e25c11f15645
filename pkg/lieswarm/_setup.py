# SPDX-FileCopyrightText: Copyright 2024, Contributors to lieswarm
# SPDX-License-Identifier: Apache-2.0

"""
Code to set up lieswarm imports.
"""

from __future__ import annotations

import logging

import numpy as np

logger = logging.getLogger("lieswarm")

logger.debug(f"Using numpy version {np.__version__}")


__all__ = ["logger"]
