# SPDX-FileCopyrightText: Copyright 2024, Contributors to lieswarm
# SPDX-License-Identifier: Apache-2.0

"""
Global numeric defaults.
"""


class LieswarmGlobals:
    # exp/log switch to series limits below this |angle|
    SMALL_ANGLE: float = 1e-8
    # barrier denominators at or below this raise SingularityError
    SINGULARITY_GUARD: float = 1e-9
    # central-difference step of the gradient oracle
    FD_STEP: float = 1e-5
    CSV_DIGITS: int = 17
    DEFAULT_SIGMA: float = 1.0
    SVG_HASH_SALT: str = "lieswarm"


__all__ = ["LieswarmGlobals"]
