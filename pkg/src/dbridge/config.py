"""Run-wide numerical settings."""
from __future__ import annotations

import math
import os
from dataclasses import dataclass

N_MAX = 10**7
PRECISION_ENV = "DB_PRECISION_BITS"


def default_precision_bits(n_max: int = N_MAX) -> int:
    return math.ceil(math.log2(n_max)) + 40


def precision_bits() -> int:
    """Guard bits used for fractional parts; ``DB_PRECISION_BITS`` overrides."""
    raw = os.environ.get(PRECISION_ENV)
    if raw is None or raw.strip() == "":
        return default_precision_bits()
    bits = int(raw)
    if bits < 1:
        raise ValueError(f"{PRECISION_ENV} must be a positive integer, got {raw!r}")
    return bits


@dataclass
class Tolerances:
    map_abs: float = 1e-12
    inverse: float = 1e-10


TOLERANCES = Tolerances()
