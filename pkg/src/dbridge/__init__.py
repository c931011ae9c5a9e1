"""Standing waves of the cubic focusing NLS on the double-bridge graph."""

from .alpha import (
    CATALOG,
    AlphaRatio,
    ConstructedAlpha,
    PrecisionExhausted,
    QuadraticAlpha,
    RationalAlpha,
    construct_alpha,
    dichotomy_seq,
    parse_alpha,
)

__version__ = "0.1.0"

__all__ = [
    "CATALOG",
    "AlphaRatio",
    "ConstructedAlpha",
    "PrecisionExhausted",
    "QuadraticAlpha",
    "RationalAlpha",
    "construct_alpha",
    "dichotomy_seq",
    "parse_alpha",
]
