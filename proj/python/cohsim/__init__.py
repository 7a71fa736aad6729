"""Trace-driven multicore cache coherence simulator."""

from ._core import (
    Engine,
    InputError,
    VerificationError,
    block_of,
    decide,
    generate_trace,
    parse_scheme,
    simulate,
)

__all__ = [
    "Engine",
    "InputError",
    "VerificationError",
    "block_of",
    "decide",
    "generate_trace",
    "parse_scheme",
    "simulate",
]
