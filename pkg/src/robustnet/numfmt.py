"""Decimal-string formatting used by every file format and the CLI.

All numeric payloads are exchanged as decimal strings.  Serialization uses
the shortest representation that round-trips the IEEE-754 double exactly
(never more than 17 significant digits), so deserialize(serialize(x)) is
bit-identical.  Human-readable output rounds to 6 significant digits.
"""

from __future__ import annotations

import math


def format_decimal(x: float) -> str:
    s = repr(float(x))
    if s.endswith(".0"):
        return s[:-2]
    return s


def format_human(x: float) -> str:
    return format(float(x), ".6g")


def parse_decimal(s, what: str = "value") -> float:
    """Parse a decimal string into a finite float; reject anything else."""
    if isinstance(s, bool) or not isinstance(s, str):
        raise ValueError(f"{what} must be a decimal string, got {s!r}")
    try:
        x = float(s)
    except ValueError:
        raise ValueError(f"{what} is not a decimal number: {s!r}") from None
    if not math.isfinite(x):
        raise ValueError(f"{what} must be finite, got {s!r}")
    return x


def format_vector(values, human: bool = False) -> list[str]:
    fmt = format_human if human else format_decimal
    return [fmt(v) for v in values]
