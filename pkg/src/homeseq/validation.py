"""Input validation helpers used by the estimators and module-level functions.

These play the role sklearn's ``check_array`` plays for numeric estimators:
normalize the accepted input shapes once, fail early with a clear message.
"""
from __future__ import annotations

import math
from datetime import datetime, timezone
from typing import Iterable, Sequence

from .errors import ValidationError

#: Reserved token marking a wildcard position inside a pattern.
WILDCARD = "*"


def check_symbol_sequence(seq: Iterable[str]) -> tuple[str, ...]:
    """Return ``seq`` as a tuple of symbol strings.

    The wildcard token is reserved and may not appear as a real symbol.
    """
    out = tuple(seq)
    for sym in out:
        if not isinstance(sym, str) or not sym:
            raise ValidationError(f"symbols must be non-empty strings, got {sym!r}")
        if sym == WILDCARD:
            raise ValidationError(f"symbol {WILDCARD!r} is reserved for wildcards")
    return out


def as_epoch_seconds(value: datetime | float | int) -> float:
    """Convert a timestamp (aware datetime or epoch number) to epoch seconds."""
    if isinstance(value, datetime):
        if value.tzinfo is None:
            value = value.replace(tzinfo=timezone.utc)
        return value.timestamp()
    ts = float(value)
    if not math.isfinite(ts):
        raise ValidationError(f"timestamp must be finite, got {value!r}")
    return ts


def check_timestamps(
    timestamps: Iterable[datetime | float | int],
    expected_length: int | None = None,
) -> tuple[float, ...]:
    """Normalize timestamps to non-decreasing epoch seconds."""
    out = tuple(as_epoch_seconds(t) for t in timestamps)
    if expected_length is not None and len(out) != expected_length:
        raise ValidationError(
            f"expected {expected_length} timestamps parallel to the sequence, got {len(out)}"
        )
    for a, b in zip(out, out[1:]):
        if b < a:
            raise ValidationError("timestamps must be non-decreasing")
    return out


def check_fraction(value: float, name: str) -> float:
    value = float(value)
    if not (0.0 <= value <= 1.0) or not math.isfinite(value):
        raise ValidationError(f"{name} must be a fraction in [0, 1], got {value!r}")
    return value


def check_positive_int(value: int, name: str, minimum: int = 1) -> int:
    if not isinstance(value, int) or isinstance(value, bool) or value < minimum:
        raise ValidationError(f"{name} must be an integer >= {minimum}, got {value!r}")
    return value


def check_non_negative_int(value: int, name: str) -> int:
    return check_positive_int(value, name, minimum=0)


def check_parallel(seq: Sequence, timestamps: Sequence, what: str = "timestamps") -> None:
    if len(seq) != len(timestamps):
        raise ValidationError(
            f"sequence and {what} must be parallel: {len(seq)} vs {len(timestamps)}"
        )
