"""Window-sliding pattern miner with de-duplicated occurrence counting.

The miner slides a window over the chronologically ordered symbol sequence
and counts, for every contiguous sub-pattern of length 2..max_window, the
distinct start positions at which it occurs.  Counting happens in the same
pass that enumerates candidates, keyed by the pattern itself in a hash map,
so no occurrence is ever counted twice however windows overlap.  Patterns
whose relative support exceeds the minimum survive; each carries a
periodicity summary derived from its occurrence timestamps.

Wildcards: an interior position may be replaced by a wildcard that matches
exactly one symbol of any value.  Wildcards never sit first or last (such
patterns are equivalent to shorter ones).
"""
from __future__ import annotations

import json
from collections import defaultdict
from dataclasses import dataclass
from itertools import combinations
from math import sqrt
from typing import Iterable, Sequence

from sklearn.base import BaseEstimator

from .errors import ValidationError
from .validation import (
    WILDCARD,
    check_fraction,
    check_non_negative_int,
    check_parallel,
    check_positive_int,
    check_symbol_sequence,
    check_timestamps,
)

DEFAULT_MAX_WINDOW = 5
DEFAULT_MIN_SUPPORT = 0.01
DEFAULT_PERIODICITY_CV_THRESHOLD = 0.15
#: A pattern needs at least this many occurrences before "constant interval"
#: means anything.
MIN_PERIODIC_OCCURRENCES = 3


@dataclass(frozen=True)
class MiningParams:
    max_window: int = DEFAULT_MAX_WINDOW
    min_support: float = DEFAULT_MIN_SUPPORT
    max_wildcards: int = 0
    periodicity_cv_threshold: float = DEFAULT_PERIODICITY_CV_THRESHOLD

    def validate(self) -> "MiningParams":
        check_positive_int(self.max_window, "max_window", minimum=2)
        check_fraction(self.min_support, "min_support")
        check_non_negative_int(self.max_wildcards, "max_wildcards")
        if self.periodicity_cv_threshold < 0:
            raise ValidationError("periodicity_cv_threshold must be >= 0")
        return self


@dataclass(frozen=True)
class PeriodicityInfo:
    is_periodic: bool
    mean_interval: float | None
    interval_cv: float | None


@dataclass(frozen=True)
class Pattern:
    """A mined contiguous pattern with its de-duplicated occurrence stats."""

    symbols: tuple[str, ...]
    support_count: int
    relative_support: float
    occurrence_starts: tuple[int, ...]
    periodicity: PeriodicityInfo

    @property
    def length(self) -> int:
        return len(self.symbols)

    @property
    def wildcard_positions(self) -> tuple[int, ...]:
        return tuple(i for i, s in enumerate(self.symbols) if s == WILDCARD)

    @property
    def is_wildcarded(self) -> bool:
        return WILDCARD in self.symbols

    def to_record(self, event_count: int | None = None) -> dict:
        rec = {
            "pattern": list(self.symbols),
            "count": self.support_count,
            "rel_support": self.relative_support,
            "periodic": self.periodicity.is_periodic,
            "mean_interval_s": self.periodicity.mean_interval,
        }
        if event_count:
            rec["rel_support_events"] = self.support_count / event_count
        return rec


def _canonical_key(p: Pattern):
    return (-p.support_count, len(p.symbols), p.symbols)


def periodicity(
    occurrence_times: Sequence[float],
    threshold: float = DEFAULT_PERIODICITY_CV_THRESHOLD,
) -> PeriodicityInfo:
    """Coefficient-of-variation test on inter-occurrence intervals.

    ``mean_interval`` is the mean of successive differences and
    ``interval_cv`` the population standard deviation of those differences
    divided by their mean.  A pattern is periodic when it occurred at least
    three times and the intervals stay within the CV threshold.  Fewer than
    two occurrences leave the intervals undefined.
    """
    times = check_timestamps(occurrence_times)
    n = len(times)
    if n < 2:
        return PeriodicityInfo(False, None, None)
    diffs = [b - a for a, b in zip(times, times[1:])]
    mean = sum(diffs) / len(diffs)
    if mean <= 0.0:
        # all occurrences share one timestamp; "interval" is meaningless
        return PeriodicityInfo(False, 0.0, None)
    var = sum((d - mean) ** 2 for d in diffs) / len(diffs)
    cv = sqrt(var) / mean
    return PeriodicityInfo(n >= MIN_PERIODIC_OCCURRENCES and cv <= threshold, mean, cv)


def _enumerate_occurrences(
    seq: tuple[str, ...], max_window: int, max_wildcards: int
) -> dict[tuple[str, ...], list[int]]:
    """One pass over the sequence: pattern -> ordered distinct start positions.

    Every (pattern, start) pair is visited exactly once, which is the
    de-duplication that overlapping windows would otherwise break.
    """
    n = len(seq)
    occurrences: defaultdict[tuple[str, ...], list[int]] = defaultdict(list)
    window = min(max_window, n)
    for i in range(n):
        limit = min(window, n - i)
        for length in range(2, limit + 1):
            key = seq[i:i + length]
            occurrences[key].append(i)
            if max_wildcards:
                interior = range(1, length - 1)
                for k in range(1, max_wildcards + 1):
                    for combo in combinations(interior, k):
                        masked = list(key)
                        for pos in combo:
                            masked[pos] = WILDCARD
                        occurrences[tuple(masked)].append(i)
    return occurrences


def mine(
    seq: Iterable[str],
    timestamps: Sequence[float] | None = None,
    params: MiningParams | None = None,
) -> list[Pattern]:
    """Mine all contiguous patterns whose relative support exceeds the minimum.

    ``relative_support`` normalizes the distinct-start count by the number of
    possible windows of the pattern's length (N - L + 1).  Output is sorted
    canonically (support desc, then length, then symbols) so identical inputs
    give identical lists.  Sequences shorter than 2 yield no patterns.
    """
    params = (params or MiningParams()).validate()
    symbols = check_symbol_sequence(seq)
    times: tuple[float, ...] | None = None
    if timestamps is not None:
        check_parallel(symbols, timestamps)
        times = check_timestamps(timestamps)
    n = len(symbols)
    if n < 2:
        return []

    occurrences = _enumerate_occurrences(symbols, params.max_window, params.max_wildcards)
    min_support = params.min_support
    threshold = params.periodicity_cv_threshold
    out: list[Pattern] = []
    for key, starts in occurrences.items():
        windows = n - len(key) + 1
        rel = len(starts) / windows
        if rel <= min_support:
            continue
        if times is None:
            pinfo = PeriodicityInfo(False, None, None)
        else:
            pinfo = periodicity([times[i] for i in starts], threshold)
        out.append(Pattern(key, len(starts), rel, tuple(starts), pinfo))
    out.sort(key=_canonical_key)
    return out


def mine_wildcarded(
    seq: Iterable[str],
    timestamps: Sequence[float] | None = None,
    params: MiningParams | None = None,
) -> list[Pattern]:
    """Same as :func:`mine`; named entry point for wildcard-enabled params.

    With ``max_wildcards=0`` the output is identical to :func:`mine`.
    """
    return mine(seq, timestamps, params)


def support_map(patterns: Iterable[Pattern]) -> dict[tuple[str, ...], int]:
    """pattern symbols -> support count, the shape differential tests compare."""
    return {p.symbols: p.support_count for p in patterns}


def write_patterns_jsonl(patterns: Iterable[Pattern], event_count: int | None = None) -> bytes:
    lines = [json.dumps(p.to_record(event_count), separators=(",", ":")) for p in patterns]
    return ("\n".join(lines) + ("\n" if lines else "")).encode("utf-8")


class _SequenceMinerBase(BaseEstimator):
    """Shared estimator plumbing for the three miners."""

    def __init__(
        self,
        max_window: int = DEFAULT_MAX_WINDOW,
        min_support: float = DEFAULT_MIN_SUPPORT,
        max_wildcards: int = 0,
        periodicity_cv_threshold: float = DEFAULT_PERIODICITY_CV_THRESHOLD,
    ):
        self.max_window = max_window
        self.min_support = min_support
        self.max_wildcards = max_wildcards
        self.periodicity_cv_threshold = periodicity_cv_threshold

    def _params(self) -> MiningParams:
        return MiningParams(
            max_window=self.max_window,
            min_support=self.min_support,
            max_wildcards=self.max_wildcards,
            periodicity_cv_threshold=self.periodicity_cv_threshold,
        )

    def _mine(self, X, timestamps):  # pragma: no cover - overridden
        raise NotImplementedError

    def fit(self, X, y=None, timestamps=None):
        """Mine the symbol sequence ``X`` (timestamps optional, parallel)."""
        self.patterns_ = self._mine(X, timestamps)
        self.n_events_ = len(tuple(X)) if not hasattr(X, "__len__") else len(X)
        return self

    def support_map_(self) -> dict[tuple[str, ...], int]:
        return support_map(self.patterns_)


class WsddMiner(_SequenceMinerBase):
    """Window-sliding miner with de-duplication, hash-map counting and
    minimum-support post-filtering.  After :meth:`fit`, mined patterns are in
    ``patterns_``.
    """

    def _mine(self, X, timestamps):
        return mine(X, timestamps, self._params())
