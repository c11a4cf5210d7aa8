"""Reference miners: ground-truth brute force and a prefix-growth baseline.

``brute_force_mine`` is the pre-optimization design from before the hash-map
improvement: a first loop slides the window and records one raw sighting per
(sub-pattern, window), so the same occurrence is sighted once per overlapping
window, and a second pass mines the recorded sightings by sorting and
grouping them, de-duplicating start positions and applying the minimum
support only then.  No hash map keyed by pattern anywhere, which also makes
it structurally independent of the miner it checks (comparison-based
aggregation instead of hashing).  Slow on purpose; it is the ground truth.

``prefix_growth_mine`` is a generic projected-database pattern-growth miner
(the PrefixSpan family, restricted to contiguous extensions).  Generic
sequence miners consume a database of sequences, so the single event stream
is sharded into its sliding windows first; every window offset becomes a
projected-database entry and support is the number of distinct absolute
start positions.  Each tree node physically materializes its projected
database of (start, suffix) entries, which is what makes the classic design
copy-hungry.  It exists as a structurally different implementation for
differential testing and as the performance baseline.
"""
from __future__ import annotations

import time
import tracemalloc
from dataclasses import dataclass
from itertools import combinations
from typing import Callable, Iterable, Sequence

from .validation import (
    WILDCARD,
    check_parallel,
    check_symbol_sequence,
    check_timestamps,
)
from .wsdd import (
    MiningParams,
    Pattern,
    PeriodicityInfo,
    _SequenceMinerBase,
    _canonical_key,
    periodicity,
)


@dataclass
class BaselineResult:
    patterns: list[Pattern]
    miner_name: str
    wall_time: float
    peak_memory: int


def _prepare(seq, timestamps, params):
    params = (params or MiningParams()).validate()
    symbols = check_symbol_sequence(seq)
    times = None
    if timestamps is not None:
        check_parallel(symbols, timestamps)
        times = check_timestamps(timestamps)
    return symbols, times, params


def _finish(counted, n, times, params) -> list[Pattern]:
    """Filter by strict minimum support and attach periodicity.

    Kept separate from the wsdd module on purpose: the oracle's arithmetic is
    written out independently (count > min_support * windows).
    """
    out: list[Pattern] = []
    for key, starts in counted.items():
        length = len(key)
        windows = n - length + 1
        count = len(starts)
        if count <= params.min_support * windows:
            continue
        ordered = tuple(sorted(starts))
        if times is None:
            pinfo = PeriodicityInfo(False, None, None)
        else:
            pinfo = periodicity([times[i] for i in ordered], params.periodicity_cv_threshold)
        out.append(Pattern(key, count, count / windows, ordered, pinfo))
    out.sort(key=_canonical_key)
    return out


def _window_subpatterns(symbols, window_size, max_wildcards):
    """Yield (pattern, absolute start) for every sub-pattern of every window."""
    n = len(symbols)
    for w in range(n - window_size + 1):
        window = symbols[w:w + window_size]
        for j in range(window_size - 1):
            for length in range(2, window_size - j + 1):
                sub = window[j:j + length]
                start = w + j
                yield sub, start
                if max_wildcards:
                    for k in range(1, max_wildcards + 1):
                        for combo in combinations(range(1, length - 1), k):
                            masked = list(sub)
                            for pos in combo:
                                masked[pos] = WILDCARD
                            yield tuple(masked), start


def brute_force_mine(
    seq: Iterable[str],
    timestamps: Sequence[float] | None = None,
    params: MiningParams | None = None,
) -> list[Pattern]:
    """Two-phase miner: record every window sighting, then sort-and-group.

    Phase one enumerates every window and appends a raw (pattern, start)
    sighting, duplicates included.  Phase two mines the sighting list by
    sorting it and walking the runs; adjacent equal starts collapse there,
    which is the only de-duplication performed.  Identical contract to
    ``wsdd.mine``.
    """
    symbols, times, params = _prepare(seq, timestamps, params)
    n = len(symbols)
    if n < 2:
        return []
    window_size = min(params.max_window, n)

    sightings = list(_window_subpatterns(symbols, window_size, params.max_wildcards))
    sightings.sort()

    counted: dict[tuple[str, ...], list[int]] = {}
    idx = 0
    total = len(sightings)
    while idx < total:
        key = sightings[idx][0]
        starts: list[int] = []
        last = None
        while idx < total and sightings[idx][0] == key:
            start = sightings[idx][1]
            if start != last:
                starts.append(start)
                last = start
            idx += 1
        counted[key] = starts
    return _finish(counted, n, times, params)


def _prefix_growth_patterns(symbols, times, params) -> list[Pattern]:
    n = len(symbols)
    if n < 2:
        return []
    window = min(params.max_window, n)
    min_support = params.min_support
    # the loosest output threshold any descendant can face (length == window)
    prune_bound = min_support * (n - window + 1)
    max_wildcards = params.max_wildcards

    # Shard the stream into its sliding-window database and project every
    # window offset; the same absolute start shows up once per window that
    # contains it, so supports are sets of distinct starts.
    level1: dict[str, list[tuple[int, tuple[str, ...]]]] = {}
    for w in range(n - window + 1):
        win = symbols[w:w + window]
        for j in range(window):
            level1.setdefault(win[j], []).append((w + j, win[j + 1:]))

    counted: dict[tuple[str, ...], set[int]] = {}
    stack: list[tuple[tuple[str, ...], int, list[tuple[int, tuple[str, ...]]], set[int]]] = []
    for sym, db in level1.items():
        starts = {entry[0] for entry in db}
        if len(starts) > prune_bound:
            stack.append(((sym,), 0, db, starts))
    while stack:
        prefix, wildcards_used, db, starts = stack.pop()
        length = len(prefix)
        if length >= 2 and prefix[-1] != WILDCARD:
            if len(starts) > min_support * (n - length + 1):
                counted[prefix] = starts
        if length >= window:
            continue
        children: dict[str, list[tuple[int, tuple[str, ...]]]] = {}
        for start, suffix in db:
            if suffix:
                children.setdefault(suffix[0], []).append((start, suffix[1:]))
        for sym, child_db in children.items():
            child_starts = {entry[0] for entry in child_db}
            if len(child_starts) > prune_bound:
                stack.append((prefix + (sym,), wildcards_used, child_db, child_starts))
        if wildcards_used < max_wildcards and length + 1 < window:
            wild_db = [(start, suffix[1:]) for start, suffix in db if suffix]
            wild_starts = {entry[0] for entry in wild_db}
            if len(wild_starts) > prune_bound:
                stack.append((prefix + (WILDCARD,), wildcards_used + 1, wild_db, wild_starts))

    out: list[Pattern] = []
    for key, start_set in counted.items():
        windows = n - len(key) + 1
        starts = tuple(sorted(start_set))
        if times is None:
            pinfo = PeriodicityInfo(False, None, None)
        else:
            pinfo = periodicity([times[i] for i in starts], params.periodicity_cv_threshold)
        out.append(Pattern(key, len(starts), len(starts) / windows, starts, pinfo))
    out.sort(key=_canonical_key)
    return out


def instrument(name: str, fn: Callable[[], list[Pattern]]) -> BaselineResult:
    """Run a miner with wall-time and allocation-peak tracking."""
    already_tracing = tracemalloc.is_tracing()
    if not already_tracing:
        tracemalloc.start()
    else:
        tracemalloc.reset_peak()
    t0 = time.perf_counter()
    patterns = fn()
    wall = time.perf_counter() - t0
    _, peak = tracemalloc.get_traced_memory()
    if not already_tracing:
        tracemalloc.stop()
    return BaselineResult(patterns=patterns, miner_name=name, wall_time=wall, peak_memory=peak)


def prefix_growth_mine(
    seq: Iterable[str],
    timestamps: Sequence[float] | None = None,
    params: MiningParams | None = None,
) -> BaselineResult:
    """Projected-database prefix growth under contiguous semantics."""
    symbols, times, params = _prepare(seq, timestamps, params)
    return instrument(
        "prefix_growth", lambda: _prefix_growth_patterns(symbols, times, params)
    )


class BruteForceMiner(_SequenceMinerBase):
    """Ground-truth miner; ``fit`` exposes ``patterns_``."""

    def _mine(self, X, timestamps):
        return brute_force_mine(X, timestamps, self._params())


class PrefixGrowthMiner(_SequenceMinerBase):
    """Prefix-growth baseline; ``fit`` exposes ``patterns_`` and ``result_``."""

    def _mine(self, X, timestamps):
        self.result_ = prefix_growth_mine(X, timestamps, self._params())
        return self.result_.patterns
