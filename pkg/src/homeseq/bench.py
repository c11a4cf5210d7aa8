"""Synthetic event logs with planted ground truth, and the miner benchmark.

The generator writes a noise stream of i.i.d. symbols and then plants
pattern occurrences at known positions, displacing noise, so the manifest
holds the exact planted start positions.  Poisson-spaced gaps place
aperiodic plants; periodic plants use fixed spacing with a jitter knob so
periodicity detection has something to detect.  Event timestamps are evenly
spaced, keeping the position→time mapping trivial.

The benchmark harness runs each miner in a forked subprocess (so a timeout
can kill it), repeats runs and reports the median wall time plus the
allocation peak, one CSV row per (miner, log, params) combination.
"""
from __future__ import annotations

import csv
import io
import json
import multiprocessing as mp
import random
import statistics
import time
import tracemalloc
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Callable, Iterable, Sequence

from .errors import InfeasibleSpecError, ValidationError
from .events import DeviceGroup, Event, EventLog
from .oracle import brute_force_mine, prefix_growth_mine
from .validation import check_positive_int, check_symbol_sequence
from .wsdd import MiningParams, mine

BENCH_CSV_FIELDS = (
    "miner", "events", "min_support", "max_window",
    "wall_ms", "peak_mem_mib", "patterns_found",
)

MINERS: dict[str, Callable] = {
    "wsdd": lambda seq, ts, params: mine(seq, ts, params),
    "prefix_growth": lambda seq, ts, params: prefix_growth_mine(seq, ts, params).patterns,
    "brute_force": lambda seq, ts, params: brute_force_mine(seq, ts, params),
}

_ZONES = (
    ("Z1", "living room"), ("Z2", "kitchen"), ("Z3", "bedroom"),
    ("Z4", "office"), ("Z5", "hallway"),
)
_GROUPS = (DeviceGroup.LIGHTING, DeviceGroup.AUDIO, DeviceGroup.SHADES, DeviceGroup.CLIMATE)


@dataclass(frozen=True)
class PlantSpec:
    """One pattern to plant: symbols, target relative support, optional period."""

    symbols: tuple[str, ...]
    rel_support: float
    periodic_interval_s: float | None = None
    jitter_cv: float = 0.0


@dataclass(frozen=True)
class SyntheticSpec:
    alphabet_size: int
    event_count: int
    planted: tuple[PlantSpec, ...] = ()
    rng_seed: int = 0
    event_spacing_s: float = 30.0
    noise_weights: tuple[float, ...] | None = None
    home_id: str = "SYN1"
    start_time_s: float = 1420070400.0  # 2015-01-01T00:00:00Z
    #: keep planted symbols out of the noise stream, so the manifest holds
    #: every occurrence (required when asserting periodicity of plants)
    reserve_planted_symbols: bool = False

    def validate(self) -> "SyntheticSpec":
        check_positive_int(self.alphabet_size, "alphabet_size")
        check_positive_int(self.event_count, "event_count")
        if self.event_spacing_s <= 0:
            raise ValidationError("event_spacing_s must be positive")
        if self.noise_weights is not None and len(self.noise_weights) != self.alphabet_size:
            raise ValidationError("noise_weights must match alphabet_size")
        alphabet = set(self.alphabet())
        slots = 0
        for plant in self.planted:
            check_symbol_sequence(plant.symbols)
            if len(plant.symbols) < 2:
                raise ValidationError("planted patterns must have length >= 2")
            if not set(plant.symbols) <= alphabet:
                raise ValidationError(f"planted symbols {plant.symbols} not in alphabet")
            if not (0.0 < plant.rel_support <= 1.0):
                raise ValidationError("plant rel_support must be in (0, 1]")
            if plant.jitter_cv < 0:
                raise ValidationError("jitter_cv must be >= 0")
            slots += self._plant_count(plant) * len(plant.symbols)
        if slots > self.event_count:
            raise InfeasibleSpecError(
                f"planted occurrences need {slots} slots but only {self.event_count} exist"
            )
        return self

    def alphabet(self) -> list[str]:
        return [f"s{i}" for i in range(self.alphabet_size)]

    def _plant_count(self, plant: PlantSpec) -> int:
        windows = self.event_count - len(plant.symbols) + 1
        return max(1, round(plant.rel_support * windows))


@dataclass
class Manifest:
    """Exact ground truth: plant -> the start positions actually written."""

    event_count: int
    positions: dict[tuple[str, ...], list[int]] = field(default_factory=dict)
    symbol_events: dict[str, dict] = field(default_factory=dict)

    def planted_count(self, symbols: Sequence[str]) -> int:
        return len(self.positions.get(tuple(symbols), ()))

    def to_json(self) -> str:
        return json.dumps({
            "event_count": self.event_count,
            "plants": [
                {"pattern": list(k), "positions": v} for k, v in self.positions.items()
            ],
            "symbol_events": self.symbol_events,
        }, indent=2, sort_keys=True)


def _place_periodic(spec, plant, occupied, rng) -> list[int]:
    n = spec.event_count
    length = len(plant.symbols)
    count = spec._plant_count(plant)
    gap = plant.periodic_interval_s / spec.event_spacing_s
    if gap < length:
        raise InfeasibleSpecError("periodic interval shorter than the pattern itself")
    if (count - 1) * gap + length > n:
        raise InfeasibleSpecError(
            f"{count} periodic plants at {plant.periodic_interval_s}s do not fit"
        )
    positions = []
    pos = float(rng.uniform(0, max(1.0, gap / 2)))
    for _ in range(count):
        positions.append(int(round(pos)))
        step = gap * (1.0 + plant.jitter_cv * rng.gauss(0.0, 1.0))
        pos += max(float(length), step)
    return _settle(positions, length, occupied, n)


def _place_poisson(spec, plant, occupied, rng) -> list[int]:
    n = spec.event_count
    length = len(plant.symbols)
    count = spec._plant_count(plant)
    gaps = [rng.expovariate(1.0) for _ in range(count)]
    budget = n - count * length
    scale = budget / sum(gaps) if gaps and sum(gaps) > 0 else 0.0
    positions = []
    cursor = 0.0
    for idx, g in enumerate(gaps):
        cursor += g * scale
        positions.append(int(cursor) + idx * length)
    return _settle(positions, length, occupied, n)


def _settle(positions: list[int], length: int, occupied: bytearray, n: int) -> list[int]:
    """Shift plants forward past already-occupied slots; never drop one."""
    final = []
    for pos in positions:
        pos = max(0, min(pos, n - length))
        attempts = 0
        while any(occupied[pos:pos + length]):
            pos += 1
            attempts += 1
            if pos > n - length:
                pos = 0
            if attempts > n:
                raise InfeasibleSpecError("no free slot left for a planted occurrence")
        for k in range(pos, pos + length):
            occupied[k] = 1
        final.append(pos)
    return sorted(final)


def symbol_sequence(spec: SyntheticSpec) -> tuple[list[str], list[float], Manifest]:
    """Generate the raw symbol sequence, timestamps and the plant manifest."""
    spec = spec.validate()
    rng = random.Random(spec.rng_seed)
    n = spec.event_count
    occupied = bytearray(n)
    manifest = Manifest(event_count=n)

    placements: list[tuple[PlantSpec, list[int]]] = []
    for plant in spec.planted:
        if plant.periodic_interval_s is not None:
            placements.append((plant, _place_periodic(spec, plant, occupied, rng)))
    for plant in spec.planted:
        if plant.periodic_interval_s is None:
            placements.append((plant, _place_poisson(spec, plant, occupied, rng)))

    alphabet = spec.alphabet()
    weights = list(spec.noise_weights) if spec.noise_weights else [1.0] * len(alphabet)
    if spec.reserve_planted_symbols:
        reserved = {sym for plant in spec.planted for sym in plant.symbols}
        weights = [0.0 if sym in reserved else w for sym, w in zip(alphabet, weights)]
        if not any(weights):
            raise ValidationError("reserving planted symbols leaves no noise alphabet")
    seq = rng.choices(alphabet, weights=weights, k=n)
    for plant, positions in placements:
        for pos in positions:
            seq[pos:pos + len(plant.symbols)] = plant.symbols
        manifest.positions[plant.symbols] = positions

    timestamps = [spec.start_time_s + i * spec.event_spacing_s for i in range(n)]
    manifest.symbol_events = {sym: _symbol_event_fields(i) for i, sym in enumerate(alphabet)}
    return seq, timestamps, manifest


def _symbol_event_fields(index: int) -> dict:
    zone_id, zone_name = _ZONES[index % len(_ZONES)]
    return {
        "zone": zone_id,
        "zone_name": zone_name,
        "device": f"D{index:03d}",
        "scene": 400 + index,
        "source": 300 + index % 20,
        "group": _GROUPS[index % len(_GROUPS)].value,
    }


def generate(spec: SyntheticSpec) -> tuple[EventLog, Manifest]:
    """Materialize the synthetic sequence as an event log of one home."""
    seq, timestamps, manifest = symbol_sequence(spec)
    events = []
    for i, (sym, ts) in enumerate(zip(seq, timestamps)):
        fields = manifest.symbol_events[sym]
        events.append(Event(
            timestamp=datetime.fromtimestamp(ts, tz=timezone.utc),
            home_id=spec.home_id,
            zone_id=fields["zone"],
            zone_name=fields["zone_name"],
            device_id=fields["device"],
            scene_id=fields["scene"],
            source_id=fields["source"],
            group=DeviceGroup.coerce(fields["group"]),
            seq=i,
        ))
    return EventLog(spec.home_id, tuple(events)), manifest


# ---------------------------------------------------------------------------
# Benchmark harness
# ---------------------------------------------------------------------------

DEFAULT_TIMEOUT_S = 600.0
DEFAULT_REPEATS = 5


def _measure_once(miner: Callable, seq, timestamps, params) -> tuple[float, int, int]:
    tracemalloc.start()
    t0 = time.perf_counter()
    patterns = miner(seq, timestamps, params)
    wall = time.perf_counter() - t0
    _, peak = tracemalloc.get_traced_memory()
    tracemalloc.stop()
    return wall, peak, len(patterns)


def _subprocess_entry(queue, miner_name, seq, timestamps, params, repeats):
    walls = []
    peak = 0
    found = 0
    miner = MINERS[miner_name]
    miner(seq, timestamps, params)  # warm-up, discarded
    for _ in range(repeats):
        wall, mem, found = _measure_once(miner, seq, timestamps, params)
        walls.append(wall)
        peak = max(peak, mem)
    queue.put((statistics.median(walls), peak, found))


@dataclass
class BenchRow:
    miner: str
    events: int
    min_support: float
    max_window: int
    wall_ms: float | None
    peak_mem_mib: float | None
    patterns_found: int | None

    @property
    def dnf(self) -> bool:
        return self.wall_ms is None

    def as_csv(self) -> dict:
        return {
            "miner": self.miner,
            "events": self.events,
            "min_support": self.min_support,
            "max_window": self.max_window,
            "wall_ms": "DNF" if self.dnf else f"{self.wall_ms:.1f}",
            "peak_mem_mib": "" if self.peak_mem_mib is None else f"{self.peak_mem_mib:.1f}",
            "patterns_found": "" if self.patterns_found is None else self.patterns_found,
        }


def run_benchmark(
    datasets: Iterable[tuple[str, Sequence[str], Sequence[float]]],
    param_grid: Iterable[MiningParams],
    miners: Iterable[str] = ("wsdd", "prefix_growth", "brute_force"),
    repeats: int = DEFAULT_REPEATS,
    timeout_s: float = DEFAULT_TIMEOUT_S,
) -> list[BenchRow]:
    """Serial benchmark sweep; a miner exceeding the timeout is recorded DNF."""
    miners = list(miners)
    for name in miners:
        if name not in MINERS:
            raise ValidationError(f"unknown miner {name!r}; choose from {sorted(MINERS)}")
    rows: list[BenchRow] = []
    ctx = mp.get_context("fork")
    for dataset_name, seq, timestamps in datasets:
        seq = list(seq)
        timestamps = list(timestamps)
        for params in param_grid:
            for name in miners:
                queue = ctx.Queue()
                proc = ctx.Process(
                    target=_subprocess_entry,
                    args=(queue, name, seq, timestamps, params, repeats),
                )
                proc.start()
                proc.join(timeout_s)
                if proc.is_alive():
                    proc.terminate()
                    proc.join()
                    rows.append(BenchRow(name, len(seq), params.min_support,
                                         params.max_window, None, None, None))
                    continue
                wall, peak, found = queue.get()
                rows.append(BenchRow(
                    name, len(seq), params.min_support, params.max_window,
                    wall * 1000.0, peak / (1024 * 1024), found,
                ))
    return rows


def write_report_csv(rows: Iterable[BenchRow]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=BENCH_CSV_FIELDS)
    writer.writeheader()
    for row in rows:
        writer.writerow(row.as_csv())
    return buf.getvalue()


def spec_from_file(path_or_text: str, is_text: bool = False) -> SyntheticSpec:
    """Load a SyntheticSpec from a JSON or TOML document."""
    if is_text:
        text = path_or_text
    else:
        with open(path_or_text, "rb") as fh:
            raw = fh.read()
        text = raw.decode("utf-8")
    if path_or_text.strip().startswith("{") if is_text else text.lstrip().startswith("{"):
        data = json.loads(text)
    else:
        try:
            import tomllib  # Python >= 3.11
        except ModuleNotFoundError:
            import tomli as tomllib
        data = tomllib.loads(text)
    plants = tuple(
        PlantSpec(
            symbols=tuple(p["symbols"]),
            rel_support=float(p["rel_support"]),
            periodic_interval_s=p.get("periodic_interval_s"),
            jitter_cv=float(p.get("jitter_cv", 0.0)),
        )
        for p in data.get("planted", ())
    )
    return SyntheticSpec(
        alphabet_size=int(data["alphabet_size"]),
        event_count=int(data["event_count"]),
        planted=plants,
        rng_seed=int(data.get("rng_seed", 0)),
        event_spacing_s=float(data.get("event_spacing_s", 30.0)),
        home_id=str(data.get("home_id", "SYN1")),
    )
