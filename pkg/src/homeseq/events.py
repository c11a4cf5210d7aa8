"""Event data model, log parsing/serialization, and symbolization.

A smart-home log is a chronological list of scene activations.  Each line
carries the zone (room), the device, the scene id (what happened) and the
source id (who triggered it).  Mining and stream matching never look at raw
events; they operate on compact symbols derived from a configurable
granularity policy, so the symbol table built here is the bridge between
logs, mined patterns and live recommendations.
"""
from __future__ import annotations

import csv
import io
import json
import logging
from dataclasses import dataclass
from datetime import datetime, timezone
from enum import Enum
from typing import BinaryIO, Callable, Iterable, Iterator, TextIO

from .errors import FormatError, ValidationError

logger = logging.getLogger(__name__)

#: Fraction of malformed lines above which parsing aborts with FormatError.
MALFORMED_LINE_TOLERANCE = 0.5

JSONL_FIELDS = ("ts", "home", "zone", "zone_name", "device", "scene", "source", "group")


class DeviceGroup(str, Enum):
    LIGHTING = "lighting"
    SHADES = "shades"
    AUDIO = "audio"
    CLIMATE = "climate"
    VENTILATION = "ventilation"
    JOKER = "joker"
    BROADCAST = "broadcast"
    UNKNOWN = "unknown"

    @classmethod
    def coerce(cls, raw: str) -> "DeviceGroup":
        """Map arbitrary group labels onto the known set (unknown bucket otherwise)."""
        try:
            return cls(str(raw).strip().lower())
        except ValueError:
            return cls.UNKNOWN


def parse_timestamp(raw: str) -> datetime:
    """Parse an ISO-8601 timestamp; naive values are taken as UTC."""
    text = str(raw).strip()
    if text.endswith("Z"):
        text = text[:-1] + "+00:00"
    ts = datetime.fromisoformat(text)
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc)


def format_timestamp(ts: datetime) -> str:
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


@dataclass(frozen=True)
class Event:
    """One timestamped smart-home action."""

    timestamp: datetime
    home_id: str
    zone_id: str
    zone_name: str
    device_id: str
    scene_id: int
    source_id: int
    group: DeviceGroup = DeviceGroup.UNKNOWN
    seq: int = 0  # ingestion order, breaks timestamp ties

    def __post_init__(self) -> None:
        if self.scene_id < 0 or self.source_id < 0:
            raise ValidationError("scene_id and source_id must be non-negative")
        if self.timestamp.tzinfo is None:
            object.__setattr__(self, "timestamp", self.timestamp.replace(tzinfo=timezone.utc))

    def sort_key(self) -> tuple[datetime, int]:
        return (self.timestamp, self.seq)

    def to_record(self) -> dict:
        return {
            "ts": format_timestamp(self.timestamp),
            "home": self.home_id,
            "zone": self.zone_id,
            "zone_name": self.zone_name,
            "device": self.device_id,
            "scene": self.scene_id,
            "source": self.source_id,
            "group": self.group.value,
        }

    @classmethod
    def from_record(cls, rec: dict, seq: int = 0) -> "Event":
        return cls(
            timestamp=parse_timestamp(rec["ts"]),
            home_id=str(rec["home"]),
            zone_id=str(rec["zone"]),
            zone_name=str(rec.get("zone_name", "")),
            device_id=str(rec["device"]),
            scene_id=int(rec["scene"]),
            source_id=int(rec["source"]),
            group=DeviceGroup.coerce(rec.get("group", "unknown")),
            seq=seq,
        )


@dataclass(frozen=True)
class EventLog:
    """Chronologically ordered events of a single home."""

    home_id: str
    events: tuple[Event, ...]

    def __post_init__(self) -> None:
        prev: Event | None = None
        for ev in self.events:
            if ev.home_id != self.home_id:
                raise ValidationError(
                    f"event home {ev.home_id!r} does not match log home {self.home_id!r}"
                )
            if prev is not None and ev.timestamp < prev.timestamp:
                raise ValidationError("event log timestamps must be non-decreasing")
            prev = ev

    def __len__(self) -> int:
        return len(self.events)

    def __iter__(self) -> Iterator[Event]:
        return iter(self.events)

    def timestamps(self) -> tuple[float, ...]:
        return tuple(ev.timestamp.timestamp() for ev in self.events)

    def filter(self, predicate: Callable[[Event], bool]) -> "EventLog":
        return EventLog(self.home_id, tuple(ev for ev in self.events if predicate(ev)))


@dataclass(frozen=True)
class ParseResult:
    log: EventLog
    skipped: int
    total_lines: int


def _coerce_text_stream(source) -> TextIO:
    if isinstance(source, (str, bytes)):
        data = source.decode("utf-8") if isinstance(source, bytes) else source
        return io.StringIO(data)
    if isinstance(source, io.TextIOBase):
        return source
    # binary file object
    return io.TextIOWrapper(source, encoding="utf-8")


def _parse_jsonl_line(line: str, seq: int) -> Event:
    rec = json.loads(line)
    if not isinstance(rec, dict):
        raise ValueError("jsonl line is not an object")
    return Event.from_record(rec, seq=seq)


def parse_log(source: BinaryIO | TextIO | str | bytes, fmt: str = "jsonl") -> ParseResult:
    """Parse a line-oriented event log.

    Malformed lines are skipped and counted; more than
    ``MALFORMED_LINE_TOLERANCE`` of bad lines aborts with :class:`FormatError`
    because that almost always means the wrong ``fmt`` was selected.
    Events come back sorted by (timestamp, line number).
    """
    if fmt not in ("jsonl", "csv"):
        raise ValidationError(f"unknown log format {fmt!r}")
    stream = _coerce_text_stream(source)

    events: list[Event] = []
    skipped = 0
    total = 0
    if fmt == "jsonl":
        for idx, line in enumerate(stream):
            if not line.strip():
                continue
            total += 1
            try:
                events.append(_parse_jsonl_line(line, seq=idx))
            except (ValueError, KeyError, TypeError) as exc:
                skipped += 1
                logger.debug("skipping malformed jsonl line %d: %s", idx + 1, exc)
    else:
        reader = csv.DictReader(stream)
        if reader.fieldnames is None or not set(JSONL_FIELDS) <= set(reader.fieldnames):
            raise FormatError("csv input must carry a header row with the event fields")
        for idx, row in enumerate(reader):
            total += 1
            try:
                events.append(Event.from_record(row, seq=idx))
            except (ValueError, KeyError, TypeError) as exc:
                skipped += 1
                logger.debug("skipping malformed csv line %d: %s", idx + 2, exc)

    if total and skipped / total > MALFORMED_LINE_TOLERANCE:
        raise FormatError(
            f"{skipped}/{total} lines malformed; input does not look like {fmt}"
        )

    events.sort(key=Event.sort_key)
    homes = {ev.home_id for ev in events}
    if len(homes) > 1:
        raise FormatError(f"log mixes multiple homes: {sorted(homes)}")
    home_id = events[0].home_id if events else ""
    return ParseResult(EventLog(home_id, tuple(events)), skipped=skipped, total_lines=total)


def serialize_log(log: EventLog, fmt: str = "jsonl") -> bytes:
    if fmt == "jsonl":
        lines = (json.dumps(ev.to_record(), separators=(",", ":")) for ev in log)
        return ("\n".join(lines) + ("\n" if len(log) else "")).encode("utf-8")
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=JSONL_FIELDS)
        writer.writeheader()
        for ev in log:
            writer.writerow(ev.to_record())
        return buf.getvalue().encode("utf-8")
    raise ValidationError(f"unknown log format {fmt!r}")


# ---------------------------------------------------------------------------
# Symbolization
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SymbolPolicy:
    """Granularity of the event→symbol mapping.

    ``device`` keys on (zone, device, scene); ``group`` collapses devices of
    the same group inside a zone.
    """

    level: str = "device"

    def __post_init__(self) -> None:
        if self.level not in ("device", "group"):
            raise ValidationError(f"unknown symbol policy level {self.level!r}")

    def key(self, ev: Event) -> tuple[str, str, int]:
        middle = ev.device_id if self.level == "device" else ev.group.value
        return (ev.zone_id, middle, ev.scene_id)


@dataclass(frozen=True)
class SymbolInfo:
    symbol: str
    desc: str
    zone_id: str
    zone_name: str
    device_or_group: str
    scene_id: int
    group: str


class SymbolTable:
    """Bidirectional registry of symbols, stable across mining and streaming.

    Symbols are assigned in first-appearance order (S1, S2, ...).  The table
    can be exported, reloaded and then extended with fresh events, so rules
    extracted from a mined log keep matching the live stream.
    """

    def __init__(self, policy: SymbolPolicy | None = None):
        self.policy = policy or SymbolPolicy()
        self._by_key: dict[tuple[str, str, int], str] = {}
        self._info: dict[str, SymbolInfo] = {}

    def __len__(self) -> int:
        return len(self._info)

    def __contains__(self, symbol: str) -> bool:
        return symbol in self._info

    def assign(self, ev: Event) -> str:
        key = self.policy.key(ev)
        sym = self._by_key.get(key)
        if sym is not None:
            return sym
        sym = f"S{len(self._by_key) + 1}"
        self._by_key[key] = sym
        middle = key[1]
        desc = f"{ev.zone_name or ev.zone_id} / {middle} / scene {ev.scene_id}"
        self._info[sym] = SymbolInfo(
            symbol=sym,
            desc=desc,
            zone_id=ev.zone_id,
            zone_name=ev.zone_name,
            device_or_group=middle,
            scene_id=ev.scene_id,
            group=ev.group.value,
        )
        return sym

    def lookup(self, symbol: str) -> SymbolInfo | None:
        return self._info.get(symbol)

    def merge(self, other: "SymbolTable") -> None:
        """Adopt another table's assignments (existing symbols win)."""
        for symbol, info in other._info.items():
            if symbol not in self._info:
                self._info[symbol] = info
                self._by_key[(info.zone_id, info.device_or_group, info.scene_id)] = symbol

    def symbols(self) -> tuple[str, ...]:
        return tuple(self._info)

    def to_jsonl(self) -> bytes:
        lines = []
        for info in self._info.values():
            lines.append(json.dumps({
                "symbol": info.symbol,
                "desc": info.desc,
                "zone_name": info.zone_name,
                "zone": info.zone_id,
                "key": info.device_or_group,
                "scene": info.scene_id,
                "group": info.group,
            }, separators=(",", ":")))
        return ("\n".join(lines) + ("\n" if lines else "")).encode("utf-8")

    @classmethod
    def from_jsonl(cls, data: bytes | str, policy: SymbolPolicy | None = None) -> "SymbolTable":
        table = cls(policy)
        text = data.decode("utf-8") if isinstance(data, bytes) else data
        for line in text.splitlines():
            if not line.strip():
                continue
            rec = json.loads(line)
            info = SymbolInfo(
                symbol=rec["symbol"],
                desc=rec["desc"],
                zone_id=rec.get("zone", ""),
                zone_name=rec.get("zone_name", ""),
                device_or_group=rec.get("key", ""),
                scene_id=int(rec.get("scene", 0)),
                group=rec.get("group", "unknown"),
            )
            table._info[info.symbol] = info
            table._by_key[(info.zone_id, info.device_or_group, info.scene_id)] = info.symbol
        return table


def symbolize(
    log: EventLog,
    policy: SymbolPolicy | None = None,
    table: SymbolTable | None = None,
) -> tuple[list[str], SymbolTable]:
    """Map a log to its symbol sequence, extending/creating the symbol table.

    Length-preserving and a pure function of (log, policy) when no existing
    table is passed in.
    """
    if table is None:
        table = SymbolTable(policy)
    elif policy is not None and table.policy != policy:
        raise ValidationError("explicit policy conflicts with the supplied table's policy")
    return [table.assign(ev) for ev in log], table


# ---------------------------------------------------------------------------
# Stream filters
# ---------------------------------------------------------------------------

def user_event_filter(user_sources: Iterable[int]) -> Callable[[Event], bool]:
    """Predicate keeping only user-generated events (by configured source ids)."""
    allowed = frozenset(int(s) for s in user_sources)
    return lambda ev: ev.source_id in allowed


def group_exclusion_filter(excluded: Iterable[DeviceGroup | str]) -> Callable[[Event], bool]:
    banned = frozenset(DeviceGroup.coerce(g) if isinstance(g, str) else g for g in excluded)
    return lambda ev: ev.group not in banned
