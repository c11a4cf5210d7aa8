"""Deterministic fixtures shaped like the published evaluation data.

Everything here is generated from fixed seeds or fixed schedules, so tests
and demos get byte-stable inputs:

* a three-event living-room demo log,
* a home log dominated by an alternating on/off pair (the shape behind the
  top-20 wildcarded pattern table),
* a 54-rule feature set used to calibrate the default usefulness threshold,
* two scripted evaluation phases (events plus feedback votes) that drive a
  real store end to end and land exactly on the published counters:
  phase 1 sends 160 recommendations, 76 answered, 7 useful; phase 2 sends
  120, 55 answered, 5 useful; 5 and 3 rules hit the ten-negative streak.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from importlib import resources
from pathlib import Path

from .events import DeviceGroup, Event, EventLog, SymbolPolicy, SymbolTable
from .rules import ActionCatalog, AssociationRule

UTC = timezone.utc


def data_path(name: str) -> Path:
    """Path of a bundled data file (demo log, default catalog, bench spec)."""
    return Path(resources.files("homeseq") / "data" / name)


# ---------------------------------------------------------------------------
# Living-room demo (three events, one pattern)
# ---------------------------------------------------------------------------

def living_room_demo_log() -> EventLog:
    """Evening light, reading light, light off: one user sequence."""
    mk = lambda ts, scene, source, seq: Event(
        timestamp=datetime.fromisoformat(ts).replace(tzinfo=UTC),
        home_id="H1", zone_id="Z3", zone_name="living room",
        device_id="D17", scene_id=scene, source_id=source,
        group=DeviceGroup.LIGHTING, seq=seq,
    )
    return EventLog("H1", (
        mk("2012-04-28T13:26:38", 434, 377, 0),
        mk("2012-04-28T13:30:39", 424, 381, 1),
        mk("2012-04-28T13:41:50", 422, 381, 2),
    ))


def default_action_catalog() -> ActionCatalog:
    """Off/standby scene codes per group; sources in [300, 400) are users."""
    return ActionCatalog(
        scenes_by_group={
            "lighting": frozenset({0, 422}),
            "audio": frozenset({0}),
            "shades": frozenset({0}),
            "climate": frozenset({0}),
        },
        user_sources=frozenset(range(300, 400)),
    )


# ---------------------------------------------------------------------------
# Table-I-shaped home: two symbols dominate, alternating
# ---------------------------------------------------------------------------

def table_i_log(seed: int = 2014, n_events: int = 6000) -> EventLog:
    """A home where one light pair dominates the stream.

    Long a,b,a,b runs (scene on / scene off) with occasional single-event
    substitutions inside a run, plus background traffic from other rooms.
    That makes (a,b) the top pair, keeps (b,a) second, and gives wildcarded
    interior patterns strictly more support than any single instantiation.
    """
    rng = random.Random(seed)
    base = datetime(2014, 1, 6, 6, 0, 0, tzinfo=UTC)

    def light(scene: int) -> tuple:
        return ("Z3", "living room", "D17", scene, DeviceGroup.LIGHTING)

    a = light(434)   # evening scene on
    b = light(422)   # off
    fill = ("Z3", "living room", "D18", 424, DeviceGroup.LIGHTING)  # reading lamp
    noise_pool = [
        ("Z1", "kitchen", "D21", 405, DeviceGroup.LIGHTING),
        ("Z1", "kitchen", "D22", 402, DeviceGroup.AUDIO),
        ("Z2", "bedroom", "D23", 409, DeviceGroup.SHADES),
        ("Z4", "office", "D24", 411, DeviceGroup.LIGHTING),
    ]

    plan: list[tuple] = []
    while len(plan) < n_events:
        run_pairs = 2 + min(int(rng.expovariate(0.35)), 12)
        for _ in range(run_pairs):
            plan.append(a)
            # rarely a different event lands between on and off
            if rng.random() < 0.06:
                plan.append(fill)
            plan.append(b)
        for _ in range(rng.randint(0, 3)):
            plan.append(rng.choice(noise_pool))

    events = []
    ts = base
    for seq, (zone, zone_name, device, scene, group) in enumerate(plan[:n_events]):
        ts = ts + timedelta(seconds=rng.randint(30, 600))
        events.append(Event(
            timestamp=ts, home_id="H7", zone_id=zone, zone_name=zone_name,
            device_id=device, scene_id=scene, source_id=300 + rng.randint(0, 80),
            group=group, seq=seq,
        ))
    return EventLog("H7", tuple(events))


# ---------------------------------------------------------------------------
# Phase-1-shaped rule features (usefulness threshold calibration)
# ---------------------------------------------------------------------------

def phase1_shaped_rules(seed: int = 51, n_rules: int = 54):
    """54 rules with feature spread plus a feedback score per rule.

    Scores lean on confidence and pattern length, matching the field
    finding; support and action position carry no signal.
    """
    rng = random.Random(seed)
    rules = []
    scores = []
    for k in range(n_rules):
        confidence = round(rng.uniform(0.25, 0.95), 3)
        length = rng.randint(2, 6)
        rule = AssociationRule(
            id=f"cal{k:02d}",
            home_id=f"H{1 + k % 8}",
            antecedent=tuple(f"S{k}x{i}" for i in range(length - 1)),
            consequent=f"S{k}y",
            support_count=rng.randint(20, 400),
            confidence=confidence,
            pattern_length=length,
            action_position=rng.randint(2, 6),
            weight=confidence * length,
        )
        rules.append(rule)
        scores.append(2.0 * confidence + 0.5 * length + rng.gauss(0.0, 0.05))
    return rules, scores


# ---------------------------------------------------------------------------
# Scripted evaluation phases
# ---------------------------------------------------------------------------

@dataclass
class PhaseFixture:
    phase: int
    window_from: datetime
    window_to: datetime
    symbol_table: SymbolTable
    rules: list[AssociationRule]
    timeline: list[tuple]          # ("event", Event) | ("vote", rec_id, vote, at)
    expected: dict = field(default_factory=dict)

    def load(self, store) -> None:
        store.register_symbol_table(self.symbol_table)
        store.register_rules(self.rules)
        for action in self.timeline:
            if action[0] == "event":
                store.ingest_event(action[1])
            else:
                _, rec_id, vote, at = action
                store.apply_vote(rec_id, vote, at=at)


_PHASE_SHAPES = {
    1: dict(
        n_rules=54, emitting=23, retiring=5, days=14,
        window_from=datetime(2015, 3, 1, tzinfo=UTC),
        seven_rec_rules=2,           # the rest of the emitters send six
        useful_votes=7, stray_negative_votes=19,
        expected=dict(sent=160, answered=76, useful=7, not_useful=69,
                      active=54, emitting=23, retired=5),
    ),
    2: dict(
        n_rules=46, emitting=17, retiring=3, days=34,
        window_from=datetime(2015, 4, 1, tzinfo=UTC),
        seven_rec_rules=6,
        useful_votes=5, stray_negative_votes=20,
        expected=dict(sent=120, answered=55, useful=5, not_useful=50,
                      active=46, emitting=17, retired=3),
    ),
}

_HOMES = [f"H{i}" for i in range(1, 9)]


def phase_fixture(phase: int) -> PhaseFixture:
    """Scripted events + votes reproducing one evaluation phase exactly.

    Each emitting rule gets its own (trigger, trigger, other) event triple
    per scheduled recommendation; symbols are unique per rule so matches
    never interfere.  Votes land an hour after their recommendation.
    Retiring rules collect ten consecutive negatives; the remaining votes
    spread over other rules without ever reaching the streak threshold.
    """
    shape = _PHASE_SHAPES[phase]
    window_from = shape["window_from"]
    days = shape["days"]
    window_to = window_from + timedelta(days=days)

    table = SymbolTable(SymbolPolicy("device"))
    rules: list[AssociationRule] = []
    symbols: dict[int, tuple[str, str, str]] = {}
    zones = [("Z1", "living room"), ("Z2", "kitchen"), ("Z3", "bedroom"),
             ("Z4", "office"), ("Z5", "hallway")]

    def register_symbol(home: str, zone: tuple, device: str, scene: int) -> str:
        probe = Event(
            timestamp=window_from, home_id=home, zone_id=zone[0], zone_name=zone[1],
            device_id=device, scene_id=scene, source_id=310, group=DeviceGroup.LIGHTING,
        )
        return table.assign(probe)

    for k in range(1, shape["n_rules"] + 1):
        home = _HOMES[(k - 1) % len(_HOMES)]
        zone = zones[k % len(zones)]
        sym_a = register_symbol(home, zone, f"P{phase}A{k}", 400)
        sym_b = register_symbol(home, zone, f"P{phase}B{k}", 401)
        sym_y = register_symbol(home, zone, f"P{phase}Y{k}", 422)
        symbols[k] = (sym_a, sym_b, sym_y)
        confidence = 0.30 + ((k * 7) % 60) / 100.0
        rules.append(AssociationRule(
            id=f"p{phase}r{k:02d}",
            home_id=home,
            antecedent=(sym_a, sym_b),
            consequent=sym_y,
            support_count=20 + k,
            confidence=confidence,
            pattern_length=3,
            action_position=3,
            weight=confidence * 3,
        ))

    noise_symbol_device = {home: f"P{phase}N{home}" for home in _HOMES}
    for home in _HOMES:
        register_symbol(home, zones[0], noise_symbol_device[home], 440)

    # --- schedule recommendations --------------------------------------------
    retiring = list(range(1, shape["retiring"] + 1))
    emitting = list(range(1, shape["emitting"] + 1))
    rec_counts: dict[int, int] = {}
    for k in emitting:
        if k in retiring:
            rec_counts[k] = 10
        elif k - len(retiring) <= shape["seven_rec_rules"]:
            rec_counts[k] = 7
        else:
            rec_counts[k] = 6

    @dataclass
    class _Trip:
        rule: int
        home: str
        start: datetime

    trips: list[_Trip] = []
    for k, count in rec_counts.items():
        home = rules[k - 1].home_id
        offset_minutes = (k * 53) % 600
        for j in range(count):
            day = int((j + 0.5) * days / count)
            start = window_from + timedelta(days=day, hours=8, minutes=offset_minutes)
            trips.append(_Trip(k, home, start))
    trips.sort(key=lambda t: (t.start, t.rule))

    events: list[Event] = []
    seq = 0

    def push(ev_time: datetime, home: str, zone: tuple, device: str, scene: int):
        nonlocal seq
        events.append(Event(
            timestamp=ev_time, home_id=home, zone_id=zone[0], zone_name=zone[1],
            device_id=device, scene_id=scene, source_id=310,
            group=DeviceGroup.LIGHTING, seq=seq,
        ))
        seq += 1

    emission_time: dict[tuple[int, int], datetime] = {}
    per_rule_counter: dict[int, int] = {}
    for trip in trips:
        k = trip.rule
        zone = zones[k % len(zones)]
        push(trip.start, trip.home, zone, f"P{phase}A{k}", 400)
        push(trip.start + timedelta(seconds=30), trip.home, zone, f"P{phase}B{k}", 401)
        push(trip.start + timedelta(seconds=60), trip.home, zones[0],
             noise_symbol_device[trip.home], 440)
        j = per_rule_counter.get(k, 0)
        per_rule_counter[k] = j + 1
        emission_time[(k, j)] = trip.start + timedelta(seconds=60)

    # recommendation ids are per-home emission ordinals
    per_home: dict[str, list[tuple[datetime, int, int]]] = {}
    for (k, j), at in emission_time.items():
        per_home.setdefault(rules[k - 1].home_id, []).append((at, k, j))
    rec_ids: dict[tuple[int, int], str] = {}
    for home, items in per_home.items():
        items.sort()
        for ordinal, (at, k, j) in enumerate(items, start=1):
            rec_ids[(k, j)] = f"rec-{home}-{ordinal:05d}"

    votes: list[tuple[datetime, str, str]] = []

    def vote(k: int, j: int, verdict: str):
        at = emission_time[(k, j)] + timedelta(hours=1)
        votes.append((at, rec_ids[(k, j)], verdict))

    for k in retiring:
        for j in range(10):
            vote(k, j, "not_useful")

    others = [k for k in emitting if k not in retiring]
    for k in others[:shape["useful_votes"]]:
        vote(k, 0, "useful")
    negative_targets = others[shape["useful_votes"]:]
    remaining = shape["stray_negative_votes"]
    round_no = 0
    while remaining > 0:
        for k in negative_targets:
            if remaining == 0:
                break
            if round_no < rec_counts[k]:
                vote(k, round_no, "not_useful")
                remaining -= 1
        round_no += 1

    timeline: list[tuple] = [("event", ev) for ev in events]
    timeline += [("vote", rec_id, verdict, at) for at, rec_id, verdict in votes]
    timeline.sort(key=lambda item: item[1].timestamp if item[0] == "event" else item[3])

    expected = dict(shape["expected"])
    expected["ratio"] = expected["useful"] / expected["answered"]
    expected["rate"] = expected["sent"] / days / len(_HOMES)
    return PhaseFixture(
        phase=phase,
        window_from=window_from,
        window_to=window_to,
        symbol_table=table,
        rules=rules,
        timeline=timeline,
        expected=expected,
    )
