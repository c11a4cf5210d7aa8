from datetime import datetime, timedelta, timezone

import pytest

from homeseq.engine import STATUS_EXPIRED, STATUS_NOT_USEFUL
from homeseq.errors import DuplicateVoteError, UnknownRecommendationError
from homeseq.events import DeviceGroup, Event, SymbolPolicy, SymbolTable
from homeseq.fixtures import phase_fixture
from homeseq.rules import AssociationRule
from homeseq.store import JournalStore

UTC = timezone.utc
BASE = datetime(2015, 6, 1, 8, 0, 0, tzinfo=UTC)


def event_for(name, at, home="H1"):
    return Event(timestamp=at, home_id=home, zone_id="Z1", zone_name="kitchen",
                 device_id=f"D-{name}", scene_id=410, source_id=310,
                 group=DeviceGroup.LIGHTING)


def build_world():
    table = SymbolTable(SymbolPolicy("device"))
    syms = {name: table.assign(event_for(name, BASE)) for name in ["a", "b", "c", "off"]}
    rule = AssociationRule(
        id="R1", home_id="H1", antecedent=(syms["a"], syms["b"]), consequent=syms["off"],
        support_count=10, confidence=0.8, pattern_length=3, action_position=3, weight=2.4,
    )
    return table, rule


def drive(store, table, rule, names, start=BASE, gap=60.0):
    store.register_symbol_table(table)
    store.register_rules([rule])
    out = []
    for i, name in enumerate(names):
        out += store.ingest_event(event_for(name, start + timedelta(seconds=gap * (i + 1))))
    return out


def test_ingest_emits_and_persists(tmp_path):
    table, rule = build_world()
    store = JournalStore(tmp_path)
    emitted = drive(store, table, rule, ["a", "b", "c"])
    assert len(emitted) == 1
    assert store.recommendations()[0].id == emitted[0].id
    assert store.recommendations(home="H1", status="pending")
    store.close()


def test_vote_updates_rule_and_is_idempotent(tmp_path):
    table, rule = build_world()
    store = JournalStore(tmp_path)
    emitted = drive(store, table, rule, ["a", "b", "c"])
    rec_id = emitted[0].id
    store.apply_vote(rec_id, "not_useful", at=BASE + timedelta(hours=1))
    assert store.rule("R1").negative_streak == 1
    assert store.recommendation(rec_id).status == STATUS_NOT_USEFUL
    with pytest.raises(DuplicateVoteError):
        store.apply_vote(rec_id, "useful")
    with pytest.raises(UnknownRecommendationError):
        store.apply_vote("rec-missing", "useful")
    store.close()


def test_crash_restart_reproduces_snapshot(tmp_path):
    table, rule = build_world()
    store = JournalStore(tmp_path)
    store.register_symbol_table(table)
    store.register_rules([rule])
    emitted = []
    # two tight triples, separated beyond the per-rule cooldown
    for block, offset in enumerate([timedelta(0), timedelta(hours=8)]):
        for i, name in enumerate(["a", "b", "c"]):
            at = BASE + offset + timedelta(seconds=60 * (i + 1))
            emitted += store.ingest_event(event_for(name, at))
    assert len(emitted) == 2
    store.apply_vote(emitted[0].id, "useful", at=BASE + timedelta(hours=1))
    before = store.snapshot()
    store.close()

    reopened = JournalStore(tmp_path)
    assert reopened.snapshot() == before
    assert reopened.rule("R1").feedback_log == ["useful"]
    reopened.close()


def test_restart_mid_journal_then_continue_matches_uninterrupted(tmp_path):
    table, rule = build_world()
    stream = ["a", "b", "c", "a", "b", "off", "a", "b", "c"]
    # three tight triples; blocks spaced past the 6 h cooldown
    times = [BASE + timedelta(hours=8 * (i // 3), seconds=60 * (i % 3))
             for i in range(len(stream))]

    full = JournalStore(tmp_path / "full")
    full.register_symbol_table(table)
    full.register_rules([rule])
    for name, at in zip(stream, times):
        full.ingest_event(event_for(name, at))
    expected = full.snapshot()
    full.close()

    table2, rule2 = build_world()
    half = JournalStore(tmp_path / "split")
    half.register_symbol_table(table2)
    half.register_rules([rule2])
    for name, at in zip(stream[:4], times[:4]):
        half.ingest_event(event_for(name, at))
    half.close()  # crash point

    resumed = JournalStore(tmp_path / "split")
    for name, at in zip(stream[4:], times[4:]):
        resumed.ingest_event(event_for(name, at))
    assert resumed.snapshot() == expected
    resumed.close()


def test_timeout_flush_is_replayable(tmp_path):
    table, rule = build_world()
    store = JournalStore(tmp_path)
    drive(store, table, rule, ["a", "b"])
    flush_at = BASE + timedelta(seconds=120 + 301)
    emitted = store.flush_timeouts(flush_at)
    assert len(emitted) == 1
    before = store.snapshot()
    store.close()
    reopened = JournalStore(tmp_path)
    assert reopened.snapshot() == before
    reopened.close()


def test_pending_recommendations_expire_after_ttl(tmp_path):
    table, rule = build_world()
    store = JournalStore(tmp_path)
    emitted = drive(store, table, rule, ["a", "b", "c"])
    store.flush_timeouts(BASE + timedelta(hours=25))
    assert store.recommendation(emitted[0].id).status == STATUS_EXPIRED
    # expiry survives restart
    before = store.snapshot()
    store.close()
    reopened = JournalStore(tmp_path)
    assert reopened.snapshot() == before
    reopened.close()


def test_streak_retirement_through_store(tmp_path):
    fx = phase_fixture(1)
    store = JournalStore(tmp_path)
    fx.load(store)
    retired = [r for r in store.list_rules() if r.retired_reason == "negative_streak"]
    assert len(retired) == 5
    assert all(not r.active and r.negative_streak >= 10 for r in retired)
    store.close()
