"""Journaled persistence: an append-only record log plus an embedded store.

The journal (one JSON record per line: symbol table, rule registrations,
events, feedback votes, timeout flushes) is the source of truth.  Opening a
store replays its journal through a fresh engine, which both recovers from
crashes and guarantees that two replays of the same journal end in the same
state byte for byte.  The sqlite file is a queryable materialized view of
rules and recommendations, rebuilt on every open.

All writes funnel through one lock; events within a home are strictly
serialized, reads see a consistent snapshot.
"""
from __future__ import annotations

import json
import sqlite3
import threading
from datetime import datetime, timezone
from pathlib import Path

from .engine import (
    STATUS_EXPIRED,
    STATUS_NOT_USEFUL,
    STATUS_PENDING,
    STATUS_USEFUL,
    EmissionPolicy,
    Recommendation,
    RecommenderEngine,
)
from .errors import (
    DuplicateVoteError,
    UnknownRecommendationError,
    UnknownRuleError,
    ValidationError,
)
from .events import Event, SymbolTable
from .rules import VOTE_USEFUL, VOTES, AssociationRule, apply_feedback

_SCHEMA = """
CREATE TABLE IF NOT EXISTS rules (
    id TEXT PRIMARY KEY,
    home TEXT,
    data TEXT,
    active INTEGER,
    retired_reason TEXT,
    retired_at REAL
);
CREATE TABLE IF NOT EXISTS recommendations (
    id TEXT PRIMARY KEY,
    rule_id TEXT,
    home TEXT,
    created_at REAL,
    text TEXT,
    status TEXT,
    voted_at REAL
);
"""


def _iso(ts: float | None) -> str | None:
    if ts is None:
        return None
    return datetime.fromtimestamp(ts, tz=timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


class JournalStore:
    """Rules, recommendations and feedback behind a replayable journal."""

    def __init__(
        self,
        data_dir: str | Path,
        policy: EmissionPolicy | None = None,
        retirement_threshold: int = 10,
    ):
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self.journal_path = self.data_dir / "journal.jsonl"
        self.db_path = self.data_dir / "store.db"
        self.policy = (policy or EmissionPolicy()).validate()
        self.retirement_threshold = retirement_threshold

        self._lock = threading.RLock()
        self._replaying = False
        self.symbol_table = SymbolTable()
        self.rules: dict[str, AssociationRule] = {}
        self.engine = RecommenderEngine([], self.symbol_table, self.policy)
        self._recs: dict[str, Recommendation] = {}

        self._conn = sqlite3.connect(str(self.db_path), check_same_thread=False)
        self._conn.executescript(_SCHEMA)
        self._reset_tables()
        if self.journal_path.exists():
            self._replay_journal()

    # -- journal plumbing ----------------------------------------------------

    def _append_journal(self, record: dict) -> None:
        if self._replaying:
            return
        with open(self.journal_path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(record, separators=(",", ":")) + "\n")
            fh.flush()

    def _reset_tables(self) -> None:
        with self._conn:
            self._conn.execute("DELETE FROM rules")
            self._conn.execute("DELETE FROM recommendations")

    def _replay_journal(self) -> None:
        self._replaying = True
        try:
            with open(self.journal_path, "r", encoding="utf-8") as fh:
                for line in fh:
                    if not line.strip():
                        continue
                    self._apply(json.loads(line))
        finally:
            self._replaying = False

    def _apply(self, record: dict) -> list[Recommendation]:
        kind = record.get("kind")
        if kind == "symbols":
            table = SymbolTable.from_jsonl("\n".join(
                json.dumps(entry) for entry in record["table"]
            ))
            return self._apply_symbols(table)
        if kind == "rule":
            return self._apply_rule(AssociationRule.from_record(record["rule"]))
        if kind == "event":
            return self._apply_event(Event.from_record(record["event"], seq=record.get("seq", 0)))
        if kind == "feedback":
            self._apply_vote(record["rec_id"], record["vote"], record.get("at"))
            return []
        if kind == "flush":
            emitted, _ = self._apply_flush(float(record["now"]))
            return emitted
        raise ValidationError(f"unknown journal record kind {kind!r}")

    # -- appliers (shared by live calls and replay) ---------------------------

    def _apply_symbols(self, table: SymbolTable) -> list[Recommendation]:
        self.symbol_table.merge(table)
        return []

    def _apply_rule(self, rule: AssociationRule) -> list[Recommendation]:
        self.rules[rule.id] = rule
        self.engine.register_rule(rule)
        self._write_rule_row(rule)
        return []

    def _write_rule_row(self, rule: AssociationRule) -> None:
        retired_ts = rule.retired_at.timestamp() if rule.retired_at else None
        with self._conn:
            self._conn.execute(
                "INSERT OR REPLACE INTO rules VALUES (?,?,?,?,?,?)",
                (rule.id, rule.home_id, json.dumps(rule.to_record(), sort_keys=True),
                 int(rule.active), rule.retired_reason, retired_ts),
            )

    def _persist_recs(self, recs: list[Recommendation]) -> None:
        with self._conn:
            for rec in recs:
                self._recs[rec.id] = rec
                self._conn.execute(
                    "INSERT OR REPLACE INTO recommendations VALUES (?,?,?,?,?,?,?)",
                    (rec.id, rec.rule_id, rec.home_id, rec.created_at.timestamp(),
                     rec.text, rec.status, None),
                )

    def _expire_pending(self, now_ts: float) -> int:
        ttl = self.policy.recommendation_ttl_s
        expired = 0
        with self._conn:
            for rec in self._recs.values():
                if rec.status == STATUS_PENDING and rec.created_at.timestamp() + ttl <= now_ts:
                    rec.status = STATUS_EXPIRED
                    expired += 1
                    self._conn.execute(
                        "UPDATE recommendations SET status=? WHERE id=?",
                        (STATUS_EXPIRED, rec.id),
                    )
        return expired

    def _apply_event(self, event: Event) -> list[Recommendation]:
        emitted = self.engine.step(event)
        self._persist_recs(emitted)
        self._expire_pending(event.timestamp.timestamp())
        return emitted

    def _apply_flush(self, now_ts: float) -> tuple[list[Recommendation], int]:
        emitted = self.engine.on_timeout(now_ts)
        self._persist_recs(emitted)
        expired = self._expire_pending(now_ts)
        return emitted, expired

    def _apply_vote(self, rec_id: str, vote: str, at_iso: str | None) -> Recommendation:
        if vote not in VOTES:
            raise ValidationError(f"vote must be one of {VOTES}")
        rec = self._recs.get(rec_id)
        if rec is None:
            raise UnknownRecommendationError(rec_id)
        if rec.status != STATUS_PENDING:
            raise DuplicateVoteError(f"recommendation {rec_id} already resolved ({rec.status})")
        rule = self.rules.get(rec.rule_id)
        if rule is None:
            raise UnknownRuleError(rec.rule_id)
        at = datetime.fromisoformat(at_iso.replace("Z", "+00:00")) if at_iso else None
        apply_feedback(rule, vote, at=at, retirement_threshold=self.retirement_threshold)
        rec.status = STATUS_USEFUL if vote == VOTE_USEFUL else STATUS_NOT_USEFUL
        rec.voted_at = at
        with self._conn:
            self._conn.execute(
                "UPDATE recommendations SET status=?, voted_at=? WHERE id=?",
                (rec.status, at.timestamp() if at else None, rec.id),
            )
        self._write_rule_row(rule)
        return rec

    # -- public API ------------------------------------------------------------

    def register_symbol_table(self, table: SymbolTable) -> None:
        with self._lock:
            entries = [json.loads(line) for line in table.to_jsonl().decode().splitlines()]
            self._append_journal({"kind": "symbols", "table": entries})
            self._apply_symbols(table)

    def register_rules(self, rules) -> None:
        with self._lock:
            for rule in rules:
                self._append_journal({"kind": "rule", "rule": rule.to_record()})
                self._apply_rule(rule)

    def ingest_event(self, event: Event) -> list[Recommendation]:
        with self._lock:
            emitted = self._apply_event(event)
            self._append_journal({"kind": "event", "event": event.to_record(), "seq": event.seq})
            return emitted

    def flush_timeouts(self, now: datetime | float) -> list[Recommendation]:
        now_ts = now.timestamp() if isinstance(now, datetime) else float(now)
        with self._lock:
            emitted, expired = self._apply_flush(now_ts)
            if emitted or expired:
                # state changed between events; replay must see the same moment
                self._append_journal({"kind": "flush", "now": now_ts})
            return emitted

    def apply_vote(self, rec_id: str, vote: str, at: datetime | None = None) -> Recommendation:
        with self._lock:
            at = at or datetime.now(tz=timezone.utc)
            at_iso = at.strftime("%Y-%m-%dT%H:%M:%SZ")
            rec = self._apply_vote(rec_id, vote, at_iso)
            self._append_journal({"kind": "feedback", "rec_id": rec_id, "vote": vote, "at": at_iso})
            return rec

    def recommendations(
        self, home: str | None = None, status: str | None = None
    ) -> list[Recommendation]:
        with self._lock:
            out = [
                rec for rec in self._recs.values()
                if (home is None or rec.home_id == home)
                and (status is None or rec.status == status)
            ]
            out.sort(key=lambda r: (r.created_at, r.id), reverse=True)
            return out

    def recommendation(self, rec_id: str) -> Recommendation:
        rec = self._recs.get(rec_id)
        if rec is None:
            raise UnknownRecommendationError(rec_id)
        return rec

    def list_rules(self, home: str | None = None) -> list[AssociationRule]:
        with self._lock:
            out = [r for r in self.rules.values() if home is None or r.home_id == home]
            out.sort(key=lambda r: r.id)
            return out

    def rule(self, rule_id: str) -> AssociationRule:
        rule = self.rules.get(rule_id)
        if rule is None:
            raise UnknownRuleError(rule_id)
        return rule

    def snapshot(self) -> bytes:
        """Canonical byte-exact dump of rule and recommendation state."""
        with self._lock:
            state = {
                "rules": [r.to_record() for r in self.list_rules()],
                "recommendations": [
                    {**rec.to_record(),
                     "voted_at": rec.voted_at.strftime("%Y-%m-%dT%H:%M:%SZ") if rec.voted_at else None}
                    for rec in sorted(self._recs.values(), key=lambda r: r.id)
                ],
            }
        return json.dumps(state, sort_keys=True, separators=(",", ":")).encode("utf-8")

    def close(self) -> None:
        self._conn.close()
