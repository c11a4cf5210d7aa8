"""Streaming recommender: one finite-state matcher instance per event.

Every incoming event spawns a fresh matcher per active rule; an instance
survives its first event only if that event is the antecedent's head, then
advances strictly through the antecedent and dies on any mismatch.  Once the
antecedent completes, the very next event decides: if it is the consequent
the user already acted and nothing is sent, anything else (or silence past
the completion timeout) emits a recommendation.  When several rules resolve
at the same moment only the highest-weight rule speaks; emission is further
rate-limited per rule and per home/day.

All timing is driven by event timestamps and an injected clock, never the
wall clock, so replays are deterministic.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Iterable, Mapping

from .errors import OrderingError, ValidationError
from .events import Event, SymbolTable
from .rules import AssociationRule

logger = logging.getLogger(__name__)

STATUS_PENDING = "pending"
STATUS_USEFUL = "accepted_useful"
STATUS_NOT_USEFUL = "rejected_not_useful"
STATUS_EXPIRED = "expired"

RECOMMENDATION_TEMPLATE = (
    "Suggestion: {action_desc} in {zone_name}? Reply YES if useful, NO if not."
)


@dataclass(frozen=True)
class EmissionPolicy:
    per_rule_cooldown_s: float = 6 * 3600.0
    per_home_daily_cap: int = 3
    completion_timeout_s: float = 300.0
    stale_gap_s: float = 1800.0
    instance_budget: int = 10000
    gap_tolerance: int = 0
    recommendation_ttl_s: float = 24 * 3600.0

    def validate(self) -> "EmissionPolicy":
        for name in ("per_rule_cooldown_s", "completion_timeout_s",
                     "stale_gap_s", "recommendation_ttl_s"):
            if getattr(self, name) <= 0:
                raise ValidationError(f"{name} must be positive")
        if self.per_home_daily_cap < 1 or self.instance_budget < 1:
            raise ValidationError("per_home_daily_cap and instance_budget must be >= 1")
        if self.gap_tolerance < 0:
            raise ValidationError("gap_tolerance must be >= 0")
        return self


@dataclass(eq=False)
class MatcherInstance:
    rule_id: str
    position: int
    anchor_ts: float
    last_advance_ts: float
    gaps_used: int = 0
    completed_at: float | None = None


@dataclass
class Recommendation:
    id: str
    rule_id: str
    home_id: str
    created_at: datetime
    text: str
    status: str = STATUS_PENDING
    voted_at: datetime | None = None

    def to_record(self) -> dict:
        return {
            "id": self.id,
            "rule_id": self.rule_id,
            "home": self.home_id,
            "created_at": self.created_at.strftime("%Y-%m-%dT%H:%M:%SZ"),
            "text": self.text,
            "status": self.status,
        }


def render_text(rule: AssociationRule, table: SymbolTable) -> str:
    """Deterministic recommendation text carrying the consequent's room name."""
    info = table.lookup(rule.consequent)
    if info is None:
        logger.warning("symbol %s missing from table; using raw symbol", rule.consequent)
        action_desc = rule.consequent
        zone_name = rule.consequent
    else:
        action_desc = info.desc
        zone_name = info.zone_name
        if not zone_name:
            logger.warning("symbol %s has no zone name; using zone id", rule.consequent)
            zone_name = info.zone_id
    return RECOMMENDATION_TEMPLATE.format(action_desc=action_desc, zone_name=zone_name)


@dataclass
class _HomeState:
    home_id: str
    instances: list[MatcherInstance] = field(default_factory=list)
    completed: list[MatcherInstance] = field(default_factory=list)
    last_ts: float | None = None
    emission_ordinal: int = 0
    last_emit_by_rule: dict[str, float] = field(default_factory=dict)
    emitted_by_day: dict[str, int] = field(default_factory=dict)


class RecommenderEngine:
    """Per-home strict-contiguity matching over the live symbol stream."""

    def __init__(
        self,
        rules: Iterable[AssociationRule] | Mapping[str, AssociationRule],
        symbol_table: SymbolTable,
        policy: EmissionPolicy | None = None,
        ordering_tolerance_s: float = 0.0,
    ):
        if isinstance(rules, Mapping):
            self.rules: dict[str, AssociationRule] = dict(rules)
        else:
            self.rules = {rule.id: rule for rule in rules}
        self.symbol_table = symbol_table
        self.policy = (policy or EmissionPolicy()).validate()
        self.ordering_tolerance_s = ordering_tolerance_s
        self._homes: dict[str, _HomeState] = {}

    # -- state helpers ------------------------------------------------------

    def _home(self, home_id: str) -> _HomeState:
        state = self._homes.get(home_id)
        if state is None:
            state = self._homes[home_id] = _HomeState(home_id)
        return state

    def register_rule(self, rule: AssociationRule) -> None:
        self.rules[rule.id] = rule

    # -- emission machinery --------------------------------------------------

    def _policy_allows(self, home: _HomeState, rule_id: str, at_ts: float) -> bool:
        last = home.last_emit_by_rule.get(rule_id)
        if last is not None and at_ts - last < self.policy.per_rule_cooldown_s:
            return False
        day = datetime.fromtimestamp(at_ts, tz=timezone.utc).strftime("%Y-%m-%d")
        return home.emitted_by_day.get(day, 0) < self.policy.per_home_daily_cap

    def _emit(self, home: _HomeState, rule: AssociationRule, at_ts: float) -> Recommendation:
        home.emission_ordinal += 1
        home.last_emit_by_rule[rule.id] = at_ts
        day = datetime.fromtimestamp(at_ts, tz=timezone.utc).strftime("%Y-%m-%d")
        home.emitted_by_day[day] = home.emitted_by_day.get(day, 0) + 1
        return Recommendation(
            id=f"rec-{home.home_id}-{home.emission_ordinal:05d}",
            rule_id=rule.id,
            home_id=home.home_id,
            created_at=datetime.fromtimestamp(at_ts, tz=timezone.utc),
            text=render_text(rule, self.symbol_table),
        )

    def _resolve(
        self, home: _HomeState, candidates: list[MatcherInstance], at_ts: float
    ) -> list[Recommendation]:
        """Conflict resolution: highest weight, then confidence, then rule id."""
        eligible = []
        for inst in candidates:
            rule = self.rules.get(inst.rule_id)
            if rule is None or not rule.active:
                continue
            if self._policy_allows(home, rule.id, at_ts):
                eligible.append(rule)
        if not eligible:
            return []
        winner = min(eligible, key=lambda r: (-r.weight, -r.confidence, r.id))
        return [self._emit(home, winner, at_ts)]

    def _flush_due(self, home: _HomeState, now_ts: float) -> list[Recommendation]:
        """Timeout path: completed instances whose wait expired emit; stale
        partial instances vanish silently."""
        timeout = self.policy.completion_timeout_s
        due = [ci for ci in home.completed if now_ts - ci.completed_at >= timeout]
        emitted: list[Recommendation] = []
        if due:
            home.completed = [ci for ci in home.completed if ci not in due]
            by_moment: dict[float, list[MatcherInstance]] = {}
            for inst in due:
                by_moment.setdefault(inst.completed_at + timeout, []).append(inst)
            for moment in sorted(by_moment):
                emitted.extend(self._resolve(home, by_moment[moment], moment))
        stale_bound = now_ts - self.policy.stale_gap_s
        home.instances = [i for i in home.instances if i.last_advance_ts > stale_bound]
        return emitted

    # -- the stream ----------------------------------------------------------

    def step(self, event: Event) -> list[Recommendation]:
        """Feed one event; returns the recommendations it caused (<= 1 per
        resolution moment)."""
        home = self._home(event.home_id)
        ts = event.timestamp.timestamp()
        if home.last_ts is not None and ts < home.last_ts - self.ordering_tolerance_s:
            raise OrderingError(
                f"event at {event.timestamp} is older than the stream head"
            )
        home.last_ts = max(ts, home.last_ts or ts)
        symbol = self.symbol_table.assign(event)
        emitted = self._flush_due(home, ts)

        # completed antecedents resolve against this event: consequent seen
        # means the user acted, anything else asks the question
        if home.completed:
            suppressed = 0
            candidates = []
            for inst in home.completed:
                rule = self.rules.get(inst.rule_id)
                if rule is not None and symbol == rule.consequent:
                    suppressed += 1
                else:
                    candidates.append(inst)
            home.completed = []
            if candidates:
                emitted.extend(self._resolve(home, candidates, ts))

        # advance partial instances under strict contiguity
        survivors: list[MatcherInstance] = []
        for inst in home.instances:
            rule = self.rules.get(inst.rule_id)
            if rule is None or not rule.active:
                continue
            if symbol == rule.antecedent[inst.position]:
                inst.position += 1
                inst.last_advance_ts = ts
                if inst.position == len(rule.antecedent):
                    inst.completed_at = ts
                    home.completed.append(inst)
                else:
                    survivors.append(inst)
            elif inst.gaps_used < self.policy.gap_tolerance:
                inst.gaps_used += 1
                survivors.append(inst)
        home.instances = survivors

        # spawn a fresh instance per active rule; it only survives if this
        # event is the antecedent head
        for rule in self.rules.values():
            if not rule.active:
                continue
            if rule.home_id and rule.home_id != event.home_id:
                continue
            if symbol == rule.antecedent[0]:
                inst = MatcherInstance(rule.id, 1, ts, ts)
                if len(rule.antecedent) == 1:
                    inst.completed_at = ts
                    home.completed.append(inst)
                else:
                    home.instances.append(inst)
        overflow = len(home.instances) - self.policy.instance_budget
        if overflow > 0:
            home.instances = home.instances[overflow:]
        return emitted

    def on_timeout(self, now: datetime | float) -> list[Recommendation]:
        """Advance the injected clock with no event: fire due completions,
        garbage-collect stale partial instances."""
        now_ts = now.timestamp() if isinstance(now, datetime) else float(now)
        emitted: list[Recommendation] = []
        for home in self._homes.values():
            emitted.extend(self._flush_due(home, now_ts))
        return emitted

    def pending_instances(self, home_id: str) -> int:
        home = self._homes.get(home_id)
        if home is None:
            return 0
        return len(home.instances) + len(home.completed)
