"""Operational shell: metrics, event intake (replay and live tail), HTTP API.

Replay drives the store from a log file under an injected clock, so a
1000x-accelerated run emits exactly what a real-time run would.  The API is
a thin JSON layer over the store; all timestamps on the wire are ISO-8601
UTC.
"""
from __future__ import annotations

import json
import logging
import math
import threading
import time
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone
from pathlib import Path
from typing import Iterator

from fastapi import Depends, FastAPI, HTTPException, Query, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .engine import STATUS_NOT_USEFUL, STATUS_USEFUL
from .errors import (
    DuplicateVoteError,
    HomeseqError,
    OrderingError,
    UnknownRecommendationError,
    ValidationError,
)
from .events import Event, EventLog
from .store import JournalStore

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Metrics
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MetricsSnapshot:
    window_from: datetime
    window_to: datetime
    recommendations_sent: int
    answered: int
    voted_useful: int
    voted_not_useful: int
    ratio_useful_answered: float
    active_rules: int
    rules_emitting: int
    rules_retired_by_streak: int
    recs_per_day_per_home: float

    def to_record(self) -> dict:
        return {
            "from": self.window_from.strftime("%Y-%m-%dT%H:%M:%SZ"),
            "to": self.window_to.strftime("%Y-%m-%dT%H:%M:%SZ"),
            "recommendations_sent": self.recommendations_sent,
            "answered": self.answered,
            "voted_useful": self.voted_useful,
            "voted_not_useful": self.voted_not_useful,
            "ratio_useful_answered": self.ratio_useful_answered,
            "active_rules": self.active_rules,
            "rules_emitting": self.rules_emitting,
            "rules_retired_by_streak": self.rules_retired_by_streak,
            "recs_per_day_per_home": self.recs_per_day_per_home,
        }


def compute_metrics(
    store: JournalStore,
    window_from: datetime | None = None,
    window_to: datetime | None = None,
) -> MetricsSnapshot:
    """Exact integer arithmetic over the recommendation/feedback history.

    A rule counts as active if it was active at any point inside the window
    (still active now, or retired within/after it).
    """
    recs = store.recommendations()
    if window_from is None:
        window_from = min((r.created_at for r in recs),
                          default=datetime(1970, 1, 1, tzinfo=timezone.utc))
    if window_to is None:
        window_to = max((r.created_at for r in recs),
                        default=datetime(1970, 1, 2, tzinfo=timezone.utc)) + timedelta(seconds=1)
    if window_to <= window_from:
        raise ValidationError("metrics window must have positive length")

    sent = [r for r in recs if window_from <= r.created_at < window_to]
    answered = [r for r in sent if r.status in (STATUS_USEFUL, STATUS_NOT_USEFUL)]
    useful = sum(1 for r in answered if r.status == STATUS_USEFUL)
    not_useful = len(answered) - useful

    active = 0
    retired_by_streak = 0
    for rule in store.list_rules():
        if rule.active:
            active += 1
        elif rule.retired_at is not None and rule.retired_at >= window_from:
            active += 1
        if (
            rule.retired_reason == "negative_streak"
            and rule.retired_at is not None
            and window_from <= rule.retired_at < window_to
        ):
            retired_by_streak += 1

    homes = {r.home_id for r in sent}
    days = max(1, math.ceil((window_to - window_from).total_seconds() / 86400))
    rate = len(sent) / days / max(1, len(homes))
    return MetricsSnapshot(
        window_from=window_from,
        window_to=window_to,
        recommendations_sent=len(sent),
        answered=len(answered),
        voted_useful=useful,
        voted_not_useful=not_useful,
        ratio_useful_answered=useful / max(1, len(answered)),
        active_rules=active,
        rules_emitting=len({r.rule_id for r in sent}),
        rules_retired_by_streak=retired_by_streak,
        recs_per_day_per_home=rate,
    )


# ---------------------------------------------------------------------------
# Intake: replay and live tail
# ---------------------------------------------------------------------------

def replay_log(
    store: JournalStore,
    log: EventLog,
    speed: float = 0.0,
    sleep=time.sleep,
) -> list:
    """Feed a whole log through the store in order.

    ``speed`` > 0 paces the replay at that multiple of real time; 0 replays
    as fast as possible.  Pacing only affects wall time, never the emitted
    recommendations: all engine timing runs on event timestamps.  A final
    flush past the completion timeout resolves trailing matches.
    """
    emitted = []
    prev_ts: float | None = None
    for event in log:
        ts = event.timestamp.timestamp()
        if speed > 0 and prev_ts is not None and ts > prev_ts:
            sleep((ts - prev_ts) / speed)
        emitted.extend(store.ingest_event(event))
        prev_ts = ts
    if prev_ts is not None:
        emitted.extend(store.flush_timeouts(prev_ts + store.policy.completion_timeout_s + 1.0))
    return emitted


def tail_events(
    path: str | Path,
    poll_interval: float = 1.0,
    stop: threading.Event | None = None,
    from_start: bool = True,
) -> Iterator[Event]:
    """Follow a growing JSONL event file, yielding events as lines complete.

    Malformed lines are skipped with a log message, matching the parser's
    tolerance policy.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(path)
    stop = stop or threading.Event()
    offset = 0 if from_start else path.stat().st_size
    seq = 0
    buffer = ""
    while not stop.is_set():
        size = path.stat().st_size
        if size > offset:
            with open(path, "r", encoding="utf-8") as fh:
                fh.seek(offset)
                chunk = fh.read()
                offset = fh.tell()
            buffer += chunk
            while "\n" in buffer:
                line, buffer = buffer.split("\n", 1)
                if not line.strip():
                    continue
                try:
                    yield Event.from_record(json.loads(line), seq=seq)
                    seq += 1
                except (ValueError, KeyError, TypeError) as exc:
                    logger.warning("tail: skipping malformed line: %s", exc)
        else:
            stop.wait(poll_interval)


# ---------------------------------------------------------------------------
# HTTP API
# ---------------------------------------------------------------------------

class FeedbackBody(BaseModel):
    vote: str


def create_app(store: JournalStore, api_token: str | None = None, ui_dir: str | None = None):
    app = FastAPI(title="homeseq", version="0.1.0")

    def check_token(request: Request):
        if api_token is None:
            return
        supplied = request.headers.get("x-api-token")
        auth = request.headers.get("authorization", "")
        if auth.startswith("Bearer "):
            supplied = supplied or auth[len("Bearer "):]
        if supplied != api_token:
            raise HTTPException(status_code=401, detail="invalid or missing API token")

    @app.get("/api/health")
    def health():
        return {"status": "ok", "rules": len(store.rules)}

    @app.get("/api/recommendations", dependencies=[Depends(check_token)])
    def list_recommendations(home: str | None = None, status: str | None = None):
        recs = store.recommendations(home=home, status=status)
        out = []
        for rec in recs:
            rule = store.rules.get(rec.rule_id)
            summary = None
            if rule is not None:
                summary = {
                    "confidence": rule.confidence,
                    "weight": rule.weight,
                    "pattern_length": rule.pattern_length,
                }
            out.append({
                **rec.to_record(),
                "voted_at": rec.voted_at.strftime("%Y-%m-%dT%H:%M:%SZ") if rec.voted_at else None,
                "rule": summary,
            })
        return out

    @app.post("/api/recommendations/{rec_id}/feedback", dependencies=[Depends(check_token)])
    def post_feedback(rec_id: str, body: FeedbackBody):
        if body.vote not in ("useful", "not_useful"):
            raise HTTPException(status_code=422, detail=f"invalid vote {body.vote!r}")
        try:
            rec = store.apply_vote(rec_id, body.vote)
        except UnknownRecommendationError:
            raise HTTPException(status_code=404, detail=f"unknown recommendation {rec_id}")
        except DuplicateVoteError as exc:
            raise HTTPException(status_code=409, detail=str(exc))
        return {"id": rec.id, "status": rec.status}

    @app.get("/api/rules", dependencies=[Depends(check_token)])
    def list_rules(home: str | None = None):
        return [rule.to_record() for rule in store.list_rules(home=home)]

    @app.get("/api/metrics", dependencies=[Depends(check_token)])
    def metrics(
        from_: str | None = Query(None, alias="from"),
        to: str | None = Query(None),
    ):
        try:
            window_from = _parse_api_ts(from_)
            window_to = _parse_api_ts(to)
            snap = compute_metrics(store, window_from, window_to)
        except (ValidationError, ValueError) as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        return snap.to_record()

    @app.post("/api/events", dependencies=[Depends(check_token)])
    def post_event(body: dict):
        try:
            event = Event.from_record(body)
        except (KeyError, ValueError, TypeError) as exc:
            raise HTTPException(status_code=422, detail=f"malformed event: {exc}")
        try:
            emitted = store.ingest_event(event)
        except OrderingError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        return {"accepted": True, "emitted": [rec.id for rec in emitted]}

    @app.exception_handler(HomeseqError)
    def homeseq_error_handler(request, exc):
        return JSONResponse(status_code=422, content={"detail": str(exc)})

    if ui_dir:
        from fastapi.staticfiles import StaticFiles
        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app


def _parse_api_ts(raw: str | None) -> datetime | None:
    if not raw:
        return None
    text = raw.replace("Z", "+00:00")
    ts = datetime.fromisoformat(text)
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts
