"""Association rules from mined patterns, and the feedback-driven lifecycle.

A relevant pattern contains at least one energy-lowering action preceded by
at least one normal event.  The rule keeps the longest prefix of normal
events before the first action as antecedent X, that action as single
consequent Y, and discards whatever follows; confidence is
count(X followed by Y) / count(X) with both counts taken under the miner's
distinct-start occurrence semantics.

Feedback drives two mechanisms: an ordinary-least-squares regression of the
per-rule feedback score on (pattern length, action position, support,
confidence), whose confidence/length coefficients weight the rules; and a
consecutive-negative streak that retires a rule for good once it reaches
the retirement threshold.
"""
from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass, field
from datetime import datetime
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np
from scipy import stats
from sklearn.base import BaseEstimator

from .errors import InsufficientDataError, RuleExtractionError, ValidationError
from .events import SymbolTable
from .validation import check_symbol_sequence
from .wsdd import Pattern

logger = logging.getLogger(__name__)

VOTE_USEFUL = "useful"
VOTE_NOT_USEFUL = "not_useful"
VOTES = (VOTE_USEFUL, VOTE_NOT_USEFUL)

DEFAULT_RETIREMENT_THRESHOLD = 10
#: Calibrated on the bundled phase-1-shaped rule fixture so that 19 of
#: 54 rules fall below it (see tests/test_rules.py).
DEFAULT_USEFULNESS_THRESHOLD = 3.0362
REGRESSION_FEATURES = ("pattern_length", "action_position", "support", "confidence")
SIGNIFICANCE_LEVEL = 0.05


@dataclass(frozen=True)
class ActionCatalog:
    """Energy-lowering actions: scene ids per device group, from config."""

    scenes_by_group: Mapping[str, frozenset[int]]
    user_sources: frozenset[int] | None = None

    @classmethod
    def from_mapping(cls, data: Mapping) -> "ActionCatalog":
        actions = data.get("actions", data)
        scenes = {
            str(group): frozenset(int(s) for s in scene_ids)
            for group, scene_ids in actions.items()
            if group != "user_sources"
        }
        sources = data.get("user_sources")
        return cls(
            scenes_by_group=scenes,
            user_sources=frozenset(int(s) for s in sources) if sources else None,
        )

    @classmethod
    def from_file(cls, path: str) -> "ActionCatalog":
        with open(path, "rb") as fh:
            raw = fh.read()
        text = raw.decode("utf-8")
        if text.lstrip().startswith("{"):
            data = json.loads(text)
        else:
            try:
                import tomllib
            except ModuleNotFoundError:
                import tomli as tomllib
            data = tomllib.loads(text)
        return cls.from_mapping(data)

    def bind(self, table: SymbolTable) -> Callable[[str], bool]:
        """Total predicate over the symbol alphabet (unknown symbols are not actions)."""

        def is_action(symbol: str) -> bool:
            info = table.lookup(symbol)
            if info is None:
                return False
            return info.scene_id in self.scenes_by_group.get(info.group, ())

        return is_action


def _as_predicate(is_action) -> Callable[[str], bool]:
    if callable(is_action):
        return is_action
    actions = frozenset(is_action)
    return lambda sym: sym in actions


@dataclass
class AssociationRule:
    """X -> Y with support/confidence, weight and feedback state."""

    id: str
    home_id: str
    antecedent: tuple[str, ...]
    consequent: str
    support_count: int
    confidence: float
    pattern_length: int
    action_position: int
    weight: float
    active: bool = True
    negative_streak: int = 0
    feedback_log: list[str] = field(default_factory=list)
    retired_reason: str | None = None
    retired_at: datetime | None = None

    def mean_feedback_score(self) -> float:
        """Signed mean of votes: +1 useful, -1 not useful."""
        if not self.feedback_log:
            return 0.0
        signed = [1.0 if v == VOTE_USEFUL else -1.0 for v in self.feedback_log]
        return sum(signed) / len(signed)

    def to_record(self) -> dict:
        return {
            "id": self.id,
            "home": self.home_id,
            "antecedent": list(self.antecedent),
            "consequent": self.consequent,
            "support_count": self.support_count,
            "confidence": self.confidence,
            "pattern_length": self.pattern_length,
            "action_position": self.action_position,
            "weight": self.weight,
            "active": self.active,
            "negative_streak": self.negative_streak,
            "feedback_log": list(self.feedback_log),
            "retired_reason": self.retired_reason,
        }

    @classmethod
    def from_record(cls, rec: dict) -> "AssociationRule":
        return cls(
            id=rec["id"],
            home_id=rec.get("home", ""),
            antecedent=tuple(rec["antecedent"]),
            consequent=rec["consequent"],
            support_count=int(rec["support_count"]),
            confidence=float(rec["confidence"]),
            pattern_length=int(rec["pattern_length"]),
            action_position=int(rec["action_position"]),
            weight=float(rec["weight"]),
            active=bool(rec.get("active", True)),
            negative_streak=int(rec.get("negative_streak", 0)),
            feedback_log=list(rec.get("feedback_log", [])),
            retired_reason=rec.get("retired_reason"),
        )


def rule_id(antecedent: Sequence[str], consequent: str, home_id: str = "") -> str:
    digest = hashlib.sha1(
        "\x1f".join((home_id, *antecedent, "\x1e", consequent)).encode("utf-8")
    ).hexdigest()
    return f"r{digest[:10]}"


def filter_relevant(patterns: Iterable[Pattern], is_action) -> list[Pattern]:
    """Keep patterns with an action preceded by at least one normal event.

    Wildcarded patterns are excluded outright: only non-wildcarded patterns
    feed the recommender.
    """
    predicate = _as_predicate(is_action)
    kept = []
    for pattern in patterns:
        if pattern.is_wildcarded:
            continue
        flags = [predicate(sym) for sym in pattern.symbols]
        if not any(flags):
            continue
        first_action = flags.index(True)
        if first_action == 0:
            continue  # rule form X -> Y needs a nonempty antecedent
        kept.append(pattern)
    return kept


def count_occurrences(sequence: Sequence[str], pattern: Sequence[str]) -> int:
    """Distinct contiguous start positions of ``pattern`` in ``sequence``."""
    pat = tuple(pattern)
    length = len(pat)
    if length == 0:
        return 0
    seq = tuple(sequence)
    return sum(1 for i in range(len(seq) - length + 1) if seq[i:i + length] == pat)


def extract_rule(
    pattern: Pattern,
    is_action,
    sequence: Sequence[str],
    home_id: str = "",
    action_last_only: bool = False,
) -> AssociationRule:
    """Split a relevant pattern into X -> Y at its first action symbol.

    Symbols after Y are discarded; the action's 1-based position in the
    source pattern is kept as a rule feature.  With ``action_last_only`` a
    pattern whose first action is not the final symbol is rejected instead.
    """
    predicate = _as_predicate(is_action)
    symbols = pattern.symbols
    if pattern.is_wildcarded:
        raise RuleExtractionError("wildcarded patterns cannot become rules")
    flags = [predicate(sym) for sym in symbols]
    if not any(flags) or flags.index(True) == 0:
        raise RuleExtractionError(f"pattern {symbols} has no valid antecedent/action split")
    first_action = flags.index(True)
    if action_last_only and first_action != len(symbols) - 1:
        raise RuleExtractionError(f"pattern {symbols} is not action-final")
    antecedent = symbols[:first_action]
    consequent = symbols[first_action]

    seq = check_symbol_sequence(sequence)
    count_x = count_occurrences(seq, antecedent)
    count_xy = count_occurrences(seq, antecedent + (consequent,))
    if count_x == 0:
        raise RuleExtractionError("antecedent never occurs in the mined sequence")
    confidence = count_xy / count_x
    pattern_length = len(antecedent) + 1
    return AssociationRule(
        id=rule_id(antecedent, consequent, home_id),
        home_id=home_id,
        antecedent=antecedent,
        consequent=consequent,
        support_count=count_xy,
        confidence=confidence,
        pattern_length=pattern_length,
        action_position=first_action + 1,
        weight=confidence * pattern_length,  # pre-feedback default
    )


def extract_rules(
    patterns: Iterable[Pattern],
    is_action,
    sequence: Sequence[str],
    home_id: str = "",
    action_last_only: bool = False,
) -> list[AssociationRule]:
    """Filter + extract, de-duplicating rules that share (X, Y)."""
    out: dict[str, AssociationRule] = {}
    for pattern in filter_relevant(patterns, is_action):
        try:
            rule = extract_rule(pattern, is_action, sequence, home_id, action_last_only)
        except RuleExtractionError:
            continue
        out.setdefault(rule.id, rule)
    return list(out.values())


# ---------------------------------------------------------------------------
# Feedback regression
# ---------------------------------------------------------------------------

class FeedbackRegression(BaseEstimator):
    """OLS of per-rule feedback score on the four rule features.

    Collinear columns are dropped (and reported in ``dropped_``) rather than
    letting the normal equations blow up.  ``significant_`` flags the
    features whose two-sided t-test clears the 5% level.
    """

    def __init__(self, feature_names: tuple[str, ...] = REGRESSION_FEATURES):
        self.feature_names = feature_names

    def fit(self, X, y):
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=float)
        if X.ndim != 2 or X.shape[1] != len(self.feature_names):
            raise ValidationError(
                f"X must be (n_rules, {len(self.feature_names)}), got {X.shape}"
            )
        n = X.shape[0]
        if n < len(self.feature_names) + 1:
            raise InsufficientDataError(
                f"need at least {len(self.feature_names) + 1} rules with feedback, got {n}"
            )

        ones = np.ones((n, 1))
        kept: list[int] = []
        design = ones
        for col in range(X.shape[1]):
            candidate = np.hstack([design, X[:, col:col + 1]])
            if np.linalg.matrix_rank(candidate) > np.linalg.matrix_rank(design):
                kept.append(col)
                design = candidate
        dropped = [self.feature_names[i] for i in range(X.shape[1]) if i not in kept]
        if not kept:
            raise InsufficientDataError(
                "design matrix is rank deficient: no feature varies across rules"
            )
        if dropped:
            logger.warning("dropping collinear regression columns: %s", dropped)

        beta, *_ = np.linalg.lstsq(design, y, rcond=None)
        fitted = design @ beta
        residuals = y - fitted
        rss = float(residuals @ residuals)
        tss = float(((y - y.mean()) @ (y - y.mean())) or 0.0)
        dof = n - design.shape[1]

        coef = np.zeros(X.shape[1])
        tvals = np.full(X.shape[1], np.nan)
        pvals = np.full(X.shape[1], np.nan)
        if dof > 0:
            sigma2 = rss / dof
            cov = sigma2 * np.linalg.pinv(design.T @ design)
            se = np.sqrt(np.diag(cov))
        else:
            se = np.full(design.shape[1], np.nan)
        for pos, col in enumerate(kept, start=1):
            coef[col] = beta[pos]
            if dof > 0 and se[pos] > 0:
                tvals[col] = beta[pos] / se[pos]
                pvals[col] = 2.0 * stats.t.sf(abs(tvals[col]), dof)

        self.intercept_ = float(beta[0])
        self.coef_ = coef
        self.t_stats_ = tvals
        self.p_values_ = pvals
        self.r_squared_ = 1.0 - rss / tss if tss > 0 else 1.0
        self.dropped_ = dropped
        self.significant_ = {
            name: bool(p < SIGNIFICANCE_LEVEL) if np.isfinite(p) else False
            for name, p in zip(self.feature_names, pvals)
        }
        self.n_samples_ = n
        return self

    def predict(self, X):
        X = np.asarray(X, dtype=float)
        return self.intercept_ + X @ self.coef_

    def coefficient(self, name: str) -> float:
        return float(self.coef_[self.feature_names.index(name)])


def rule_features(rule: AssociationRule) -> list[float]:
    return [
        float(rule.pattern_length),
        float(rule.action_position),
        float(rule.support_count),
        float(rule.confidence),
    ]


def fit_feedback_regression(
    rules: Sequence[AssociationRule],
    scores: Sequence[float] | None = None,
    min_rules: int = 5,
) -> FeedbackRegression:
    """Fit the usefulness regression over rules that received feedback.

    ``scores`` defaults to each rule's signed mean feedback; passing scores
    explicitly supports calibration datasets where the target is synthetic.
    """
    if scores is None:
        rated = [r for r in rules if r.feedback_log]
        scores = [r.mean_feedback_score() for r in rated]
        rules = rated
    if len(rules) != len(scores):
        raise ValidationError("rules and scores must be parallel")
    if len(rules) < min_rules:
        raise InsufficientDataError(
            f"need >= {min_rules} rules with feedback, got {len(rules)}"
        )
    X = np.array([rule_features(r) for r in rules], dtype=float)
    return FeedbackRegression().fit(X, np.asarray(scores, dtype=float))


def usefulness_coefficient(rule: AssociationRule, model: FeedbackRegression | None) -> float:
    """confidence and pattern length, each scaled by its fitted estimate."""
    if model is None:
        beta_confidence, beta_length = 1.0, 1.0
    else:
        beta_confidence = model.coefficient("confidence")
        beta_length = model.coefficient("pattern_length")
    return beta_confidence * rule.confidence + beta_length * rule.pattern_length


def apply_usefulness_threshold(
    rules: Iterable[AssociationRule],
    model: FeedbackRegression | None,
    threshold: float = DEFAULT_USEFULNESS_THRESHOLD,
) -> list[AssociationRule]:
    """Deactivate rules whose usefulness coefficient falls below the threshold.

    Returns the excluded rules.  Weights of surviving rules are refreshed to
    the coefficient so prioritization uses the same scale.
    """
    excluded = []
    for rule in rules:
        coefficient = usefulness_coefficient(rule, model)
        rule.weight = coefficient
        if coefficient < threshold and rule.active:
            rule.active = False
            rule.retired_reason = "usefulness_threshold"
            excluded.append(rule)
    return excluded


def apply_feedback(
    rule: AssociationRule,
    vote: str,
    at: datetime | None = None,
    retirement_threshold: int = DEFAULT_RETIREMENT_THRESHOLD,
) -> AssociationRule:
    """Record one vote; consecutive negatives retire the rule permanently."""
    if vote not in VOTES:
        raise ValidationError(f"vote must be one of {VOTES}, got {vote!r}")
    rule.feedback_log.append(vote)
    if vote == VOTE_USEFUL:
        rule.negative_streak = 0
    else:
        rule.negative_streak += 1
        if rule.negative_streak >= retirement_threshold and rule.active:
            rule.active = False
            rule.retired_reason = "negative_streak"
            rule.retired_at = at
    return rule


def reset_rule(rule: AssociationRule) -> AssociationRule:
    """Administrative reset: the only path back from retirement."""
    rule.active = True
    rule.negative_streak = 0
    rule.retired_reason = None
    rule.retired_at = None
    return rule


def write_rules_jsonl(rules: Iterable[AssociationRule]) -> bytes:
    lines = [json.dumps(r.to_record(), separators=(",", ":")) for r in rules]
    return ("\n".join(lines) + ("\n" if lines else "")).encode("utf-8")


def read_rules_jsonl(data: bytes | str) -> list[AssociationRule]:
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    return [
        AssociationRule.from_record(json.loads(line))
        for line in text.splitlines() if line.strip()
    ]
