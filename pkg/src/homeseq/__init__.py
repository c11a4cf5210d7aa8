"""Smart-home event sequence mining and energy-saving recommendations."""

from .engine import EmissionPolicy, Recommendation, RecommenderEngine, render_text
from .events import (
    DeviceGroup,
    Event,
    EventLog,
    SymbolPolicy,
    SymbolTable,
    parse_log,
    serialize_log,
    symbolize,
)
from .oracle import BruteForceMiner, PrefixGrowthMiner, brute_force_mine, prefix_growth_mine
from .rules import (
    ActionCatalog,
    AssociationRule,
    FeedbackRegression,
    apply_feedback,
    extract_rule,
    extract_rules,
    filter_relevant,
    fit_feedback_regression,
    usefulness_coefficient,
)
from .service import MetricsSnapshot, compute_metrics, create_app, replay_log
from .store import JournalStore
from .wsdd import (
    MiningParams,
    Pattern,
    PeriodicityInfo,
    WsddMiner,
    mine,
    mine_wildcarded,
    periodicity,
)

__version__ = "0.1.0"

__all__ = [
    "ActionCatalog",
    "AssociationRule",
    "BruteForceMiner",
    "DeviceGroup",
    "EmissionPolicy",
    "Event",
    "EventLog",
    "FeedbackRegression",
    "JournalStore",
    "MetricsSnapshot",
    "MiningParams",
    "Pattern",
    "PeriodicityInfo",
    "PrefixGrowthMiner",
    "Recommendation",
    "RecommenderEngine",
    "SymbolPolicy",
    "SymbolTable",
    "WsddMiner",
    "apply_feedback",
    "brute_force_mine",
    "compute_metrics",
    "create_app",
    "extract_rule",
    "extract_rules",
    "filter_relevant",
    "fit_feedback_regression",
    "mine",
    "mine_wildcarded",
    "parse_log",
    "periodicity",
    "prefix_growth_mine",
    "render_text",
    "replay_log",
    "serialize_log",
    "symbolize",
    "usefulness_coefficient",
]
