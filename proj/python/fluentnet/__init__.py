"""Temporal fluent-statement activity recognition."""

from ._core import (
    ActivityRates,
    Model,
    RecognitionRecord,
    ReplayOutcome,
    Statement,
    StatementStore,
    builtin_asset,
    evaluate_model,
    parse_duration,
    parse_model,
    print_model,
    replay_runs,
)

__all__ = [
    "ActivityRates",
    "Model",
    "RecognitionRecord",
    "ReplayOutcome",
    "Statement",
    "StatementStore",
    "builtin_asset",
    "evaluate_model",
    "parse_duration",
    "parse_model",
    "print_model",
    "replay_runs",
]
