"""Ethics Readiness Level evaluation toolkit.

Adaptive block-based questionnaires with weighted yes/no scoring,
readiness-level classification, persistent session logs, longitudinal
comparison, an HTTP API, and a facilitator CLI.
"""

from .catalog import (
    Block,
    Catalog,
    Indicator,
    IndicatorId,
    LintFinding,
    LintReport,
    best_case_subtree,
    children,
    lint_catalog,
    load_catalog,
    parse_catalog,
    serialize_catalog,
)
from .scoring import (
    BlockScore,
    ErlLevel,
    ScoreReport,
    ScoringConfig,
    answer_contribution,
    breakdown,
    classify_erl,
    score_blocks,
    score_global,
    score_session,
)
from .store import SessionDiff, SessionStore, Timeline, UseCaseRecord, diff_reports
from .traversal import (
    AnswerRecord,
    AnswerValue,
    Event,
    Session,
    SessionMetadata,
    asked_set,
    current_question,
    next_question,
    replay_events,
    revise_answer,
    start_session,
    submit_answer,
)

__version__ = "0.1.0"
