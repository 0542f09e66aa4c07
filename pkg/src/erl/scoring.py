"""Session scoring and readiness-level classification.

Two modes:

* ``global_sum``: one 4.000 baseline for the whole session plus the sum of
  every answer contribution, left unclamped (negative totals are legal and
  classify as level 0).
* ``block_min``: each block gets its own baseline, its raw sum is clamped
  to the 0..4 scale, and the global score is the *lowest* block score, so
  one strong area can never mask weakness elsewhere.

All operations are pure functions of (session, config) and exact: the
global score always equals baseline plus the sum of the reported
per-indicator contributions, to the last decimal.
"""

from __future__ import annotations

from dataclasses import dataclass
from decimal import ROUND_CEILING, ROUND_FLOOR, Decimal

from .catalog import Indicator
from .points import ZERO, clamp, format_points, points
from .traversal import AnswerKey, AnswerValue, Session

LEVEL_LABELS = {
    0: "Ethics considerations lacking",
    1: "Identified Ethics Issues",
    2: "Characterised Interactions of Ethics issues",
    3: "Ethical Tensions Addressed via Ethics by Design",
    4: "Control Over Ethics Issues",
}

MODES = ("global_sum", "block_min")
ERL_MAPPINGS = ("ceil_clamp", "floor_clamp")


@dataclass(frozen=True)
class ScoringConfig:
    baseline: Decimal = points("4.000")
    mode: str = "global_sum"
    block_floor: Decimal = ZERO
    block_ceiling: Decimal = points("4.000")
    erl_mapping: str = "ceil_clamp"

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.erl_mapping not in ERL_MAPPINGS:
            raise ValueError(f"erl_mapping must be one of {ERL_MAPPINGS}")
        if self.block_floor >= self.block_ceiling:
            raise ValueError("block_floor must be below block_ceiling")

    def to_json_dict(self) -> dict:
        return {
            "baseline": format_points(self.baseline),
            "mode": self.mode,
            "block_floor": format_points(self.block_floor),
            "block_ceiling": format_points(self.block_ceiling),
            "erl_mapping": self.erl_mapping,
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> ScoringConfig:
        return cls(
            baseline=points(data.get("baseline", "4.000")),
            mode=data.get("mode", "global_sum"),
            block_floor=points(data.get("block_floor", "0.000")),
            block_ceiling=points(data.get("block_ceiling", "4.000")),
            erl_mapping=data.get("erl_mapping", "ceil_clamp"),
        )


@dataclass(frozen=True)
class ErlLevel:
    level: int
    label: str

    def to_json_dict(self) -> dict:
        return {"level": self.level, "label": self.label}


@dataclass(frozen=True)
class BlockScore:
    block_id: str
    raw_sum: Decimal
    normalized: Decimal

    def to_json_dict(self) -> dict:
        return {
            "block_id": self.block_id,
            "raw_sum": format_points(self.raw_sum),
            "normalized": format_points(self.normalized),
        }


@dataclass(frozen=True)
class Contribution:
    block_id: str
    indicator: Indicator
    value: AnswerValue
    contribution: Decimal

    def to_json_dict(self) -> dict:
        return {
            "block_id": self.block_id,
            "number": str(self.indicator.id),
            "verdict": self.value.verdict,
            "contribution": format_points(self.contribution),
        }


@dataclass(frozen=True)
class ScoreReport:
    session_id: str
    contributions: tuple[Contribution, ...]
    block_scores: tuple[BlockScore, ...]
    global_score: Decimal
    erl: ErlLevel
    unsure_followups: tuple[AnswerKey, ...]

    def to_json_dict(self) -> dict:
        return {
            "session_id": self.session_id,
            "contributions": [c.to_json_dict() for c in self.contributions],
            "block_scores": [b.to_json_dict() for b in self.block_scores],
            "global_score": format_points(self.global_score),
            "erl": self.erl.to_json_dict(),
            "unsure_followups": [
                {"block_id": b, "number": str(i)} for b, i in self.unsure_followups
            ],
        }

    def contributions_csv(self) -> str:
        lines = ["indicator,verdict,contribution"]
        for c in self.contributions:
            lines.append(
                f"{c.block_id}:{c.indicator.id},{c.value.verdict},{format_points(c.contribution)}"
            )
        return "\n".join(lines) + "\n"

    def block_scores_csv(self) -> str:
        lines = ["block_id,raw_sum,normalized"]
        for b in self.block_scores:
            lines.append(f"{b.block_id},{format_points(b.raw_sum)},{format_points(b.normalized)}")
        return "\n".join(lines) + "\n"


def answer_contribution(indicator: Indicator, value: AnswerValue) -> Decimal:
    """The answer's score weight; the unsure flag never changes the number."""
    return indicator.yes_score if value.is_yes else indicator.no_score


def score_global(session: Session, config: ScoringConfig) -> Decimal:
    """Baseline plus all contributions across selected blocks, unclamped."""
    total = config.baseline
    for record in session.answers:
        indicator = session.catalog.block(record.block_id).indicators[record.indicator]
        total += answer_contribution(indicator, record.value)
    return total


def score_blocks(session: Session, config: ScoringConfig) -> list[BlockScore]:
    """One BlockScore per selected block, from that block's answers only."""
    sums = {block_id: ZERO for block_id in session.selected_blocks}
    for record in session.answers:
        indicator = session.catalog.block(record.block_id).indicators[record.indicator]
        sums[record.block_id] += answer_contribution(indicator, record.value)
    return [
        BlockScore(
            block_id=block_id,
            raw_sum=raw,
            normalized=clamp(config.baseline + raw, config.block_floor, config.block_ceiling),
        )
        for block_id, raw in sums.items()
    ]


def classify_erl(score: Decimal, config: ScoringConfig) -> ErlLevel:
    """Map a score to a level: ceil_clamp(s) = clamp(ceil(s), 0, 4).

    So a 2.380 lands at level 3 and anything at or below zero at level 0.
    floor_clamp is the alternative mapping (2.380 -> level 2).
    """
    rounding = ROUND_CEILING if config.erl_mapping == "ceil_clamp" else ROUND_FLOOR
    level = int(score.to_integral_value(rounding=rounding))
    level = max(0, min(4, level))
    return ErlLevel(level=level, label=LEVEL_LABELS[level])


def breakdown(session: Session, config: ScoringConfig) -> list[Contribution]:
    """Every asked indicator with its signed contribution, largest impact first."""
    block_index = {b: i for i, b in enumerate(session.selected_blocks)}
    entries = []
    for record in session.answers:
        indicator = session.catalog.block(record.block_id).indicators[record.indicator]
        entries.append(
            Contribution(
                block_id=record.block_id,
                indicator=indicator,
                value=record.value,
                contribution=answer_contribution(indicator, record.value),
            )
        )
    entries.sort(
        key=lambda c: (
            -abs(c.contribution),
            block_index[c.block_id],
            c.indicator.id.segments,
        )
    )
    return entries


def score_session(session: Session, config: ScoringConfig) -> ScoreReport:
    block_scores = score_blocks(session, config)
    if config.mode == "block_min":
        global_score = min(b.normalized for b in block_scores)
    else:
        global_score = score_global(session, config)

    block_index = {b: i for i, b in enumerate(session.selected_blocks)}
    unsure = sorted(
        (record.key for record in session.answers if record.value.unsure),
        key=lambda key: (block_index[key[0]], key[1].segments),
    )
    return ScoreReport(
        session_id=session.session_id,
        contributions=tuple(breakdown(session, config)),
        block_scores=tuple(block_scores),
        global_score=global_score,
        erl=classify_erl(global_score, config),
        unsure_followups=tuple(unsure),
    )
