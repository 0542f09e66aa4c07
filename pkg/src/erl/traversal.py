"""Adaptive questionnaire sessions.

A session walks the selected blocks' indicator trees one question at a
time. Gating rule: an indicator is presented only when every ancestor was
answered "yes"; a "no" prunes the whole subtree. Blocks are traversed
sequentially in selection order, indicators in their document order.

Sessions are event-sourced: every state change appends an immutable event
(``start`` / ``answer`` / ``revise`` / ``complete``), and replaying the
event log reproduces a bit-identical session. One session is a single
logical actor; answers are applied strictly sequentially.
"""

from __future__ import annotations

import uuid
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Mapping

from .catalog import Catalog, IndicatorId
from .errors import (
    EmptySelection,
    NeverAnswered,
    OutOfOrderAnswer,
    SessionComplete,
    UnknownBlock,
    UnknownIndicator,
)
from .serialize import canonical_json, today, utc_now

MAX_COMMENT_LENGTH = 4000

#: An answered indicator is addressed by (block_id, indicator id).
AnswerKey = tuple[str, IndicatorId]


@dataclass(frozen=True)
class AnswerValue:
    """A yes/no verdict; "unsure" is recorded as "no" with a follow-up flag."""

    verdict: str  # "yes" | "no"
    unsure: bool = False

    def __post_init__(self) -> None:
        if self.verdict not in ("yes", "no"):
            raise ValueError(f"verdict must be yes or no, got {self.verdict!r}")
        if self.unsure and self.verdict != "no":
            raise ValueError("unsure is only valid with a 'no' verdict")

    @property
    def is_yes(self) -> bool:
        return self.verdict == "yes"


@dataclass
class AnswerRecord:
    block_id: str
    indicator: IndicatorId
    value: AnswerValue
    comment: str | None
    answered_at: str

    @property
    def key(self) -> AnswerKey:
        return (self.block_id, self.indicator)

    def to_json_dict(self) -> dict:
        return {
            "block_id": self.block_id,
            "number": str(self.indicator),
            "verdict": self.value.verdict,
            "unsure": self.value.unsure,
            "comment": self.comment,
            "answered_at": self.answered_at,
        }


@dataclass(frozen=True)
class SessionMetadata:
    use_case_id: str
    title: str = ""
    participants: tuple[str, ...] = ()
    trl: str | None = None
    session_date: str = ""
    recommended_followup_months: int | None = 6
    notes: str = ""

    def __post_init__(self) -> None:
        if not self.use_case_id:
            raise ValueError("use_case_id must be non-empty")

    def to_json_dict(self) -> dict:
        return {
            "use_case_id": self.use_case_id,
            "title": self.title,
            "participants": list(self.participants),
            "trl": self.trl,
            "session_date": self.session_date,
            "recommended_followup_months": self.recommended_followup_months,
            "notes": self.notes,
        }

    @classmethod
    def from_json_dict(cls, data: Mapping) -> SessionMetadata:
        return cls(
            use_case_id=data["use_case_id"],
            title=data.get("title", ""),
            participants=tuple(data.get("participants", ())),
            trl=data.get("trl"),
            session_date=data.get("session_date", ""),
            recommended_followup_months=data.get("recommended_followup_months", 6),
            notes=data.get("notes", ""),
        )


@dataclass(frozen=True)
class Event:
    seq: int
    ts: str
    kind: str  # "start" | "answer" | "revise" | "complete"
    payload: dict

    def to_json_dict(self) -> dict:
        return {"seq": self.seq, "ts": self.ts, "kind": self.kind, "payload": self.payload}


@dataclass
class Session:
    """One evaluation run over a fixed block selection of one catalog."""

    session_id: str
    catalog: Catalog
    selected_blocks: tuple[str, ...]
    metadata: SessionMetadata
    answers: list[AnswerRecord] = field(default_factory=list)
    events: list[Event] = field(default_factory=list)

    @property
    def catalog_ref(self) -> dict:
        return {"catalog_id": self.catalog.catalog_id, "version": self.catalog.version}

    @property
    def seq(self) -> int:
        return self.events[-1].seq if self.events else 0

    @property
    def answer_map(self) -> dict[AnswerKey, AnswerValue]:
        return {record.key: record.value for record in self.answers}

    @property
    def state(self) -> str:
        return "complete" if current_question(self) is None else "in_progress"

    def record_for(self, key: AnswerKey) -> AnswerRecord | None:
        for record in self.answers:
            if record.key == key:
                return record
        return None

    def to_json_dict(self) -> dict:
        return {
            "session_id": self.session_id,
            "catalog_ref": self.catalog_ref,
            "selected_blocks": list(self.selected_blocks),
            "metadata": self.metadata.to_json_dict(),
            "state": self.state,
            "seq": self.seq,
            "answers": [record.to_json_dict() for record in self.answers],
        }

    def to_canonical_json(self) -> str:
        return canonical_json(self.to_json_dict())

    def event_log_lines(self) -> list[str]:
        return [canonical_json(e.to_json_dict()) for e in self.events]


# --- gating ---------------------------------------------------------------------


def next_question(
    catalog: Catalog,
    selected_blocks: Iterable[str],
    answered: Mapping[AnswerKey, AnswerValue],
) -> AnswerKey | None:
    """The least unanswered indicator whose ancestors are all answered "yes".

    Pure function of (catalog, selection, answer map); the whole presented
    sequence of a session derives from repeated application.
    """
    for block_id in selected_blocks:
        block = catalog.block(block_id)
        for ind_id in block.ordered_ids:
            if (block_id, ind_id) in answered:
                continue
            if _gate_open(block_id, ind_id, answered):
                return (block_id, ind_id)
    return None


def _gate_open(block_id: str, ind_id: IndicatorId, answered: Mapping[AnswerKey, AnswerValue]) -> bool:
    parent = ind_id.parent
    while parent is not None:
        value = answered.get((block_id, parent))
        if value is None or not value.is_yes:
            return False
        parent = parent.parent
    return True


def reachable_upper_bound(session: Session) -> int:
    """How many unanswered indicators could still be asked (no pruned ancestor)."""
    answered = session.answer_map
    count = 0
    for block_id in session.selected_blocks:
        block = session.catalog.block(block_id)
        for ind_id in block.ordered_ids:
            if (block_id, ind_id) in answered:
                continue
            if not _any_ancestor_no(block_id, ind_id, answered):
                count += 1
    return count


def _any_ancestor_no(
    block_id: str, ind_id: IndicatorId, answered: Mapping[AnswerKey, AnswerValue]
) -> bool:
    parent = ind_id.parent
    while parent is not None:
        value = answered.get((block_id, parent))
        if value is not None and not value.is_yes:
            return True
        parent = parent.parent
    return False


# --- operations -------------------------------------------------------------------


def start_session(
    catalog: Catalog,
    selected_blocks: Iterable[str],
    metadata: SessionMetadata,
    session_id: str | None = None,
    clock: Callable[[], str] | None = None,
) -> Session:
    selected = tuple(selected_blocks)
    if not selected:
        raise EmptySelection("select at least one block")
    known = set(catalog.block_ids)
    for block_id in selected:
        if block_id not in known:
            raise UnknownBlock(block_id)
    if len(set(selected)) != len(selected):
        raise UnknownBlock(f"duplicate block in selection: {selected}")
    if not metadata.session_date:
        metadata = replace(metadata, session_date=today())

    session = Session(
        session_id=session_id or uuid.uuid4().hex,
        catalog=catalog,
        selected_blocks=selected,
        metadata=metadata,
    )
    session.events.append(
        Event(
            seq=1,
            ts=(clock or utc_now)(),
            kind="start",
            payload={
                "session_id": session.session_id,
                "catalog_ref": session.catalog_ref,
                "selected_blocks": list(selected),
                "metadata": metadata.to_json_dict(),
            },
        )
    )
    return session


def current_question(session: Session) -> AnswerKey | None:
    """Next question, or None once the questionnaire is over."""
    return next_question(session.catalog, session.selected_blocks, session.answer_map)


def submit_answer(
    session: Session,
    key: AnswerKey,
    value: AnswerValue,
    comment: str | None = None,
    clock: Callable[[], str] | None = None,
) -> Session:
    current = current_question(session)
    if current is None:
        raise SessionComplete(session.session_id)
    if key != current:
        raise OutOfOrderAnswer(
            f"submitted {key[0]}:{key[1]}, current question is {current[0]}:{current[1]}"
        )
    _check_comment(comment)

    ts = (clock or utc_now)()
    session.answers.append(AnswerRecord(key[0], key[1], value, comment, ts))
    session.events.append(
        Event(
            seq=session.seq + 1,
            ts=ts,
            kind="answer",
            payload={
                "block_id": key[0],
                "number": str(key[1]),
                "verdict": value.verdict,
                "unsure": value.unsure,
                "comment": comment,
            },
        )
    )
    _mark_complete_if_done(session, ts)
    return session


def revise_answer(
    session: Session,
    key: AnswerKey,
    new_value: AnswerValue,
    comment: str | None = None,
    clock: Callable[[], str] | None = None,
) -> Session:
    """Replace an earlier answer.

    Flipping yes -> no removes the (now unreachable) descendant answers and
    records their removal in the event log; no -> yes re-opens the subtree
    for traversal. State is recomputed either way.
    """
    block_id, ind_id = key
    if block_id not in session.selected_blocks or ind_id not in session.catalog.block(block_id).indicators:
        raise UnknownIndicator(f"{block_id}:{ind_id}")
    record = session.record_for(key)
    if record is None:
        raise NeverAnswered(f"{block_id}:{ind_id}")
    _check_comment(comment)

    ts = (clock or utc_now)()
    removed: list[AnswerKey] = []
    if record.value.is_yes and not new_value.is_yes:
        removed = [
            r.key
            for r in session.answers
            if r.block_id == block_id and ind_id.is_ancestor_of(r.indicator)
        ]
        session.answers = [r for r in session.answers if r.key not in set(removed)]
    record.value = new_value
    record.comment = comment
    record.answered_at = ts

    session.events.append(
        Event(
            seq=session.seq + 1,
            ts=ts,
            kind="revise",
            payload={
                "block_id": block_id,
                "number": str(ind_id),
                "verdict": new_value.verdict,
                "unsure": new_value.unsure,
                "comment": comment,
                "removed": [{"block_id": b, "number": str(i)} for b, i in removed],
            },
        )
    )
    _mark_complete_if_done(session, ts)
    return session


def asked_set(session: Session) -> set[AnswerKey]:
    """Exactly the indicators answered so far."""
    return {record.key for record in session.answers}


def _mark_complete_if_done(session: Session, ts: str) -> None:
    if current_question(session) is None:
        session.events.append(Event(seq=session.seq + 1, ts=ts, kind="complete", payload={}))


def _check_comment(comment: str | None) -> None:
    if comment is not None and len(comment) > MAX_COMMENT_LENGTH:
        raise ValueError(f"comment exceeds {MAX_COMMENT_LENGTH} characters")


# --- replay --------------------------------------------------------------------


def replay_events(catalog: Catalog, events: Iterable[Event]) -> Session:
    """Rebuild a session from its event log.

    The rebuilt session is bit-identical (canonical JSON) to the live one:
    timestamps come from the events, never from the wall clock.
    """
    session: Session | None = None
    for event in events:
        if event.kind == "start":
            payload = event.payload
            ref = payload["catalog_ref"]
            if ref["catalog_id"] != catalog.catalog_id or ref["version"] != catalog.version:
                raise ValueError(
                    f"event log needs catalog {ref['catalog_id']}@{ref['version']}, "
                    f"got {catalog.catalog_id}@{catalog.version}"
                )
            session = start_session(
                catalog,
                payload["selected_blocks"],
                SessionMetadata.from_json_dict(payload["metadata"]),
                session_id=payload["session_id"],
                clock=lambda: event.ts,
            )
        elif session is None:
            raise ValueError(f"event log does not begin with a start event: {event.kind}")
        elif event.kind == "answer":
            payload = event.payload
            submit_answer(
                session,
                (payload["block_id"], IndicatorId.parse(payload["number"])),
                AnswerValue(payload["verdict"], payload["unsure"]),
                payload.get("comment"),
                clock=lambda: event.ts,
            )
        elif event.kind == "revise":
            payload = event.payload
            revise_answer(
                session,
                (payload["block_id"], IndicatorId.parse(payload["number"])),
                AnswerValue(payload["verdict"], payload["unsure"]),
                payload.get("comment"),
                clock=lambda: event.ts,
            )
        elif event.kind == "complete":
            pass  # informational marker; completion is derived from answers
        else:
            raise ValueError(f"unknown event kind {event.kind!r}")
    if session is None:
        raise ValueError("empty event log")
    return session


def parse_event_line(line: str) -> Event:
    import json

    data = json.loads(line)
    return Event(seq=data["seq"], ts=data["ts"], kind=data["kind"], payload=data["payload"])
