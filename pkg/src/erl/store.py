"""File-based session store: one directory per use case, append-only logs.

Layout::

    <root>/<use_case_id>/manifest.json
    <root>/<use_case_id>/sessions/<session_id>.ndjson

A stored session is its event log, one canonical-JSON event per line.
Writes go through a temp-file-then-rename protocol so a crash leaves
either the full session or none. Event logs are append-only: re-saving a
session is accepted only when the new log extends the stored one (the
stored prefix is never rewritten). Scores surfaced from the store are
always recomputed from the raw answer log, never trusted from a cache.

Concurrency: a single writer per use case (advisory lock file), unlimited
readers; readers only ever see fully committed sessions.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from decimal import Decimal
from pathlib import Path

from filelock import FileLock

from .catalog import Catalog
from .errors import CatalogMismatch, StorageFailure, UnknownSession, UnknownUseCase, UseCaseMismatch
from .points import ZERO, format_points
from .scoring import ScoreReport, ScoringConfig, score_session
from .serialize import canonical_json
from .traversal import AnswerValue, Session, parse_event_line, replay_events


@dataclass(frozen=True)
class UseCaseRecord:
    use_case_id: str
    title: str
    catalog_ref: dict
    selected_blocks: tuple[str, ...]
    config: ScoringConfig
    sessions: tuple[dict, ...]  # {"session_id", "session_date"} ordered by date

    def to_json_dict(self) -> dict:
        return {
            "use_case_id": self.use_case_id,
            "title": self.title,
            "catalog_ref": self.catalog_ref,
            "selected_blocks": list(self.selected_blocks),
            "config": self.config.to_json_dict(),
            "sessions": list(self.sessions),
        }


@dataclass(frozen=True)
class TimelinePoint:
    session_id: str
    session_date: str
    global_score: Decimal
    erl_level: int
    block_scores: tuple

    def to_json_dict(self) -> dict:
        return {
            "session_id": self.session_id,
            "session_date": self.session_date,
            "global_score": format_points(self.global_score),
            "erl_level": self.erl_level,
            "block_scores": [b.to_json_dict() for b in self.block_scores],
        }


@dataclass(frozen=True)
class Timeline:
    use_case_id: str
    points: tuple[TimelinePoint, ...]

    def to_json_dict(self) -> dict:
        return {
            "use_case_id": self.use_case_id,
            "points": [p.to_json_dict() for p in self.points],
        }

    def to_csv(self) -> str:
        lines = ["session_id,session_date,global_score,erl_level"]
        for p in self.points:
            lines.append(
                f"{p.session_id},{p.session_date},{format_points(p.global_score)},{p.erl_level}"
            )
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class SessionDiff:
    from_id: str
    to_id: str
    answer_changes: tuple[dict, ...]
    contribution_delta_by_indicator: tuple[dict, ...]
    block_deltas: tuple[dict, ...]
    global_delta: Decimal
    erl_change: tuple[int, int]

    def to_json_dict(self) -> dict:
        return {
            "from_id": self.from_id,
            "to_id": self.to_id,
            "answer_changes": list(self.answer_changes),
            "contribution_delta_by_indicator": list(self.contribution_delta_by_indicator),
            "block_deltas": list(self.block_deltas),
            "global_delta": format_points(self.global_delta),
            "erl_change": {"old": self.erl_change[0], "new": self.erl_change[1]},
        }

    def block_deltas_csv(self) -> str:
        lines = ["block_id,old,new,delta"]
        for d in self.block_deltas:
            lines.append(f"{d['block_id']},{d['old']},{d['new']},{d['delta']}")
        return "\n".join(lines) + "\n"


def _atomic_write(path: Path, content: str) -> None:
    """Write-temp-then-rename; the target is never observable half-written."""
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "w", encoding="utf-8") as handle:
        handle.write(content)
        handle.flush()
        os.fsync(handle.fileno())
    os.replace(tmp, path)


class SessionStore:
    """Durable per-use-case session persistence over one catalog."""

    def __init__(self, root: str | Path, catalog: Catalog):
        self.root = Path(root)
        self.catalog = catalog
        self.root.mkdir(parents=True, exist_ok=True)

    # -- paths --

    def _use_case_dir(self, use_case_id: str) -> Path:
        if not use_case_id or any(ch in use_case_id for ch in "/\\"):
            raise UnknownUseCase(f"bad use case id {use_case_id!r}")
        return self.root / use_case_id

    def _session_path(self, use_case_id: str, session_id: str) -> Path:
        return self._use_case_dir(use_case_id) / "sessions" / f"{session_id}.ndjson"

    # -- writing --

    def save_session(
        self,
        use_case_id: str,
        session: Session,
        config: ScoringConfig,
        title: str = "",
    ) -> str:
        """Durably persist a session under its use case; idempotent.

        Re-saving the identical log is a no-op; a log that extends the
        stored one replaces it (append); anything else is a conflict.
        """
        if session.catalog_ref != {
            "catalog_id": self.catalog.catalog_id,
            "version": self.catalog.version,
        }:
            raise CatalogMismatch(
                f"session recorded against {session.catalog_ref}, store holds "
                f"{self.catalog.catalog_id}@{self.catalog.version}"
            )
        use_case_dir = self._use_case_dir(use_case_id)
        use_case_dir.mkdir(parents=True, exist_ok=True)
        (use_case_dir / "sessions").mkdir(exist_ok=True)

        with FileLock(str(use_case_dir / ".lock")):
            manifest = self._read_manifest(use_case_id)
            if manifest is None:
                manifest = {
                    "use_case_id": use_case_id,
                    "title": title or session.metadata.title,
                    "catalog_ref": session.catalog_ref,
                    "selected_blocks": list(session.selected_blocks),
                    "config": config.to_json_dict(),
                    "sessions": [],
                }
            else:
                if manifest["catalog_ref"] != session.catalog_ref:
                    raise CatalogMismatch(
                        f"use case {use_case_id!r} is bound to {manifest['catalog_ref']}"
                    )
                if manifest["selected_blocks"] != list(session.selected_blocks):
                    raise CatalogMismatch(
                        f"use case {use_case_id!r} compares sessions over blocks "
                        f"{manifest['selected_blocks']}, got {list(session.selected_blocks)}"
                    )
                if manifest["config"] != config.to_json_dict():
                    raise CatalogMismatch(
                        f"use case {use_case_id!r} is scored with {manifest['config']}"
                    )

            new_log = "\n".join(session.event_log_lines()) + "\n"
            path = self._session_path(use_case_id, session.session_id)
            existing = path.read_text(encoding="utf-8") if path.exists() else None
            if existing is not None and not new_log.startswith(existing):
                raise StorageFailure(
                    f"session {session.session_id} already stored with a diverging event log"
                )
            if existing != new_log:
                _atomic_write(path, new_log)
            # the manifest entry is refreshed even on identical logs so a crash
            # between the two writes heals on retry

            entries = [e for e in manifest["sessions"] if e["session_id"] != session.session_id]
            entries.append(
                {"session_id": session.session_id, "session_date": session.metadata.session_date}
            )
            entries.sort(key=lambda e: e["session_date"])
            manifest["sessions"] = entries
            _atomic_write(use_case_dir / "manifest.json", canonical_json(manifest) + "\n")
        return session.session_id

    # -- reading --

    def _read_manifest(self, use_case_id: str) -> dict | None:
        path = self._use_case_dir(use_case_id) / "manifest.json"
        if not path.exists():
            return None
        return json.loads(path.read_text(encoding="utf-8"))

    def use_case(self, use_case_id: str) -> UseCaseRecord:
        manifest = self._read_manifest(use_case_id)
        if manifest is None:
            raise UnknownUseCase(use_case_id)
        return UseCaseRecord(
            use_case_id=manifest["use_case_id"],
            title=manifest["title"],
            catalog_ref=manifest["catalog_ref"],
            selected_blocks=tuple(manifest["selected_blocks"]),
            config=ScoringConfig.from_json_dict(manifest["config"]),
            sessions=tuple(manifest["sessions"]),
        )

    def list_use_cases(self) -> list[str]:
        if not self.root.exists():
            return []
        return sorted(
            p.name for p in self.root.iterdir() if (p / "manifest.json").exists()
        )

    def find_session(self, session_id: str) -> str:
        """Use case a session belongs to."""
        for use_case_id in self.list_use_cases():
            record = self.use_case(use_case_id)
            if any(e["session_id"] == session_id for e in record.sessions):
                return use_case_id
        raise UnknownSession(session_id)

    def load_session(self, use_case_id: str, session_id: str) -> Session:
        path = self._session_path(use_case_id, session_id)
        if not path.exists():
            raise UnknownSession(session_id)
        events = [
            parse_event_line(line)
            for line in path.read_text(encoding="utf-8").splitlines()
            if line.strip()
        ]
        return replay_events(self.catalog, events)

    # -- reporting --

    def timeline(self, use_case_id: str) -> Timeline:
        record = self.use_case(use_case_id)
        points = []
        for entry in record.sessions:
            session = self.load_session(use_case_id, entry["session_id"])
            report = score_session(session, record.config)
            points.append(
                TimelinePoint(
                    session_id=session.session_id,
                    session_date=entry["session_date"],
                    global_score=report.global_score,
                    erl_level=report.erl.level,
                    block_scores=report.block_scores,
                )
            )
        return Timeline(use_case_id=use_case_id, points=tuple(points))

    def score_stored_session(self, session_id: str) -> ScoreReport:
        use_case_id = self.find_session(session_id)
        record = self.use_case(use_case_id)
        session = self.load_session(use_case_id, session_id)
        return score_session(session, record.config)

    def diff_sessions(self, from_id: str, to_id: str) -> SessionDiff:
        use_case_from = self.find_session(from_id)
        use_case_to = self.find_session(to_id)
        if use_case_from != use_case_to:
            raise UseCaseMismatch(
                f"{from_id} belongs to {use_case_from!r}, {to_id} to {use_case_to!r}"
            )
        record = self.use_case(use_case_from)
        old = self.load_session(use_case_from, from_id)
        new = self.load_session(use_case_from, to_id)
        return diff_reports(old, new, record.config)


def diff_reports(old: Session, new: Session, config: ScoringConfig) -> SessionDiff:
    """Exhaustive answer-level and score-level deltas between two sessions."""
    old_report = score_session(old, config)
    new_report = score_session(new, config)

    old_answers = old.answer_map
    new_answers = new.answer_map
    block_index = {b: i for i, b in enumerate(old.selected_blocks)}
    all_keys = sorted(
        set(old_answers) | set(new_answers),
        key=lambda key: (block_index.get(key[0], len(block_index)), key[1].segments),
    )

    def value_json(value: AnswerValue | None) -> dict | None:
        if value is None:
            return None
        return {"verdict": value.verdict, "unsure": value.unsure}

    answer_changes = []
    for key in all_keys:
        old_value, new_value = old_answers.get(key), new_answers.get(key)
        if old_value != new_value:
            answer_changes.append(
                {
                    "block_id": key[0],
                    "number": str(key[1]),
                    "old": value_json(old_value),
                    "new": value_json(new_value),
                }
            )

    old_contrib = {(c.block_id, c.indicator.id): c.contribution for c in old_report.contributions}
    new_contrib = {(c.block_id, c.indicator.id): c.contribution for c in new_report.contributions}
    contribution_deltas = []
    for key in all_keys:
        delta = new_contrib.get(key, ZERO) - old_contrib.get(key, ZERO)
        if delta != 0:
            contribution_deltas.append(
                {"block_id": key[0], "number": str(key[1]), "delta": format_points(delta)}
            )

    old_blocks = {b.block_id: b for b in old_report.block_scores}
    new_blocks = {b.block_id: b for b in new_report.block_scores}
    block_deltas = []
    for block_id in dict.fromkeys([*old_blocks, *new_blocks]):
        old_norm = old_blocks[block_id].normalized if block_id in old_blocks else ZERO
        new_norm = new_blocks[block_id].normalized if block_id in new_blocks else ZERO
        block_deltas.append(
            {
                "block_id": block_id,
                "old": format_points(old_norm),
                "new": format_points(new_norm),
                "delta": format_points(new_norm - old_norm),
            }
        )

    return SessionDiff(
        from_id=old.session_id,
        to_id=new.session_id,
        answer_changes=tuple(answer_changes),
        contribution_delta_by_indicator=tuple(contribution_deltas),
        block_deltas=tuple(block_deltas),
        global_delta=new_report.global_score - old_report.global_score,
        erl_change=(old_report.erl.level, new_report.erl.level),
    )
