"""Canonical JSON rendering and timestamps shared across modules."""

from __future__ import annotations

import json
from datetime import datetime, timezone


def canonical_json(obj: object) -> str:
    """Deterministic JSON: sorted keys, compact separators, UTF-8 preserved."""
    return json.dumps(obj, sort_keys=True, ensure_ascii=False, separators=(",", ":"))


def utc_now() -> str:
    """ISO-8601 UTC timestamp with second precision, e.g. 2026-02-01T10:30:00Z."""
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def today() -> str:
    return datetime.now(timezone.utc).strftime("%Y-%m-%d")
