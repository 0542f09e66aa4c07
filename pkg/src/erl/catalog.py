"""Indicator catalogs: dot-numbered weighted yes/no questions grouped in blocks.

A catalog is a versioned, ordered list of blocks. Each block is a forest of
indicators whose hierarchy is encoded solely by the dotted number ("2.4.1"
is a child of "2.4"). Catalogs are immutable after parse and safe to share
across concurrent sessions; parsing, serialization, and linting are pure.

File format (one CSV file per block, UTF-8):

    number,indicator,yes_score,no_score,layer

``layer`` is optional and defaults to "other"; scores carry exactly three
decimals with an optional leading minus.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from decimal import Decimal
from pathlib import Path
from typing import Iterable, Iterator

from .errors import ParseError, StructureError, SubtreeTooLarge, UnknownIndicator
from .points import ZERO, format_points, parse_points, points

CSV_HEADER = ["number", "indicator", "yes_score", "no_score", "layer"]
LAYERS = ("relevance", "mitigation", "validation", "other")

#: Hard cap on strict-descendant count for exhaustive best-case enumeration.
ENUMERATION_BOUND = 24

#: Score magnitudes beyond this are flagged by lint.
MAX_SCORE_MAGNITUDE = Decimal("4.000")


@dataclass(frozen=True, order=True)
class IndicatorId:
    """Dotted hierarchical indicator number, e.g. "2.4.1".

    Ordering is lexicographic on the segment tuple, which matches document
    order: 2 < 2.1 < 2.2 < 2.2.1 < 2.3 < 3.
    """

    segments: tuple[int, ...]

    def __post_init__(self) -> None:
        if not self.segments or any(s < 1 for s in self.segments):
            raise ValueError(f"indicator id needs positive segments: {self.segments}")

    @classmethod
    def parse(cls, text: str) -> IndicatorId:
        # A trailing dot ("2.2.") is tolerated as typography and normalized away.
        normalized = text.strip().rstrip(".")
        parts = normalized.split(".")
        if not normalized or not all(p.isdigit() and int(p) >= 1 for p in parts):
            raise ValueError(f"malformed indicator number: {text!r}")
        return cls(tuple(int(p) for p in parts))

    @property
    def depth(self) -> int:
        return len(self.segments)

    @property
    def parent(self) -> IndicatorId | None:
        if len(self.segments) == 1:
            return None
        return IndicatorId(self.segments[:-1])

    def is_ancestor_of(self, other: IndicatorId) -> bool:
        return (
            len(self.segments) < len(other.segments)
            and other.segments[: len(self.segments)] == self.segments
        )

    def __str__(self) -> str:
        return ".".join(str(s) for s in self.segments)


@dataclass(frozen=True)
class Indicator:
    """One yes/no question with per-answer score weights."""

    id: IndicatorId
    text: str
    yes_score: Decimal
    no_score: Decimal
    layer: str = "other"


@dataclass(frozen=True)
class Block:
    """A self-contained forest of indicators, included or excluded per use case."""

    block_id: str
    title: str
    indicators: dict[IndicatorId, Indicator]
    root_order: tuple[IndicatorId, ...]

    @property
    def ordered_ids(self) -> list[IndicatorId]:
        """All indicator ids in presentation (document) order."""
        return sorted(self.indicators)

    def __len__(self) -> int:
        return len(self.indicators)


@dataclass(frozen=True)
class Catalog:
    catalog_id: str
    version: str
    blocks: tuple[Block, ...]

    @property
    def block_ids(self) -> list[str]:
        return [b.block_id for b in self.blocks]

    def block(self, block_id: str) -> Block:
        for b in self.blocks:
            if b.block_id == block_id:
                return b
        raise KeyError(block_id)

    @property
    def indicator_count(self) -> int:
        return sum(len(b) for b in self.blocks)


@dataclass(frozen=True)
class LintFinding:
    severity: str  # "error" | "warning"
    code: str
    block_id: str
    number: IndicatorId | None
    message: str
    residual: Decimal | None = None

    def to_json_dict(self) -> dict:
        out = {
            "severity": self.severity,
            "code": self.code,
            "block_id": self.block_id,
            "number": str(self.number) if self.number is not None else None,
            "message": self.message,
        }
        if self.residual is not None:
            out["residual"] = format_points(self.residual)
        return out


@dataclass(frozen=True)
class LintReport:
    findings: tuple[LintFinding, ...]

    @property
    def errors(self) -> list[LintFinding]:
        return [f for f in self.findings if f.severity == "error"]

    @property
    def warnings(self) -> list[LintFinding]:
        return [f for f in self.findings if f.severity == "warning"]

    def to_json_dict(self) -> dict:
        return {"findings": [f.to_json_dict() for f in self.findings]}


# --- parsing -----------------------------------------------------------------


def _parse_block(block_id: str, title: str, text: str) -> Block:
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError(1, "missing header row") from None
    if header not in (CSV_HEADER, CSV_HEADER[:4]):
        raise ParseError(1, f"bad header {header!r}, want {','.join(CSV_HEADER)}")

    indicators: dict[IndicatorId, Indicator] = {}
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) not in (4, 5):
            raise ParseError(lineno, f"expected 4 or 5 columns, got {len(row)}")
        number, question, yes_text, no_text = row[:4]
        layer = row[4].strip() if len(row) == 5 and row[4].strip() else "other"
        if layer not in LAYERS:
            raise ParseError(lineno, f"unknown layer {layer!r}")
        try:
            ind_id = IndicatorId.parse(number)
        except ValueError as exc:
            raise ParseError(lineno, str(exc)) from None
        try:
            yes_score = parse_points(yes_text)
            no_score = parse_points(no_text)
        except ValueError as exc:
            raise ParseError(lineno, str(exc)) from None
        if ind_id in indicators:
            raise StructureError(f"block {block_id!r}: duplicate indicator id {ind_id}")
        indicators[ind_id] = Indicator(ind_id, question, yes_score, no_score, layer)

    for ind_id in indicators:
        parent = ind_id.parent
        if parent is not None and parent not in indicators:
            raise StructureError(
                f"block {block_id!r}: indicator {ind_id} has orphan parent {parent}"
            )

    roots = tuple(i for i in sorted(indicators) if i.depth == 1)
    return Block(block_id=block_id, title=title, indicators=indicators, root_order=roots)


def parse_catalog(
    block_sources: Iterable[tuple[str, str, str]],
    catalog_id: str,
    version: str,
) -> Catalog:
    """Parse (block_id, title, csv_text) sources into a validated Catalog."""
    blocks = []
    seen: set[str] = set()
    for block_id, title, text in block_sources:
        if block_id in seen:
            raise StructureError(f"duplicate block id {block_id!r}")
        seen.add(block_id)
        blocks.append(_parse_block(block_id, title, text))
    return Catalog(catalog_id=catalog_id, version=version, blocks=tuple(blocks))


def serialize_catalog(catalog: Catalog) -> list[tuple[str, str]]:
    """Render each block back to CSV text; parse(serialize(c)) == c."""
    out = []
    for block in catalog.blocks:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for ind_id in block.ordered_ids:
            ind = block.indicators[ind_id]
            writer.writerow(
                [
                    str(ind.id),
                    ind.text,
                    format_points(ind.yes_score),
                    format_points(ind.no_score),
                    ind.layer,
                ]
            )
        out.append((block.block_id, buf.getvalue()))
    return out


# --- manifest loading ---------------------------------------------------------


def load_catalog(manifest_path: str | Path) -> Catalog:
    """Load a catalog from a JSON manifest listing per-block CSV files."""
    manifest_path = Path(manifest_path)
    manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    sources = []
    for entry in manifest["blocks"]:
        file_path = manifest_path.parent / entry["file"]
        sources.append((entry["block_id"], entry["title"], file_path.read_text(encoding="utf-8")))
    return parse_catalog(sources, manifest["catalog_id"], manifest["version"])


def convert_block_rows(rows: Iterable[list[str]]) -> str:
    """One-time ingestion adapter: normalize externally-maintained indicator
    tables into the canonical block CSV format.

    Accepts common header spellings (e.g. "Number", "Indicator", "Yes",
    "No score"), ids with trailing dots, blank lines, scores with fewer
    than three decimals, and a missing layer column.
    """
    aliases = {
        "number": "number",
        "id": "number",
        "nr": "number",
        "indicator": "indicator",
        "question": "indicator",
        "text": "indicator",
        "yes_score": "yes_score",
        "yes": "yes_score",
        "yesscore": "yes_score",
        "no_score": "no_score",
        "no": "no_score",
        "noscore": "no_score",
        "layer": "layer",
    }
    rows = iter(rows)
    try:
        raw_header = next(rows)
    except StopIteration:
        raise ParseError(1, "missing header row") from None
    columns = []
    for cell in raw_header:
        key = cell.strip().lower().replace(" ", "_").replace("-", "_")
        columns.append(aliases.get(key))
    for required in ("number", "indicator", "yes_score", "no_score"):
        if required not in columns:
            raise ParseError(1, f"source header lacks a {required!r} column")

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for lineno, row in enumerate(rows, start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        record = {name: row[i].strip() for i, name in enumerate(columns) if name and i < len(row)}
        try:
            ind_id = IndicatorId.parse(record["number"])
            yes_score = points(Decimal(record["yes_score"]).quantize(Decimal("0.001")))
            no_score = points(Decimal(record["no_score"]).quantize(Decimal("0.001")))
        except (ValueError, ArithmeticError, KeyError) as exc:
            raise ParseError(lineno, f"cannot convert row: {exc}") from None
        layer = record.get("layer", "") or "other"
        if layer not in LAYERS:
            layer = "other"
        writer.writerow(
            [str(ind_id), record.get("indicator", ""), format_points(yes_score), format_points(no_score), layer]
        )
    return buf.getvalue()


# --- tree queries --------------------------------------------------------------


def children(block: Block, ind_id: IndicatorId) -> list[IndicatorId]:
    """Direct children of ``ind_id`` within the block, in id order."""
    if ind_id not in block.indicators:
        raise UnknownIndicator(f"{block.block_id}:{ind_id}")
    return sorted(i for i in block.indicators if i.parent == ind_id)


def descendants(block: Block, ind_id: IndicatorId) -> list[IndicatorId]:
    """All strict descendants of ``ind_id``, in id order."""
    if ind_id not in block.indicators:
        raise UnknownIndicator(f"{block.block_id}:{ind_id}")
    return sorted(i for i in block.indicators if ind_id.is_ancestor_of(i))


def _forest_sums(block: Block, ids: list[IndicatorId]) -> set[Decimal]:
    """Exact set of contribution sums achievable over a sibling forest.

    Every traversal-valid answer assignment maps to exactly one sum here:
    a node either answers "no" (its subtree is pruned) or answers "yes"
    and combines with every valid assignment of its children.
    """
    total: set[Decimal] = {ZERO}
    for ind_id in ids:
        ind = block.indicators[ind_id]
        subtree = {ind.no_score} | {
            ind.yes_score + s for s in _forest_sums(block, children(block, ind_id))
        }
        total = {a + b for a in total for b in subtree}
    return total


def best_case_subtree(block: Block, root_id: IndicatorId) -> Decimal:
    """Maximum contribution sum achievable over the strict descendants of
    ``root_id``, given ``root_id`` is answered "yes".

    Computed by exhaustive enumeration of the traversal-valid assignment
    space (a descendant is answerable only when all of its ancestors below
    the root answered "yes"). The root's own score is not included.
    """
    strict = descendants(block, root_id)
    if len(strict) > ENUMERATION_BOUND:
        raise SubtreeTooLarge(
            f"{block.block_id}:{root_id} has {len(strict)} descendants (bound {ENUMERATION_BOUND})"
        )
    return points(max(_forest_sums(block, children(block, root_id))))


def _subtree_max(block: Block, ind_id: IndicatorId) -> Decimal:
    """Best achievable contribution of a whole subtree, own answer included.

    Closed-form maximum (no enumeration); used only for the block-level
    overshoot check where subtree size is unbounded.
    """
    ind = block.indicators[ind_id]
    with_yes = ind.yes_score + sum(
        (_subtree_max(block, c) for c in children(block, ind_id)), start=ZERO
    )
    return max(ind.no_score, with_yes)


# --- lint ----------------------------------------------------------------------


def lint_catalog(catalog: Catalog, zero_sum_tolerance: Decimal = ZERO) -> LintReport:
    """Check weight-design and structural rules; never raises on valid input.

    * errors: orphan parents, empty question text, score magnitude above 4.000
    * ZERO_SUM (warning): a depth-1 indicator with a negative "yes" weight
      whose subtree cannot win the penalty back exactly (residual reported)
    * NO_REGAIN (warning): a negative-"yes" indicator with no descendants at
      all, so its penalty can never be recovered
    * BLOCK_OVERSHOOT (warning): block weights allow a positive best-case
      total, pushing an unclamped global score above the 4.000 baseline
    """
    findings: list[LintFinding] = []
    for block in catalog.blocks:
        for ind_id in block.ordered_ids:
            ind = block.indicators[ind_id]
            parent = ind_id.parent
            if parent is not None and parent not in block.indicators:
                findings.append(
                    LintFinding("error", "ORPHAN_PARENT", block.block_id, ind_id,
                                f"parent {parent} missing")
                )
            if not ind.text.strip():
                findings.append(
                    LintFinding("error", "EMPTY_TEXT", block.block_id, ind_id,
                                "question text is empty")
                )
            for side, score in (("yes", ind.yes_score), ("no", ind.no_score)):
                if abs(score) > MAX_SCORE_MAGNITUDE:
                    findings.append(
                        LintFinding("error", "SCORE_RANGE", block.block_id, ind_id,
                                    f"{side}_score {format_points(score)} exceeds magnitude 4.000")
                    )
            if ind.yes_score < 0 and not children(block, ind_id):
                findings.append(
                    LintFinding("warning", "NO_REGAIN", block.block_id, ind_id,
                                "negative 'yes' weight with no follow-up indicators to win it back")
                )
            if ind_id.depth == 1 and ind.yes_score < 0:
                try:
                    regain = best_case_subtree(block, ind_id)
                except SubtreeTooLarge:
                    findings.append(
                        LintFinding("warning", "ZERO_SUM_UNCHECKED", block.block_id, ind_id,
                                    "subtree too large for exhaustive zero-sum check")
                    )
                else:
                    residual = ind.yes_score + regain
                    if abs(residual) > zero_sum_tolerance:
                        findings.append(
                            LintFinding(
                                "warning", "ZERO_SUM", block.block_id, ind_id,
                                f"best-case subtree regain {format_points(regain)} does not cancel "
                                f"the {format_points(ind.yes_score)} penalty",
                                residual=points(residual),
                            )
                        )
        block_best = sum((_subtree_max(block, root) for root in block.root_order), start=ZERO)
        if block_best > 0:
            findings.append(
                LintFinding("warning", "BLOCK_OVERSHOOT", block.block_id, None,
                            f"weights allow a positive block total of {format_points(block_best)}",
                            residual=block_best)
            )

    block_index = {b.block_id: i for i, b in enumerate(catalog.blocks)}
    findings.sort(
        key=lambda f: (
            block_index[f.block_id],
            f.number.segments if f.number is not None else (),
            f.code,
        )
    )
    return LintReport(tuple(findings))


def iter_indicators(catalog: Catalog) -> Iterator[tuple[str, Indicator]]:
    for block in catalog.blocks:
        for ind_id in block.ordered_ids:
            yield block.block_id, block.indicators[ind_id]
