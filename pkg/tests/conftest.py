"""Shared fixtures: a three-level security block whose weights exercise
every scoring rule, and independent brute-force oracles the engine is
checked against.
"""

from __future__ import annotations

import random
from decimal import Decimal
from itertools import count

import pytest

from erl.catalog import Block, Catalog, IndicatorId, children, parse_catalog
from erl.points import ZERO
from erl.traversal import AnswerKey, AnswerValue, next_question

# One root, three levels deep, a -1.000 relevance penalty, and mitigation /
# validation weights that can win back at most 0.720 of it.
SECURITY_ROWS = [
    ("2", "Could the system be deliberately exploited to cause serious harm?", "-1.000", "0.000", "relevance"),
    ("2.1", "Is the product hardened to a recognized cybersecurity standard?", "0.360", "0.000", "mitigation"),
    ("2.2", "Do extra safeguards cover attacks across the whole product lifecycle?", "0.280", "0.000", "mitigation"),
    ("2.2.1", "Has the product undergone penetration testing or red-team review?", "0.000", "-0.280", "validation"),
    ("2.3", "Will security updates keep coming for the product's full expected lifetime?", "0.080", "0.000", "mitigation"),
    ("2.3.1", "Are users told how long security update coverage lasts?", "0.000", "-0.080", "validation"),
    ("2.4", "Could the product be repurposed for harmful or unlawful ends?", "-0.270", "0.000", "relevance"),
    ("2.4.1", "Has a risk assessment mapped out potential misuse scenarios?", "0.180", "0.000", "mitigation"),
    ("2.4.1.1", "Are preventive controls in place against the identified misuse risks?", "0.000", "-0.180", "validation"),
    ("2.4.2", "Can users or third parties report misuse back to the maker?", "0.090", "0.000", "mitigation"),
]


def rows_to_csv(rows) -> str:
    lines = ["number,indicator,yes_score,no_score,layer"]
    for number, text, yes, no, layer in rows:
        lines.append(f'{number},"{text}",{yes},{no},{layer}')
    return "\n".join(lines) + "\n"


SECURITY_CSV = rows_to_csv(SECURITY_ROWS)


@pytest.fixture
def security_catalog() -> Catalog:
    return parse_catalog(
        [("security", "Security", SECURITY_CSV)], catalog_id="demo", version="1.0"
    )


@pytest.fixture
def security_block(security_catalog) -> Block:
    return security_catalog.blocks[0]


def iid(text: str) -> IndicatorId:
    return IndicatorId.parse(text)


# --- answer helpers ------------------------------------------------------------


def run_answers(session, answers, **kwargs):
    """Submit (number, verdict) pairs against a single-block session."""
    from erl.traversal import submit_answer

    block_id = session.selected_blocks[0]
    for number, verdict in answers:
        unsure = verdict == "unsure"
        value = AnswerValue("no" if unsure else verdict, unsure=unsure)
        submit_answer(session, (block_id, iid(number)), value, **kwargs)
    return session


BEST_CASE_ANSWERS = [
    ("2", "yes"), ("2.1", "yes"), ("2.2", "yes"), ("2.2.1", "yes"),
    ("2.3", "yes"), ("2.3.1", "yes"), ("2.4", "no"),
]

WORST_CASE_ANSWERS = [
    ("2", "yes"), ("2.1", "no"), ("2.2", "no"), ("2.3", "no"),
    ("2.4", "yes"), ("2.4.1", "yes"), ("2.4.1.1", "no"), ("2.4.2", "no"),
]


# Three blocks shaped like a two-phase improvement run: the weakest
# block recovers exactly one point while the others hold still.
AIACT_ROWS = [
    ("1", "Does the deployment carry the identified obligations?", "-2.295", "0.000", "relevance"),
    ("1.1", "Were the user-information duties implemented?", "1.000", "0.000", "mitigation"),
]
GDPR_ROWS = [("1", "Is personal data processed without a completed review?", "-1.700", "0.000", "relevance")]
ROBOTICS_ROWS = [("1", "Do open physical-safety findings remain?", "-0.900", "0.000", "relevance")]


def make_three_block_catalog() -> Catalog:
    return parse_catalog(
        [
            ("ai-act", "AI Act", rows_to_csv(AIACT_ROWS)),
            ("gdpr", "GDPR", rows_to_csv(GDPR_ROWS)),
            ("robotics", "Robotics", rows_to_csv(ROBOTICS_ROWS)),
        ],
        catalog_id="cobot",
        version="1.0",
    )


@pytest.fixture
def three_block_catalog() -> Catalog:
    return make_three_block_catalog()


def answer_three_blocks(
    catalog: Catalog,
    aiact_mitigated: bool,
    session_id: str | None = None,
    session_date: str = "2025-03-01",
    use_case_id: str = "cobot",
):
    from erl.traversal import SessionMetadata, start_session, submit_answer

    meta = SessionMetadata(use_case_id=use_case_id, session_date=session_date)
    fixed = lambda: "2025-01-15T10:00:00Z"
    session = start_session(
        catalog, ["ai-act", "gdpr", "robotics"], meta, session_id=session_id, clock=fixed
    )
    submit_answer(session, ("ai-act", iid("1")), AnswerValue("yes"), clock=fixed)
    submit_answer(
        session, ("ai-act", iid("1.1")), AnswerValue("yes" if aiact_mitigated else "no"), clock=fixed
    )
    submit_answer(session, ("gdpr", iid("1")), AnswerValue("yes"), clock=fixed)
    submit_answer(session, ("robotics", iid("1")), AnswerValue("yes"), clock=fixed)
    return session


# --- independent oracles ---------------------------------------------------------
# These never call the production traversal/enumeration paths they check.


def forest_maps(block: Block, ids) -> list[dict]:
    """Every gate-valid assignment over a sibling forest, as {id: verdict}."""
    combos = [{}]
    for ind_id in ids:
        subtree = [{ind_id: "no"}]
        for tail in forest_maps(block, children(block, ind_id)):
            subtree.append({ind_id: "yes", **tail})
        combos = [{**a, **b} for a in combos for b in subtree]
    return combos


def complete_answer_maps(catalog: Catalog, selected_blocks) -> list[dict[AnswerKey, str]]:
    """Every gate-valid complete answer map over the selected blocks."""
    combos: list[dict[AnswerKey, str]] = [{}]
    for block_id in selected_blocks:
        block = catalog.block(block_id)
        block_maps = [
            {(block_id, ind_id): verdict for ind_id, verdict in m.items()}
            for m in forest_maps(block, block.root_order)
        ]
        combos = [{**a, **b} for a in combos for b in block_maps]
    return combos


def count_complete_maps(catalog: Catalog, selected_blocks) -> int:
    def node_count(block, ind_id):
        total = 1
        for child in children(block, ind_id):
            total *= node_count(block, child)
        return 1 + total

    result = 1
    for block_id in selected_blocks:
        block = catalog.block(block_id)
        for root in block.root_order:
            result *= node_count(block, root)
    return result


def map_score_sum(catalog: Catalog, answer_map: dict[AnswerKey, str]) -> Decimal:
    total = ZERO
    for (block_id, ind_id), verdict in answer_map.items():
        ind = catalog.block(block_id).indicators[ind_id]
        total += ind.yes_score if verdict == "yes" else ind.no_score
    return total


def recursive_best_case(block: Block, root_id: IndicatorId) -> Decimal:
    """Closed-form max regain under a root, independent of the enumeration path."""

    def best(ind_id):
        ind = block.indicators[ind_id]
        with_yes = ind.yes_score + sum((best(c) for c in children(block, ind_id)), start=ZERO)
        return max(ind.no_score, with_yes)

    return sum((best(c) for c in children(block, root_id)), start=ZERO)


def engine_complete_maps(catalog: Catalog, selected_blocks) -> set[frozenset]:
    """All complete runs reachable through the engine's own gating function."""
    runs: set[frozenset] = set()
    answered: dict[AnswerKey, AnswerValue] = {}

    def explore():
        key = next_question(catalog, selected_blocks, answered)
        if key is None:
            runs.add(frozenset((k, v.verdict) for k, v in answered.items()))
            return
        for verdict in ("yes", "no"):
            answered[key] = AnswerValue(verdict)
            explore()
            del answered[key]

    explore()
    return runs


# --- random catalog generation ----------------------------------------------------

_uid = count()


def random_block(rng: random.Random, max_indicators: int = 15, block_id: str | None = None) -> tuple[str, str, str]:
    """A random valid block source with bounded gate-valid run count."""
    n = rng.randint(1, max_indicators)
    ids: list[tuple[int, ...]] = []
    roots = 0
    while len(ids) < n:
        if not ids or rng.random() < 0.4:
            roots += 1
            ids.append((roots,))
        else:
            parent = rng.choice(ids)
            sibling = sum(1 for i in ids if i[:-1] == parent and len(i) == len(parent) + 1)
            ids.append((*parent, sibling + 1))
    rows = []
    for segments in sorted(ids):
        number = ".".join(str(s) for s in segments)
        yes = Decimal(rng.randint(-4000, 4000)).scaleb(-3)
        no = Decimal(rng.randint(-4000, 4000)).scaleb(-3)
        rows.append((number, f"Is condition {number} satisfied?", f"{yes:.3f}", f"{no:.3f}", "other"))
    bid = block_id or f"b{next(_uid)}"
    return (bid, bid.upper(), rows_to_csv(rows))


def random_catalog(rng: random.Random, max_indicators: int = 15, max_blocks: int = 1) -> Catalog:
    blocks = [
        random_block(rng, max_indicators=max_indicators)
        for _ in range(rng.randint(1, max_blocks))
    ]
    return parse_catalog(blocks, catalog_id=f"rand{next(_uid)}", version="1")
