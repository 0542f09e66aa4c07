"""Exact score-point arithmetic.

All scores in the system are decimals with exactly three fractional digits
(score points). Arithmetic must stay exact so that equality-based checks
never drift; binary floats are never used for scores.
"""

from __future__ import annotations

from decimal import Decimal, InvalidOperation

THREE_PLACES = Decimal("0.001")

#: One score point, rendered "1.000".
ZERO = Decimal("0.000")


def points(value: str | int | Decimal) -> Decimal:
    """Build an exact score value from a string, int, or Decimal.

    Floats are rejected: they carry binary rounding error and must never
    enter score arithmetic.
    """
    if isinstance(value, float):
        raise TypeError("score points must not be constructed from float")
    dec = value if isinstance(value, Decimal) else Decimal(value)
    quantized = dec.quantize(THREE_PLACES)
    if quantized != dec:
        raise ValueError(f"score has more than 3 fractional digits: {value}")
    return quantized


def parse_points(text: str) -> Decimal:
    """Parse a score rendered with exactly three decimals (optional minus)."""
    text = text.strip()
    sign, _, digits = text.partition("-") if text.startswith("-") else ("", "", text)
    whole, dot, frac = digits.partition(".")
    if not whole.isdigit() or dot != "." or len(frac) != 3 or not frac.isdigit():
        raise ValueError(f"malformed score (want e.g. 0.000 or -1.250): {text!r}")
    try:
        return Decimal(text).quantize(THREE_PLACES)
    except InvalidOperation as exc:  # pragma: no cover - guarded above
        raise ValueError(f"malformed score: {text!r}") from exc


def format_points(value: Decimal) -> str:
    """Render with exactly three decimals; negative zero is normalized."""
    if value == 0:
        value = abs(value)
    return format(value.quantize(THREE_PLACES), "f")


def clamp(value: Decimal, low: Decimal, high: Decimal) -> Decimal:
    return min(max(value, low), high)
