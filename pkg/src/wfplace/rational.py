"""Exact rational values and their text representation.

All costs, sizes and times in this package are exact rationals: plain
Python ints mixed freely with fractions.Fraction. Files use decimal
strings ("7", "1.5") wherever the value has a finite decimal expansion
and "p/q" otherwise; the parser accepts both.
"""

from __future__ import annotations

from fractions import Fraction

Rational = int | Fraction


def parse_rational(text: str) -> Rational:
    """Parse "7", "1.5" or "3/2" into an exact rational."""
    stripped = text.strip()
    try:
        return int(stripped)
    except ValueError:
        pass
    try:
        return Fraction(stripped)
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"not a rational number: {text!r}") from exc


def format_rational(value: Rational) -> str:
    """Render a rational as its exact decimal string, or "p/q" if none exists."""
    frac = Fraction(value)
    if frac.denominator == 1:
        return str(frac.numerator)
    rest = frac.denominator
    twos = fives = 0
    while rest % 2 == 0:
        rest //= 2
        twos += 1
    while rest % 5 == 0:
        rest //= 5
        fives += 1
    if rest != 1:
        return f"{frac.numerator}/{frac.denominator}"
    digits = max(twos, fives)
    scaled = frac.numerator * 10**digits // frac.denominator
    sign = "-" if scaled < 0 else ""
    text = str(abs(scaled)).rjust(digits + 1, "0")
    return f"{sign}{text[:-digits]}.{text[-digits:]}"
