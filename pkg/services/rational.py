"""
Exact rational helpers and the "p/q" text serialization.
"""

from fractions import Fraction
from typing import Any, Dict, Union

Number = Union[int, str, Fraction]


def frac(value: Number) -> Fraction:
    """Coerce ints, Fractions and "p/q" strings; floats are rejected."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"cannot use {type(value).__name__} as an exact rational")


def to_text(value: Number) -> str:
    value = frac(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def from_text(text: str) -> Fraction:
    return Fraction(text.strip())


def rational_field(value: Number) -> Dict[str, str]:
    value = frac(value)
    return {'exact': to_text(value), 'decimal': f"{float(value):.10g}"}


def jsonable(obj: Any) -> Any:
    """Recursively replace Fractions by "p/q" strings."""
    if isinstance(obj, Fraction):
        return to_text(obj)
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set, frozenset)):
        items = sorted(obj, key=repr) if isinstance(obj, (set, frozenset)) else obj
        return [jsonable(v) for v in items]
    return obj


def is_integral(value: Fraction) -> bool:
    return value == 0 or value == 1
