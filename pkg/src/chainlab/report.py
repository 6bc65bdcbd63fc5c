"""Verification report record and JSON-friendly value conversion."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Mapping

from .model import BitString


def to_jsonable(value: Any) -> Any:
    """Convert report values to JSON-ready primitives without precision loss.

    Rationals become "num/den" strings, bit strings become their text form,
    floats are rounded to 12 significant digits (the serialization contract).
    """
    if isinstance(value, Fraction):
        return f"{value.numerator}/{value.denominator}"
    if isinstance(value, BitString):
        return value.text
    if isinstance(value, bool) or value is None or isinstance(value, (int, str)):
        return value
    if isinstance(value, float):
        return float(f"{value:.12g}")
    if isinstance(value, Mapping):
        return {str(k): to_jsonable(v) for k, v in sorted(value.items(), key=lambda kv: str(kv[0]))}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    return str(value)


@dataclass(frozen=True)
class VerificationReport:
    """One named check: what was compared, how, and whether it held."""

    check: str
    params: Mapping[str, Any]
    lhs: Any
    rhs: Any
    relation: str
    passed: bool
    tolerance: Any = None
    mode: str = "exact"
    details: Mapping[str, Any] = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        return {
            "check": self.check,
            "params": to_jsonable(dict(self.params)),
            "lhs": to_jsonable(self.lhs),
            "rhs": to_jsonable(self.rhs),
            "relation": self.relation,
            "pass": self.passed,
            "tolerance": to_jsonable(self.tolerance),
            "mode": self.mode,
            "details": to_jsonable(dict(self.details)),
        }
