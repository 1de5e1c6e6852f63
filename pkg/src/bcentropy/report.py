"""Result record shared by every inequality check."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

from .entropy import EntropyValue

TOLERANCE = 1e-9


def digest(payload) -> str:
    """Short stable hash of a JSON-serialisable instance description."""
    text = json.dumps(payload, sort_keys=True, default=str)
    return hashlib.sha256(text.encode()).hexdigest()[:16]


def _ev(x) -> EntropyValue:
    return x if isinstance(x, EntropyValue) else EntropyValue(float(x), 0.0)


@dataclass
class VerificationReport:
    """One inequality evaluated on one instance.

    ``margin`` is oriented so that a non-negative value means the inequality
    holds; for equalities it is minus the absolute discrepancy.
    """

    rule_id: str
    instance: str
    lhs: EntropyValue
    rhs: EntropyValue
    margin: float
    hypothesis_satisfied: bool = True
    tolerance: float = TOLERANCE
    details: dict = field(default_factory=dict)

    @property
    def vacuous(self) -> bool:
        return not self.hypothesis_satisfied

    @property
    def passed(self) -> bool:
        return self.vacuous or self.margin >= -self.tolerance

    def to_json(self) -> dict:
        return {
            "rule": self.rule_id,
            "instance": self.instance,
            "lhs": self.lhs.value,
            "lhs_error": self.lhs.abs_error,
            "rhs": self.rhs.value,
            "rhs_error": self.rhs.abs_error,
            "margin": self.margin,
            "hypothesis_satisfied": self.hypothesis_satisfied,
            "pass": self.passed,
            "details": self.details,
        }


def leq(rule_id, instance, lhs, rhs, hypothesis=True, **details) -> VerificationReport:
    """Report for lhs <= rhs."""
    lhs, rhs = _ev(lhs), _ev(rhs)
    return VerificationReport(rule_id, instance, lhs, rhs, rhs.value - lhs.value, bool(hypothesis), details=details)


def equal(rule_id, instance, lhs, rhs, hypothesis=True, **details) -> VerificationReport:
    """Report for lhs == rhs."""
    lhs, rhs = _ev(lhs), _ev(rhs)
    return VerificationReport(rule_id, instance, lhs, rhs, -abs(rhs.value - lhs.value), bool(hypothesis), details=details)


def geq(rule_id, instance, lhs, rhs, hypothesis=True, **details) -> VerificationReport:
    """Report for lhs >= rhs."""
    lhs, rhs = _ev(lhs), _ev(rhs)
    return VerificationReport(rule_id, instance, lhs, rhs, lhs.value - rhs.value, bool(hypothesis), details=details)
