"""Check outcomes shared by every decision procedure, and the error types."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np

PASS = "pass"
FAIL = "fail"


class InputError(ValueError):
    """Malformed or inconsistent input. The CLI maps it to exit code 2."""


class HypothesisViolation(InputError):
    """A structural hypothesis of a check (monotonicity, F(0) = 0, ...) fails."""


class PreconditionError(InputError):
    """A check was asked to run outside the setting where it is meaningful."""


class InconclusiveError(RuntimeError):
    """Sampling produced nothing to test."""


def jsonable(obj: Any) -> Any:
    """Convert witnesses and details to plain JSON types.

    Tuples and arrays become lists and infinite floats become ``"+inf"`` /
    ``"-inf"``. NaN is rejected.
    """
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        if math.isnan(f):
            raise ValueError("NaN cannot be serialized")
        if math.isinf(f):
            return "+inf" if f > 0 else "-inf"
        return f
    if obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, (set, frozenset)):
        return sorted((jsonable(v) for v in obj), key=repr)
    return str(obj)


@dataclass
class Verdict:
    """Pass/fail with a replayable witness.

    ``witness`` is a dict whose keys depend on the check (for instance
    ``{"h": ..., "t": ..., "t_prime": ...}`` for time consistency).
    ``details`` carries everything else a report should show: both routes
    of a dual-route check, tolerances, counts.
    """

    check: str
    outcome: str
    witness: Optional[dict] = None
    discrepancy: Optional[float] = None
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.outcome not in (PASS, FAIL):
            raise ValueError(f"outcome must be 'pass' or 'fail', got {self.outcome!r}")
        if self.outcome == FAIL and self.witness is None:
            raise ValueError("a failing verdict needs a witness")

    @property
    def passed(self) -> bool:
        return self.outcome == PASS

    def __bool__(self) -> bool:
        return self.passed

    def to_dict(self) -> dict:
        return {
            "check": self.check,
            "outcome": self.outcome,
            "witness": jsonable(self.witness),
            "discrepancy": jsonable(self.discrepancy),
            "details": jsonable(self.details),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Verdict":
        return cls(
            check=d["check"],
            outcome=d["outcome"],
            witness=d.get("witness"),
            discrepancy=d.get("discrepancy"),
            details=d.get("details") or {},
        )

    @classmethod
    def ok(cls, check: str, **details) -> "Verdict":
        return cls(check, PASS, discrepancy=details.pop("discrepancy", None), details=details)

    @classmethod
    def fail(cls, check: str, witness: dict, discrepancy=None, **details) -> "Verdict":
        return cls(check, FAIL, witness=witness, discrepancy=discrepancy, details=details)

    def summary(self) -> str:
        line = f"{self.check}: {self.outcome.upper()}"
        if self.witness is not None:
            line += f"  witness={jsonable(self.witness)}"
        if self.discrepancy is not None:
            line += f"  discrepancy={jsonable(self.discrepancy)}"
        return line
