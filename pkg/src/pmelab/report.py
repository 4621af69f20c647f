"""Structured pass/fail records produced by every check."""
from dataclasses import dataclass, field
import json
import math
import time


@dataclass
class VerificationReport:
    """Result of one verification check.

    ``passed`` is true exactly when every measured error is at most its
    tolerance; it is derived, never set by hand.  Errors are stored as
    ``(label, error, tolerance)`` triples; ``tolerance`` is the default for
    entries added without one.
    """

    name: str
    inputs: dict = field(default_factory=dict)
    errors: list = field(default_factory=list)
    tolerance: float = 0.0
    runtime: float = 0.0
    details: dict = field(default_factory=dict)

    @property
    def passed(self):
        return all(err <= tol for _, err, tol in self.errors)

    def add(self, label, error, tolerance=None):
        tol = self.tolerance if tolerance is None else tolerance
        self.errors.append((str(label), float(error), float(tol)))

    @property
    def max_error(self):
        return max((e for _, e, _ in self.errors), default=0.0)

    @property
    def failures(self):
        """Labels of the entries exceeding their tolerance (NaN counts as failing)."""
        return [label for label, err, tol in self.errors if not err <= tol]

    def as_dict(self):
        return {
            "name": self.name,
            "inputs": _jsonable(self.inputs),
            "errors": [[label, _num(err), _num(tol)] for label, err, tol in self.errors],
            "tolerance": _num(self.tolerance),
            "passed": self.passed,
            "runtime": self.runtime,
            "details": _jsonable(self.details),
        }

    def to_json(self):
        return json.dumps(self.as_dict(), sort_keys=True)

    def summary_line(self):
        if self.passed:
            return f"PASS {self.name}: max error {self.max_error:.3e}"
        return f"FAIL {self.name}: " + ", ".join(self.failures)


def _num(x):
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return x


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, int):
        return obj
    try:
        return _num(obj)
    except (TypeError, ValueError):
        return str(obj)


class timed:
    """Context manager that stores elapsed wall time on a report."""

    def __init__(self, report):
        self.report = report

    def __enter__(self):
        self._t0 = time.perf_counter()
        return self.report

    def __exit__(self, *exc):
        self.report.runtime = time.perf_counter() - self._t0
        return False
