"""Named residual checks and the reports that collect them."""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class Check:
    name: str
    residual: float
    threshold: float

    @property
    def passed(self):
        return bool(self.residual <= self.threshold)

    @property
    def ratio(self):
        if self.threshold > 0:
            return self.residual / self.threshold
        return 0.0 if self.residual == 0 else math.inf

    def to_json(self):
        return {"residual": float(self.residual), "threshold": float(self.threshold),
                "passed": self.passed}


class Report:
    """Ordered collection of :class:`Check` plus free-form ``info``."""

    def __init__(self, kind, checks=None, info=None):
        self.kind = kind
        self.checks = {}
        self.info = dict(info or {})
        for c in checks or ():
            self.checks[c.name] = c

    def add(self, name, residual, threshold):
        self.checks[name] = Check(name, float(residual), float(threshold))
        return self.checks[name]

    def extend(self, other, prefix=""):
        for c in other.checks.values():
            self.checks[prefix + c.name] = Check(prefix + c.name, c.residual, c.threshold)
        return self

    def __getitem__(self, name):
        return self.checks[name]

    def __contains__(self, name):
        return name in self.checks

    @property
    def passed(self):
        return all(c.passed for c in self.checks.values())

    @property
    def failures(self):
        return [c for c in self.checks.values() if not c.passed]

    def worst(self):
        if not self.checks:
            return None
        return max(self.checks.values(), key=lambda c: c.ratio)

    def to_json(self):
        out = {"kind": self.kind, "passed": self.passed,
               "checks": {name: c.to_json() for name, c in self.checks.items()}}
        if self.info:
            out["info"] = self.info
        return out

    def __repr__(self):
        state = "passed" if self.passed else f"{len(self.failures)} failed"
        return f"Report({self.kind!r}, {len(self.checks)} checks, {state})"
