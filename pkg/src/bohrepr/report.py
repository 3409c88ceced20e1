"""Verification reports: assertion records, sections, JSON serialization.

Values are converted to JSON-compatible form when an assertion is built,
so a parsed report compares equal to the one that was written. Complex
numbers serialize as ``[re, im]``, matrices as row-major nested lists.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .errors import DuplicateId

PROVENANCES = ("PAPER", "TRIVIAL", "DERIVED")


def jsonable(x):
    """Convert numbers, numpy arrays and containers to JSON-compatible values."""
    if x is None or isinstance(x, (bool, str)):
        return x
    if isinstance(x, np.bool_):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        return float(x)
    if isinstance(x, (complex, np.complexfloating)):
        return [float(x.real), float(x.imag)]
    if isinstance(x, np.ndarray):
        if np.iscomplexobj(x):
            return jsonable([jsonable(v) for v in x]) if x.ndim > 1 else [[float(v.real), float(v.imag)] for v in x]
        return x.tolist()
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    raise TypeError(f"cannot serialize {type(x).__name__}")


@dataclass(frozen=True)
class Assertion:
    id: str
    description: str
    expected: object
    actual: object
    residual: float
    tolerance: float
    passed: bool
    provenance: str
    citation: str = ""

    def __post_init__(self):
        if self.provenance not in PROVENANCES:
            raise ValueError(f"unknown provenance {self.provenance!r}")
        if self.residual < 0:
            raise ValueError("residual must be non-negative")
        if self.passed != (self.residual <= self.tolerance):
            raise ValueError("passed must equal residual <= tolerance")

    def as_dict(self):
        return {
            "id": self.id,
            "description": self.description,
            "expected": self.expected,
            "actual": self.actual,
            "residual": self.residual,
            "tolerance": self.tolerance,
            "passed": self.passed,
            "provenance": self.provenance,
            "citation": self.citation,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(**d)


def check_close(id, description, expected, actual, tolerance, provenance, citation=""):
    """Numeric assertion; the residual is ``|actual - expected|`` (max-abs for arrays)."""
    res = float(np.max(np.abs(np.asarray(actual) - np.asarray(expected)))) if np.size(actual) else 0.0
    return Assertion(id, description, jsonable(expected), jsonable(actual), res, float(tolerance),
                     res <= tolerance, provenance, citation)


def check_bound(id, description, value, tolerance, provenance, citation=""):
    """Assertion that a non-negative residual is within tolerance (expected value 0)."""
    value = float(value)
    return Assertion(id, description, 0.0, value, value, float(tolerance), value <= tolerance,
                     provenance, citation)


def check_true(id, description, expected, actual, provenance, citation="", evidence=None):
    """Boolean assertion: residual 0 when ``actual == expected``, else 1, tolerance 0.

    ``evidence`` (e.g. a witness residual) is stored alongside the observed value.
    """
    ok = bool(actual) == bool(expected)
    act = bool(actual) if evidence is None else {"value": bool(actual), "evidence": jsonable(evidence)}
    return Assertion(id, description, bool(expected), act, 0.0 if ok else 1.0, 0.0, ok,
                     provenance, citation)


@dataclass
class Section:
    assertions: list
    details: dict = field(default_factory=dict)

    def as_dict(self):
        return {
            "assertions": [a.as_dict() for a in self.assertions],
            "details": self.details,
        }


@dataclass
class Report:
    tool_version: str
    seed: int
    tolerance: dict
    sections: dict
    summary: dict

    @property
    def passed(self):
        return self.summary["failed"] == 0

    @property
    def exit_status(self):
        return 0 if self.passed else 1

    def failures(self):
        return [(name, a) for name, s in self.sections.items() for a in s.assertions if not a.passed]

    def as_dict(self):
        return {
            "tool_version": self.tool_version,
            "seed": self.seed,
            "tolerance": self.tolerance,
            "sections": {k: v.as_dict() for k, v in self.sections.items()},
            "summary": self.summary,
        }


def _summary(sections):
    passed = sum(a.passed for s in sections.values() for a in s.assertions)
    total = sum(len(s.assertions) for s in sections.values())
    return {
        "passed": passed,
        "failed": total - passed,
        "total": total,
        "status": "passed" if passed == total else "failed",
    }


def assemble(sections, seed=0, tolerance=None, tool_version=__version__):
    """Build a report with sections and assertions in lexicographic order.

    ``sections`` maps names to :class:`Section` objects or plain assertion lists.
    """
    ordered = {}
    for name in sorted(sections):
        sec = sections[name]
        if not isinstance(sec, Section):
            sec = Section(list(sec))
        seen = set()
        for a in sec.assertions:
            if a.id in seen:
                raise DuplicateId(f"duplicate assertion id {a.id!r} in section {name!r}")
            seen.add(a.id)
        ordered[name] = Section(sorted(sec.assertions, key=lambda a: a.id), jsonable(sec.details))
    tol = tolerance.as_dict() if hasattr(tolerance, "as_dict") else dict(tolerance or {})
    return Report(tool_version, int(seed), tol, ordered, _summary(ordered))


def serialize(report):
    return json.dumps(report.as_dict(), indent=2, ensure_ascii=False) + "\n"


def parse(text):
    d = json.loads(text)
    sections = {
        name: Section([Assertion.from_dict(a) for a in s["assertions"]], s["details"])
        for name, s in d["sections"].items()
    }
    return Report(d["tool_version"], d["seed"], d["tolerance"], sections, d["summary"])
