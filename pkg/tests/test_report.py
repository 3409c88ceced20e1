import json

import numpy as np
import pytest

from bohrepr.errors import DuplicateId
from bohrepr.linalg import DEFAULT_TOL
from bohrepr.report import (
    Assertion,
    Section,
    assemble,
    check_bound,
    check_close,
    check_true,
    jsonable,
    parse,
    serialize,
)


def test_empty_report():
    r = assemble({})
    assert r.summary == {"passed": 0, "failed": 0, "total": 0, "status": "passed"}
    assert r.exit_status == 0


def test_single_pass_tally():
    r = assemble({"s": [check_bound("a", "zero", 0.0, 1e-9, "TRIVIAL")]})
    assert r.summary["passed"] == 1 and r.summary["failed"] == 0


def test_mixed_is_failed():
    r = assemble({"s": [check_bound("a", "ok", 0.0, 1e-9, "TRIVIAL"),
                        check_bound("b", "bad", 1.0, 1e-9, "TRIVIAL")]})
    assert r.summary["status"] == "failed"
    assert r.exit_status == 1
    assert [a.id for _, a in r.failures()] == ["b"]


def test_duplicate_ids_rejected():
    a = check_bound("a", "x", 0.0, 1e-9, "TRIVIAL")
    with pytest.raises(DuplicateId):
        assemble({"s": [a, a]})


def test_ordering_is_lexicographic():
    mk = lambda i: check_bound(i, i, 0.0, 1.0, "TRIVIAL")  # noqa: E731
    r = assemble({"z": [mk("b"), mk("a")], "a": [mk("c")]})
    assert list(r.sections) == ["a", "z"]
    assert [a.id for a in r.sections["z"].assertions] == ["a", "b"]


def test_assertion_invariant_enforced():
    with pytest.raises(ValueError):
        Assertion("a", "d", 0, 0, 1.0, 0.5, True, "TRIVIAL")
    with pytest.raises(ValueError):
        Assertion("a", "d", 0, 0, 0.0, 0.5, True, "GUESS")
    with pytest.raises(ValueError):
        Assertion("a", "d", 0, 0, -1.0, 0.5, True, "TRIVIAL")


def test_check_builders():
    c = check_close("c", "vector", [0.5, 0.5], np.array([0.5, 0.5 + 1e-12]), 1e-9, "DERIVED")
    assert c.passed and c.residual == pytest.approx(1e-12)
    t = check_true("t", "bool", True, False, "PAPER", evidence=0.3)
    assert not t.passed and t.residual == 1.0 and t.actual == {"value": False, "evidence": 0.3}


def test_jsonable_values():
    assert jsonable(1 + 2j) == [1.0, 2.0]
    assert jsonable(np.array([1j, 2])) == [[0.0, 1.0], [2.0, 0.0]]
    assert jsonable(np.eye(2, dtype=complex)) == [[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [1.0, 0.0]]]
    assert jsonable({"a": (np.int64(3), np.bool_(True))}) == {"a": [3, True]}
    with pytest.raises(TypeError):
        jsonable(object())


def test_round_trip_field_for_field():
    sec = Section([check_close("x", "complex", 1j, 1j + 1e-13, 1e-9, "DERIVED", "cite"),
                   check_true("y", "flag", False, False, "TRIVIAL")],
                  {"matrix": np.eye(2) * (1 + 1j), "n": 3})
    r = assemble({"sec": sec}, seed=5, tolerance=DEFAULT_TOL)
    text = serialize(r)
    back = parse(text)
    assert back.as_dict() == r.as_dict()
    assert serialize(back) == text
    assert list(json.loads(text)) == ["tool_version", "seed", "tolerance", "sections", "summary"]
    assert json.loads(text)["tolerance"] == {"eps_eq": 1e-9, "eps_eig": 1e-8}


def test_reals_use_shortest_round_trip_form():
    r = assemble({"s": [check_bound("a", "x", 0.1, 1.0, "TRIVIAL")]})
    assert '"residual": 0.1,' in serialize(r)
