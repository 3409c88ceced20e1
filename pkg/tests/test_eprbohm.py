import numpy as np
import pytest

from bohrepr.eprbohm import (
    SIGMA,
    anticorrelation_check,
    lattice_agreement,
    spin_eigenvectors,
    theorem1_report,
    xy_to_xz_symmetry,
)
from bohrepr.report import assemble, serialize


def test_pauli_relations():
    eye = np.eye(2)
    for a in "xyz":
        assert np.allclose(SIGMA[a] @ SIGMA[a], eye)
    for a, b, c in (("x", "y", "z"), ("y", "z", "x"), ("z", "x", "y")):
        assert np.allclose(SIGMA[a] @ SIGMA[b] - SIGMA[b] @ SIGMA[a], 2j * SIGMA[c])


@pytest.mark.parametrize("axis", "xyz")
def test_spin_eigenvectors(axis):
    plus, minus = spin_eigenvectors(axis)
    assert np.allclose(SIGMA[axis] @ plus, plus)
    assert np.allclose(SIGMA[axis] @ minus, -minus)


def test_singlet_is_rotation_invariant(spin):
    # the singlet written in x-eigenvectors equals (|01> - |10>)/sqrt 2 up to phase
    oracle = np.array([0, 1, -1, 0]) / np.sqrt(2)
    assert abs(abs(np.vdot(oracle, spin.singlet.amplitudes)) - 1) < 1e-12


def test_anticorrelations(spin):
    checks = {a.id: a for a in anticorrelation_check(spin)}
    for axis in "xyz":
        a = checks[f"anticorrelation.{axis}"]
        assert a.passed and a.residual <= 1e-9
    assert checks["anticorrelation.x"].provenance == "PAPER"
    assert checks["anticorrelation.z"].provenance == "DERIVED"
    assert all(a.passed for a in checks.values())


def test_xy_to_xz_witness(spin):
    w = xy_to_xz_symmetry(spin)
    psi = spin.singlet.amplitudes
    assert np.allclose(w.conj().T @ w, np.eye(4))
    assert np.allclose(w @ psi, psi)
    r = spin.observables["sx1"]
    assert np.allclose(w @ r, r @ w)
    for s in "pm":
        for t in "pm":
            moved = w.conj().T @ spin.P("x" + s, "y" + t) @ w
            assert np.allclose(moved, spin.P("x" + s, "z" + t))


def test_lattice_agreement_exercises_both_outcomes(ctx_x, spin):
    dis, members = lattice_agreement(ctx_x, spin.event_spaces["S_xx"], 80, seed=4)
    assert dis == 0
    assert 0 < members < 80


def test_theorem1_report_all_pass(spin):
    sec = theorem1_report(spin, seed=0, samples=200, lattice_samples=40, born_samples=20, function_samples=10)
    failed = [a.id for a in sec.assertions if not a.passed]
    assert failed == []
    ids = {a.id for a in sec.assertions}
    for needed in ("unique_definable_equals_S_xx", "definable.S_xy", "definable.S_xz",
                   "reality_equals_def.S_xx", "maximality_probe.counterexamples"):
        assert needed in ids
    assert sec.details["invariant_algebra_dim"] == 6
    report = assemble({"spin_epr": sec})
    assert report.summary["failed"] == 0
    assert serialize(report).endswith("\n")
