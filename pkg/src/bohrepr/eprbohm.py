"""Spin-1/2 singlet scenario: the context (singlet, sigma_x (x) I) and its event spaces."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .beables import (
    classical_representation,
    def_membership,
    is_classical_family,
    maximality_probe,
    random_def_member,
    random_projection,
    reality_criterion_membership,
)
from .context import EventSpace, MeasurementContext, State, appropriate_mixture, validate_event_space
from .linalg import DEFAULT_TOL, dag, ket_bra, tensor_product, unitarity_residual
from .report import Section, check_bound, check_close, check_true
from .symmetry import invariant_algebra, is_definable, unique_definable_event_space

I2 = np.eye(2, dtype=np.complex128)
SIGMA = {
    "x": np.array([[0, 1], [1, 0]], dtype=np.complex128),
    "y": np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    "z": np.array([[1, 0], [0, -1]], dtype=np.complex128),
}


def _fix_phase(v):
    k = int(np.argmax(np.abs(v) > 1e-12))
    return v * (abs(v[k]) / v[k])


def spin_eigenvectors(axis):
    """``(|a+>, |a->)`` derived from the Pauli matrix, first nonzero entry real positive."""
    w, v = np.linalg.eigh(SIGMA[axis])
    minus, plus = v[:, 0], v[:, 1]
    assert w[0] < 0 < w[1]
    return _fix_phase(plus), _fix_phase(minus)


@dataclass
class SpinScenario:
    singlet: State
    vectors: dict
    observables: dict
    projections: dict
    event_spaces: dict
    eigenbases: dict
    tol: object

    def context(self, observable="sx1"):
        return MeasurementContext(self.singlet, self.observables[observable], self.tol)

    def P(self, first, second=None):
        """``P_first (x) P_second``; labels like ``"xp"``, ``None`` meaning identity."""
        a = I2 if first is None else self.projections[first]
        b = I2 if second is None else self.projections[second]
        return tensor_product(a, b)


def build_spin_scenario(tol=DEFAULT_TOL):
    vectors = {}
    for a in "xyz":
        plus, minus = spin_eigenvectors(a)
        vectors[a + "p"], vectors[a + "m"] = plus, minus
    psi = (np.kron(vectors["xp"], vectors["xm"]) - np.kron(vectors["xm"], vectors["xp"])) / np.sqrt(2)
    observables = {}
    for a in "xyz":
        observables[f"s{a}1"] = tensor_product(SIGMA[a], I2)
        observables[f"s{a}2"] = tensor_product(I2, SIGMA[a])
    projections = {k: ket_bra(v) for k, v in vectors.items()}

    def pair(a, b):
        return np.kron(vectors[a], vectors[b])

    spaces = {
        "S_xx": EventSpace([pair("xp", "xm"), pair("xm", "xp")], tol),
        "S_xy": EventSpace([pair("xp", "yp"), pair("xp", "ym"), pair("xm", "yp"), pair("xm", "ym")], tol),
        "S_xz": EventSpace([pair("xp", "zp"), pair("xp", "zm"), pair("xm", "zp"), pair("xm", "zm")], tol),
    }
    bases = {
        name: [pair("x" + s, b + t) for s in "pm" for t in "pm"]
        for name, b in (("S_xx", "x"), ("S_xy", "y"), ("S_xz", "z"))
    }
    return SpinScenario(State(psi, tol), vectors, observables, projections, spaces, bases, tol)


def proof_symmetry(scn):
    """``U = P1 - P2`` with ``P1`` the anticorrelated and ``P2`` the correlated x-projections."""
    p1 = scn.P("xp", "xm") + scn.P("xm", "xp")
    p2 = scn.P("xp", "xp") + scn.P("xm", "xm")
    return p1 - p2, p1, p2


def xy_to_xz_symmetry(scn):
    """Context symmetry conjugating every ``P^x_s (x) P^y_t`` into ``P^x_s (x) P^z_t``.

    Built as ``P^x_+ (x) V_+ + P^x_- (x) V_-`` where ``V_s`` is a rotation about
    the x axis that fixes ``|x, -s>`` exactly (so the singlet is fixed) and
    carries ``|z, t>`` onto the ray of ``|y, t>``.
    """
    v = scn.vectors
    pr = scn.projections

    def rotation(fixed, moving):
        for theta in (np.pi / 2, -np.pi / 2):
            rot = ket_bra(v[fixed]) + np.exp(1j * theta) * ket_bra(v[moving])
            if all(np.linalg.norm(dag(rot) @ pr["y" + t] @ rot - pr["z" + t]) < 1e-12 for t in "pm"):
                return rot
        raise RuntimeError("no x-axis quarter turn maps z onto y")

    v_plus = rotation("xm", "xp")
    v_minus = rotation("xp", "xm")
    return tensor_product(pr["xp"], v_plus) + tensor_product(pr["xm"], v_minus)


def anticorrelation_check(scn):
    tol = scn.tol
    psi = scn.singlet
    out = []
    for a in "xyz":
        s1, s2 = scn.observables[f"s{a}1"], scn.observables[f"s{a}2"]
        corr = psi.expectation(s1 @ s2).real
        tot = s1 + s2
        disp = psi.expectation(tot @ tot).real - psi.expectation(tot).real ** 2
        out.append(check_close(f"anticorrelation.{a}", f"<psi, (s{a} x I)(I x s{a}) psi> = -1",
                               -1.0, corr, tol.eps_eq, "PAPER" if a != "z" else "DERIVED",
                               "strict anticorrelation of the singlet"))
        out.append(check_bound(f"dispersion.{a}", f"dispersion of s{a} x I + I x s{a} on psi vanishes",
                               abs(disp), tol.eps_eq, "DERIVED", "strict anticorrelation"))
    for a, b in (("x", "y"), ("x", "z"), ("y", "z")):
        c = psi.expectation(scn.observables[f"s{a}1"] @ scn.observables[f"s{b}2"])
        out.append(check_bound(f"uncorrelated.{a}{b}", f"<psi, (s{a} x I)(I x s{b}) psi> = 0",
                               abs(c), tol.eps_eq, "DERIVED", "orthogonal spin axes are uncorrelated"))
    return out


def sample_lattice_probes(ctx, space, count, rng):
    """Projections for extensional lattice comparisons.

    Cycles through four kinds so both decisions get exercised: members of
    ``Def(S)``, slightly rotated members, sub-projections of eigenspaces of
    ``R``, and generic random projections.
    """
    n = ctx.dim
    out = []
    for i in range(count):
        kind = i % 4
        if kind == 0:
            p = random_def_member(space, rng, n)
        elif kind == 1:
            p = random_def_member(space, rng, n)
            h = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
            h = 1e-3 * (h + dag(h))
            w, v = np.linalg.eigh(h)
            u = v @ np.diag(np.exp(1j * w)) @ dag(v)
            p = u @ p @ dag(u)
        elif kind == 2:
            eps = ctx.spectral.eigenprojections
            p = sum((random_projection(n, rng, within=e) for e in eps), np.zeros((n, n), dtype=np.complex128))
        else:
            p = random_projection(n, rng)
        out.append((p + dag(p)) / 2)
    return out


def lattice_agreement(ctx, space, count, seed):
    """Count projections on which ``L(psi, R)`` and ``Def(S)`` membership disagree."""
    rng = np.random.default_rng([int(seed), 1])
    probes = sample_lattice_probes(ctx, space, count, rng)
    disagreements = 0
    members = 0
    for p in probes:
        a = reality_criterion_membership(ctx, p).member
        b = def_membership(space, p, ctx.tol).member
        members += a
        disagreements += a != b
    return disagreements, members


def theorem1_report(scn, seed=0, samples=1000, lattice_samples=200, born_samples=100, function_samples=50):
    """Run the full spin-scenario verification and return a report section."""
    tol = scn.tol
    ctx = scn.context("sx1")
    psi = ctx.psi
    out = []
    details = {}

    out.extend(anticorrelation_check(scn))

    for name, space in scn.event_spaces.items():
        rep = validate_event_space(ctx, space)
        out.append(check_true(f"event_space.{name}.appropriate", f"{name} is an appropriate event space for (psi, sx x I)",
                              True, rep.valid, "PAPER", "listing of appropriate event spaces", rep.residuals))
        details[f"validation.{name}"] = rep.as_dict()

    mix = appropriate_mixture(ctx, scn.eigenbases["S_xx"])
    out.append(check_close("mixture.S_xx.weights", "appropriate-mixture weights on S_xx are (1/2, 1/2)",
                           [0.5, 0.5], list(mix.weights), tol.eps_eq, "DERIVED", "singlet amplitudes"))

    rng = np.random.default_rng([int(seed), 2])
    worst = 0.0
    for name, space in scn.event_spaces.items():
        m = appropriate_mixture(ctx, scn.eigenbases[name])
        for _ in range(function_samples):
            f = ctx.spectral.apply(rng.standard_normal(len(ctx.spectral)))
            worst = max(worst, abs(m.expectation(f) - ctx.state.expectation(f)))
    out.append(check_bound("mixture.born_statistics", "mixtures of all three event spaces reproduce Born statistics of functions of R",
                           worst, 10 * tol.eps_eq, "DERIVED", "appropriate mixtures reproduce the distribution of R"))

    inv = invariant_algebra(ctx)
    details["invariant_algebra_dim"] = len(inv)
    for name, expected in (("S_xx", True), ("S_xy", False), ("S_xz", False)):
        res = is_definable(ctx, scn.event_spaces[name], inv)
        out.append(check_true(f"definable.{name}", f"{name} is definable in terms of psi and sx x I", expected,
                              res.definable, "PAPER", "uniqueness of the definable event space",
                              res.witness_residual if not res.definable else res.residual))
        details[f"definability.{name}"] = res.as_dict()

    unique = unique_definable_event_space(ctx)
    out.append(check_true("unique_definable_equals_S_xx", "unique definable event space equals S_xx up to phase",
                          True, unique.equivalent(scn.event_spaces["S_xx"], tol), "PAPER",
                          "uniqueness of the definable event space"))

    facts = [
        ("sx1", "xp", True), ("sx1", "xm", True), ("sx1", "yp", False), ("sx1", "ym", False),
        ("sy1", "yp", True), ("sy1", "ym", True), ("sy1", "xp", False), ("sy1", "xm", False),
    ]
    for obs, label, expected in facts:
        c = scn.context(obs)
        m = reality_criterion_membership(c, scn.P(None, label))
        out.append(check_true(f"reality.{obs}.I_P{label}", f"I x P_{label} in L(psi, {obs[:2]} x I)", expected,
                              m.member, "PAPER", "reality-criterion lattice membership",
                              {"candidate": m.candidate_residual, "correlation": m.correlation_residual}))

    dis, hits = lattice_agreement(ctx, scn.event_spaces["S_xx"], lattice_samples, seed)
    out.append(check_bound("reality_equals_def.S_xx", f"L(psi, sx x I) and Def(S_xx) agree on {lattice_samples} sampled projections",
                           dis, 0.0, "PAPER", "extensional equivalence of the two lattices"))
    details["lattice_agreement"] = {"samples": lattice_samples, "disagreements": dis, "members": hits}

    s_xx = scn.event_spaces["S_xx"]
    rng = np.random.default_rng([int(seed), 3])
    probes = [random_def_member(s_xx, rng, 4) for _ in range(born_samples)]
    rep = classical_representation(ctx, s_xx, probes)
    out.append(check_bound("classical_representation.born", f"Born rule reproduced by atom valuations on {born_samples} Def(S_xx) members",
                           rep.max_residual, 10 * tol.eps_eq, "DERIVED", "psi is a mixture of dispersion-free states"))

    probe = maximality_probe(ctx, s_xx, samples, seed)
    out.append(check_bound("maximality_probe.counterexamples", f"{samples} random rank-1 projections outside Def(S_xx) break classicality",
                           len(probe.violations), 0.0, "DERIVED", "maximality of Def(S)"))
    details["maximality_probe"] = probe.as_dict()

    u, p1, p2 = proof_symmetry(scn)
    rx = ctx.observable
    out.append(check_bound("proof_symmetry.unitary", "U = P1 - P2 is unitary", unitarity_residual(u), tol.eps_eq, "TRIVIAL"))
    out.append(check_bound("proof_symmetry.fixes_psi", "U psi = psi", np.linalg.norm(u @ psi - psi), tol.eps_eq, "PAPER",
                           "the symmetry used in the uniqueness proof"))
    out.append(check_bound("proof_symmetry.commutes_R", "U* (sx x I) U = sx x I", np.linalg.norm(dag(u) @ rx @ u - rx),
                           tol.eps_eq, "PAPER", "the symmetry used in the uniqueness proof"))
    out.append(check_bound("proof_symmetry.P2_psi", "P2 psi = 0", np.linalg.norm(p2 @ psi), tol.eps_eq, "PAPER",
                           "the symmetry used in the uniqueness proof"))
    moved = dag(u) @ scn.P("xp", "yp") @ u
    out.append(check_bound("proof_symmetry.moves_S_xy", "U* (Pxp x Pyp) U = Pxp x Pym",
                           np.linalg.norm(moved - scn.P("xp", "ym")), tol.eps_eq, "DERIVED", "sx acts on the second factor within each block"))

    w = xy_to_xz_symmetry(scn)
    out.append(check_bound("xy_to_xz_symmetry.unitary", "derived witness unitary is unitary", unitarity_residual(w), tol.eps_eq, "DERIVED"))
    out.append(check_bound("xy_to_xz_symmetry.fixes_psi", "derived witness fixes psi", np.linalg.norm(w @ psi - psi), tol.eps_eq, "DERIVED"))
    out.append(check_bound("xy_to_xz_symmetry.commutes_R", "derived witness commutes with sx x I",
                           np.linalg.norm(dag(w) @ rx @ w - rx), tol.eps_eq, "DERIVED"))
    worst = max(np.linalg.norm(dag(w) @ scn.P("x" + s, "y" + t) @ w - scn.P("x" + s, "z" + t)) for s in "pm" for t in "pm")
    out.append(check_bound("xy_to_xz_symmetry.maps_S_xy_to_S_xz", "derived witness maps every Px(s) x Py(t) onto Px(s) x Pz(t)",
                           worst, tol.eps_eq, "DERIVED", "symmetry that moves S_xy"))
    cls = is_classical_family(psi, [scn.P("xp", "yp"), scn.P("xp", "zp")], "algebra", tol)
    out.append(check_true("no_joint_dispersion_free.Pxp_Pyp__Pxp_Pzp", "psi is not classical on {Pxp x Pyp, Pxp x Pzp}",
                          False, cls.classical, "PAPER", "no state is dispersion-free on a projection and its transform",
                          cls.residual))
    return Section(out, details)
