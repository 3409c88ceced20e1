"""Finite-dimensional analog of the position-momentum EPR model.

The exponentiated position and momentum groups are replaced by the clock
``U(a) = Z^a`` and shift ``V(b) = X^b`` operators on ``C^d`` with
``a, b`` in ``Z_d``; ``U(a) V(b) = w^(ab) V(b) U(a)`` with ``w = exp(2 pi i / d)``.
The EPR analog state ``Omega`` on ``C^d (x) C^d`` has sharp value
``w^(a lambda)`` on ``U(a) (x) U(-a)`` (relative position) and
``w^(b mu)`` on ``V(b) (x) V(b)`` (total momentum).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .beables import is_classical_family, random_unit_vector
from .errors import BadDimension, ConsistencyError, NotClassical
from .linalg import (
    DEFAULT_TOL,
    OperatorAlgebra,
    algebra_closure,
    commutant,
    ket_bra,
    null_space,
    orthonormal_rows,
    tensor_product,
)
from .report import Section, check_bound, check_close, check_true


class WeylSystem:
    def __init__(self, d):
        d = int(d)
        if d < 2:
            raise BadDimension(f"qudit dimension must be at least 2, got {d}")
        self.d = d
        self.omega = self.root(1)
        self.clock = np.diag([self.root(j) for j in range(d)])
        self.shift = np.zeros((d, d), dtype=np.complex128)
        for j in range(d):
            self.shift[(j + 1) % d, j] = 1.0
        self.identity = np.eye(d, dtype=np.complex128)

    def root(self, k):
        """``w^k`` with the exponent reduced mod ``d`` (exact for k = 0)."""
        k = int(k) % self.d
        return complex(np.exp(2j * np.pi * k / self.d)) if k else 1.0 + 0j

    def U(self, a):
        return np.diag([self.root(a * j) for j in range(self.d)])

    def V(self, b):
        b = int(b) % self.d
        m = np.zeros((self.d, self.d), dtype=np.complex128)
        for j in range(self.d):
            m[(j + b) % self.d, j] = 1.0
        return m

    def weyl_defect(self):
        """Largest entrywise defect of ``U(a) V(b) = w^(ab) V(b) U(a)`` over ``Z_d^2``."""
        worst = 0.0
        for a in range(self.d):
            for b in range(self.d):
                lhs = self.U(a) @ self.V(b)
                rhs = self.root(a * b) * self.V(b) @ self.U(a)
                worst = max(worst, float(np.max(np.abs(lhs - rhs))))
        return worst

    def Q1(self):
        return [tensor_product(self.U(a), self.identity) for a in range(self.d)]

    def Q2(self):
        return [tensor_product(self.identity, self.U(a)) for a in range(self.d)]

    def P2(self):
        return [tensor_product(self.identity, self.V(b)) for b in range(self.d)]


def build_weyl_system(d):
    return WeylSystem(d)


@dataclass(frozen=True)
class EprAnalogState:
    d: int
    lam: int
    mu: int
    amplitudes: np.ndarray
    joint_eigenspace_dim: int

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.amplitudes, dtype=dtype)


def joint_eigenspace(sys, lam, mu, tol=DEFAULT_TOL):
    """Orthonormal columns of the joint eigenspace for the relative-position and total-momentum labels."""
    n = sys.d ** 2
    blocks = []
    for a in range(sys.d):
        blocks.append(tensor_product(sys.U(a), sys.U(-a)) - sys.root(a * lam) * np.eye(n))
    for b in range(sys.d):
        blocks.append(tensor_product(sys.V(b), sys.V(b)) - sys.root(b * mu) * np.eye(n))
    return null_space(np.vstack(blocks), tol.eps_eig)


def epr_analog_state(sys, lam, mu, tol=DEFAULT_TOL):
    """``Omega = (V(lambda) (x) U(-mu)) sum_j |j>|j> / sqrt(d)``.

    Amplitude ``w^(-k mu) / sqrt(d)`` sits on ``|k + lambda>|k>``. Uniqueness
    is checked by the dimension of the joint eigenspace.
    """
    lam, mu = int(lam) % sys.d, int(mu) % sys.d
    phi = sum(np.kron(e, e) for e in np.eye(sys.d)) / np.sqrt(sys.d)
    omega = tensor_product(sys.V(lam), sys.U(-mu)) @ phi
    space = joint_eigenspace(sys, lam, mu, tol)
    if space.shape[1] != 1:
        raise ConsistencyError(f"joint eigenspace has dimension {space.shape[1]}, expected 1")
    overlap = abs(np.vdot(space[:, 0], omega))
    if abs(overlap - 1) > tol.eps_eq:
        raise ConsistencyError(f"constructed state is not the joint eigenvector (overlap {overlap:.3e})")
    return EprAnalogState(sys.d, lam, mu, omega, space.shape[1])


def epr_state_defect(sys, state):
    """Largest residual of the sharp-value equations over all ``a, b`` in ``Z_d``."""
    om = state.amplitudes
    worst = 0.0
    for a in range(sys.d):
        r = tensor_product(sys.U(a), sys.U(-a)) @ om - sys.root(a * state.lam) * om
        worst = max(worst, float(np.linalg.norm(r)))
    for b in range(sys.d):
        r = tensor_product(sys.V(b), sys.V(b)) @ om - sys.root(b * state.mu) * om
        worst = max(worst, float(np.linalg.norm(r)))
    return worst


def f_generators(sys):
    return [tensor_product(sys.U(a), sys.U(b)) for a in range(sys.d) for b in range(sys.d)]


@dataclass(frozen=True)
class FAlgebra:
    algebra: OperatorAlgebra
    commutant: OperatorAlgebra
    abelian: bool
    maximal_abelian: bool
    span_distance: float


def f_algebra(sys, tol=DEFAULT_TOL, check=True):
    """``span{U(a) (x) U(b)}`` with its maximal-abelian check ``F' = F``."""
    alg = OperatorAlgebra.from_matrices(f_generators(sys), tol)
    comm = commutant(alg, tol)
    abelian = alg.is_abelian(tol)
    maximal = abelian and alg.same_span(comm, tol)
    dist = alg.span_distance(comm) if len(alg) == len(comm) else float("inf")
    if check and not maximal:
        raise ConsistencyError(f"F is not maximal abelian: |F| = {len(alg)}, |F'| = {len(comm)}")
    return FAlgebra(alg, comm, abelian, maximal, dist)


@dataclass(frozen=True)
class FOmega:
    projection: np.ndarray
    cyclic_rank: int
    algebra: OperatorAlgebra
    classical: object

    def contains(self, x, tol=DEFAULT_TOL):
        return self.algebra.contains(x, tol)


def cyclic_projection(sys, state, tol=DEFAULT_TOL):
    vecs = np.stack([g @ state.amplitudes for g in f_generators(sys)])
    basis = orthonormal_rows(vecs, tol.eps_eig)
    return basis.T @ basis.conj(), basis


def f_omega_construction(sys, state, tol=DEFAULT_TOL, check=True):
    """``F^Omega = (I - P) B(H) (I - P) + F'' P`` with ``P`` onto ``[F Omega]``.

    ``F'' = F`` because ``F`` is maximal abelian.
    """
    n = sys.d ** 2
    p, basis = cyclic_projection(sys, state, tol)
    rank = basis.shape[0]
    w, v = np.linalg.eigh(np.eye(n) - p)
    off = v[:, w > 0.5].T
    mats = [ket_bra(a, b) for a in off for b in off]
    mats += [g @ p for g in f_generators(sys)]
    alg = OperatorAlgebra.from_matrices(mats, tol, dim=n)
    classical = None
    if check:
        classical = is_classical_family(state.amplitudes, alg.basis, "pairwise", tol)
        if not classical.classical:
            raise ConsistencyError(f"F^Omega is not classical on Omega (residual {classical.residual:.3e})")
        for g in sys.Q1() + sys.Q2():
            if not alg.contains(g, tol):
                raise ConsistencyError("Q1 or Q2 is not contained in F^Omega")
    return FOmega(p, rank, alg, classical)


@dataclass
class ContainmentReport:
    basis_size: int
    max_residual: float
    trials: int
    inside_trials: int
    outside_trials: int
    violations: list

    @property
    def contained(self):
        return not self.violations


def _random_f_element(gens, rng):
    c = rng.standard_normal(len(gens)) + 1j * rng.standard_normal(len(gens))
    return np.tensordot(c, gens, axes=1)


def containment_check(sys, state, b_generators=(), trials=0, seed=0, tol=DEFAULT_TOL, fomega=None, include_q2=True):
    """Check that an Omega-classical algebra containing ``F`` lies inside ``F^Omega``.

    ``b_generators`` are closed together with ``Q1`` and ``Q2`` (which
    generate ``F``). A non-classical closure is a premise failure and raises
    :class:`NotClassical`. With ``include_q2=False`` only ``Q1`` is added;
    the containment then need not hold (``Q1`` plus ``I (x) V(1)`` is
    abelian, hence classical, but lies outside ``F^Omega``) and failures
    are reported as ``base`` violations.

    Trials extend the generators by one random element each. Even-numbered
    trials draw it from ``F^Omega`` (random ``F`` element plus
    ``(I - P) X (I - P)``) and expect a classical, contained extension;
    odd-numbered trials add a generic perturbation outside ``F^Omega`` and
    expect classicality to break. Trial classicality is decided through the
    cyclic subspace of ``Omega``.
    """
    fo = f_omega_construction(sys, state, tol) if fomega is None else fomega
    om = state.amplitudes
    n = sys.d ** 2
    gens = [np.asarray(g, dtype=np.complex128) for g in b_generators]
    base = gens + [tensor_product(sys.U(1), sys.identity)]
    if include_q2:
        base.append(tensor_product(sys.identity, sys.U(1)))
    alg = algebra_closure(base, tol, dim=n)
    cls = is_classical_family(om, alg.basis, "pairwise", tol)
    if not cls.classical:
        raise NotClassical(f"candidate algebra is not classical on Omega (residual {cls.residual:.3e})")
    worst = fo.algebra.max_residual(alg.basis)
    violations = []
    if worst > tol.eps_eq * (1 + np.sqrt(n)):
        violations.append({"trial": None, "kind": "base", "residual": worst})

    rng = np.random.default_rng([int(seed), 5])
    q = np.eye(n) - fo.projection
    fgens = np.stack(f_generators(sys))
    inside = outside = 0
    for t in range(trials):
        x = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        y = _random_f_element(fgens, rng) + q @ x @ q
        if t % 2:
            outside += 1
            z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
            y = y + z
        else:
            inside += 1
        res = is_classical_family(om, base + [y], "cyclic", tol)
        member_res = fo.algebra.residual(y)
        in_fomega = member_res <= tol.eps_eq * (1 + np.linalg.norm(y))
        if res.classical and not in_fomega:
            violations.append({"trial": t, "kind": "classical_outside", "residual": member_res})
        elif not (t % 2) and not (res.classical and in_fomega):
            violations.append({"trial": t, "kind": "inside_rejected", "residual": res.residual})
    return ContainmentReport(len(alg), worst, trials, inside, outside, violations)


@dataclass
class DispersionScan:
    d: int
    exact_ok: bool
    clock_eigenspace_dims: tuple
    shift_dispersions: tuple
    samples: int
    joint_hits: int
    min_max_dispersion: float
    seed: int


def dispersion_table(sys, states):
    ops = np.stack([sys.U(a) for a in range(sys.d)] + [sys.V(b) for b in range(sys.d)])
    return _kernels.dispersions(np.atleast_2d(states), ops)


def joint_dispersion_scan(sys, samples=1000, seed=0, tol=DEFAULT_TOL):
    """No state is dispersion-free on both the clock and the shift family.

    Exact part: the states dispersion-free on every ``U(a)`` are the joint
    eigenvectors of the clock, i.e. the basis states ``|j>`` (each clock
    eigenspace is one-dimensional), and each has dispersion 1 on ``V(1)``.
    Random part: ``samples`` Haar-random states must each have nonzero
    dispersion on at least one family.
    """
    d = sys.d
    dims, shift_disp = [], []
    ok = True
    for j in range(d):
        ns = null_space(sys.clock - sys.root(j) * sys.identity, tol.eps_eig)
        dims.append(ns.shape[1])
        if ns.shape[1] != 1 or abs(abs(ns[j, 0]) - 1) > tol.eps_eq:
            ok = False
        basis_state = sys.identity[j]
        disp = float(dispersion_table(sys, basis_state[None])[0, d + 1])
        shift_disp.append(disp)
        if abs(disp - 1.0) > tol.eps_eq:
            ok = False
    rng = np.random.default_rng([int(seed), 7])
    states = np.stack([random_unit_vector(d, rng) for _ in range(samples)]) if samples else np.zeros((0, d))
    hits, min_max = 0, float("inf")
    if samples:
        table = dispersion_table(sys, states)
        clock_max = table[:, :d].max(axis=1)
        shift_max = table[:, d:].max(axis=1)
        joint = np.maximum(clock_max, shift_max)
        hits = int(np.sum(joint <= tol.eps_eq))
        min_max = float(joint.min())
    return DispersionScan(d, ok, tuple(dims), tuple(shift_disp), samples, hits, min_max, seed)


def zero_correlation_defect(sys, state):
    """``max |<Omega, (U(a) (x) U(b)) Omega>|`` over ``b != -a``."""
    om = state.amplitudes
    worst = 0.0
    for a in range(sys.d):
        for b in range(sys.d):
            if (a + b) % sys.d:
                worst = max(worst, abs(np.vdot(om, tensor_product(sys.U(a), sys.U(b)) @ om)))
    return float(worst)


def weyl_suite(d, lam, mu, samples=1000, trials=200, seed=0, tol=DEFAULT_TOL, falg=None):
    """All finite Weyl checks for one ``(d, lambda, mu)``; returns a report section."""
    sys = build_weyl_system(d)
    out = []
    out.append(check_bound("weyl_relation", "U(a)V(b) = w^(ab) V(b)U(a) for all a, b", sys.weyl_defect(),
                           tol.eps_eq, "TRIVIAL", "discrete Weyl relation"))
    state = epr_analog_state(sys, lam, mu, tol)
    out.append(check_bound("epr_state.sharp_values", "Omega has the sharp relative-position and total-momentum values",
                           epr_state_defect(sys, state), tol.eps_eq, "DERIVED", "sharp values of the EPR state"))
    dim = joint_eigenspace(sys, lam, mu, tol).shape[1]
    out.append(check_close("epr_state.joint_eigenspace_dim", "joint eigenspace is one-dimensional", 1, dim, 0,
                           "DERIVED", "uniqueness of the EPR state"))
    fa = f_algebra(sys, tol, check=False) if falg is None else falg
    out.append(check_true("f_algebra.maximal_abelian", "F = span{U(a) x U(b)} equals its commutant", True,
                          fa.maximal_abelian, "DERIVED", "F is maximal abelian", fa.span_distance))
    out.append(check_bound("epr_state.zero_correlations", "<Omega, (U(a) x U(b)) Omega> = 0 for b != -a",
                           zero_correlation_defect(sys, state), tol.eps_eq, "DERIVED", "vanishing off-diagonal correlations"))
    fo = f_omega_construction(sys, state, tol, check=False)
    gram = np.array([[np.vdot(g @ state.amplitudes, h @ state.amplitudes) for h in f_generators(sys)]
                     for g in f_generators(sys)])
    gram_rank = int(np.sum(np.linalg.eigvalsh(gram) > tol.eps_eig))
    out.append(check_close("f_omega.cyclic_rank", "rank of P onto [F Omega] equals the Gram-matrix rank",
                           gram_rank, fo.cyclic_rank, 0, "DERIVED", "cyclic projection"))
    out.append(check_bound("f_omega.P_Omega", "P Omega = Omega",
                           np.linalg.norm(fo.projection @ state.amplitudes - state.amplitudes), tol.eps_eq, "TRIVIAL"))
    out.append(check_bound("f_omega.contains_Q1", "Q1 is contained in F^Omega", fo.algebra.max_residual(sys.Q1()),
                           tol.eps_eq * (1 + d), "PAPER", "Q1 is contained in the classical algebra"))
    out.append(check_bound("f_omega.contains_Q2", "Q2 is contained in F^Omega", fo.algebra.max_residual(sys.Q2()),
                           tol.eps_eq * (1 + d), "PAPER", "Q2 is contained in the classical algebra"))
    cls = is_classical_family(state.amplitudes, fo.algebra.basis, "pairwise", tol)
    out.append(check_bound("f_omega.classical", "F^Omega is classical on Omega (all basis pairs)", cls.residual,
                           tol.eps_eq, "DERIVED", "classicality of F^Omega"))
    cont = containment_check(sys, state, (), trials, seed, tol, fomega=fo)
    out.append(check_bound("containment.violations", f"{trials} containment trials without violation",
                           len(cont.violations), 0, "DERIVED", "every classical algebra containing F lies in F^Omega"))
    try:
        containment_check(sys, state, [tensor_product(sys.identity, sys.V(1))], 0, seed, tol, fomega=fo)
        rejected = False
    except NotClassical:
        rejected = True
    out.append(check_true("containment.rejects_momentum_clash", "adding I x V(1) to Q1, Q2 breaks classicality", True,
                          rejected, "DERIVED", "position-momentum clash on the second factor"))
    scan = joint_dispersion_scan(sys, samples, seed, tol)
    out.append(check_true("dispersion.exact_argument", "only |j> are dispersion-free on the clock family, each with V(1)-dispersion 1",
                          True, scan.exact_ok, "DERIVED", "no state is dispersion-free on both families"))
    out.append(check_bound("dispersion.random_joint_hits", f"{samples} random states: none dispersion-free on both families",
                           scan.joint_hits, 0, "DERIVED", "no state is dispersion-free on both families"))
    details = {
        "d": d,
        "lambda": state.lam,
        "mu": state.mu,
        "joint_eigenspace_dim": dim,
        "maximal_abelian": fa.maximal_abelian,
        "cyclic_rank": fo.cyclic_rank,
        "containment_trials": cont.trials,
        "violations": cont.violations,
        "f_omega_dim": len(fo.algebra),
        "dispersion_min_max": scan.min_max_dispersion,
    }
    return Section(out, details)
