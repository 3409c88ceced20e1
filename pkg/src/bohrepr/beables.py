"""Definite-property structures of a measurement context.

``Def(S)`` is the set of projections that, for every atom ``Q`` of the
event space ``S``, either contain ``Q`` or annihilate it. ``L(psi, R)``
is the reality-criterion lattice: projections that commute with every
spectral projection of ``R`` on ``psi`` and agree on ``psi`` with some
sum of eigenprojections of ``R``.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from . import _kernels
from .errors import DimensionMismatch, NotMember, NotProjection
from .linalg import (
    DEFAULT_TOL,
    OperatorAlgebra,
    algebra_closure,
    as_matrix,
    dag,
    ket_bra,
    null_space,
    orthonormal_rows,
    projection_residual,
)

PROBE_CHUNK = 100


# --------------------------------------------------------------------------
# random projections and lattice operations
# --------------------------------------------------------------------------


def random_unit_vector(n, rng):
    z = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return z / np.linalg.norm(z)


def random_projection(n, rng, rank=None, within=None):
    """Projection onto a random subspace (QR of complex Gaussian columns).

    ``within`` restricts the subspace to the range of the given projection.
    """
    if within is not None:
        w, v = np.linalg.eigh(within)
        host = v[:, w > 0.5]
    else:
        host = np.eye(n, dtype=np.complex128)
    m = host.shape[1]
    if rank is None:
        rank = int(rng.integers(0, m + 1))
    if rank == 0:
        return np.zeros((n, n), dtype=np.complex128)
    z = rng.standard_normal((m, rank)) + 1j * rng.standard_normal((m, rank))
    q, _ = np.linalg.qr(z)
    cols = host @ q
    return cols @ cols.conj().T


def meet(p, q, tol=DEFAULT_TOL):
    """Projection onto the intersection of the ranges of ``p`` and ``q``."""
    n = p.shape[0]
    eye = np.eye(n)
    cols = null_space(np.vstack([eye - p, eye - q]), tol.eps_eig)
    return cols @ cols.conj().T


def join(p, q, tol=DEFAULT_TOL):
    eye = np.eye(p.shape[0])
    return eye - meet(eye - p, eye - q, tol)


def _check_projection(p, tol, name="P"):
    p = as_matrix(p, name)
    res = projection_residual(p)
    if res > tol.eps_eq:
        raise NotProjection(f"{name} is not an orthogonal projection (residual {res:.3e})")
    return p


# --------------------------------------------------------------------------
# Def(S)
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class DefMembership:
    member: bool
    residual: float
    witness_index: int | None = None

    def __bool__(self):
        return self.member


def _atom_relations(space, p):
    """Per atom: (||P phi - phi||, ||P phi||)."""
    out = []
    for v in space.members:
        pv = p @ v
        out.append((float(np.linalg.norm(pv - v)), float(np.linalg.norm(pv))))
    return out


def def_membership(space, p, tol=DEFAULT_TOL):
    """Decide ``P in Def(S)``; the residual is the worst per-atom ``min(||QP - Q||, ||QP||)``."""
    p = _check_projection(p, tol)
    if space.dim is not None and space.dim != p.shape[0]:
        raise DimensionMismatch("event space and projection dimensions differ")
    worst, witness = 0.0, None
    for i, (below, orth) in enumerate(_atom_relations(space, p)):
        r = min(below, orth)
        if r > worst:
            worst = r
        if r > tol.eps_eq and witness is None:
            witness = i
    return DefMembership(witness is None, worst, witness)


def def_decompose(space, p, tol=DEFAULT_TOL):
    """Split ``P in Def(S)`` as ``sum_{i in T} Q_i + P0`` with ``P0 <= I - sum S``."""
    p = _check_projection(p, tol)
    m = def_membership(space, p, tol)
    if not m.member:
        raise NotMember(f"projection is not in Def(S): atom {m.witness_index} violates (residual {m.residual:.3e})")
    atoms = []
    for i, (below, orth) in enumerate(_atom_relations(space, p)):
        if below <= tol.eps_eq and below <= orth:
            atoms.append(i)
    p0 = p - sum((ket_bra(space.members[i]) for i in atoms), np.zeros_like(p))
    return tuple(atoms), p0


def def_algebra_basis(space, dim=None):
    """Spanning set of the algebra generated by ``Def(S)``.

    That algebra is ``span{Q_i}`` plus all operators on the range of
    ``I - sum S``; the matrix units of the latter are returned explicitly.
    """
    n = space.dim if dim is None else dim
    mats = [ket_bra(v) for v in space.members]
    comp = np.eye(n) - space.total(n)
    w, v = np.linalg.eigh(comp)
    cvecs = v[:, w > 0.5].T
    for a in cvecs:
        for b in cvecs:
            mats.append(ket_bra(a, b))
    return mats


def random_def_member(space, rng, dim=None):
    """Random projection in ``Def(S)``: random atom subset plus a random subspace below ``I - sum S``."""
    n = space.dim if dim is None else dim
    pick = rng.random(len(space)) < 0.5
    p = sum((ket_bra(v) for v, k in zip(space.members, pick) if k), np.zeros((n, n), dtype=np.complex128))
    comp = np.eye(n) - space.total(n)
    if np.trace(comp).real > 0.5:
        p = p + random_projection(n, rng, within=comp)
    return p


# --------------------------------------------------------------------------
# classical representation of psi on Def(S)
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Valuation:
    """Dispersion-free valuation on ``Def(S)`` concentrated on one atom."""

    atom_index: int
    assignments: dict

    def __call__(self, key):
        return self.assignments[key]


@dataclass(frozen=True)
class ClassicalRepresentation:
    weights: tuple
    valuations: tuple
    born: tuple
    classical: tuple
    max_residual: float

    def probability(self, probe_index):
        return sum(w * v(probe_index) for w, v in zip(self.weights, self.valuations))


def classical_representation(ctx, space, probes):
    """Represent ``psi`` as a mixture of the atom valuations and compare with the Born rule.

    Valuation ``v_i`` is true on a probe ``P`` iff ``Q_i <= P``; the
    representation stores, per probe, the Born value ``<psi, P psi>`` and the
    classical value ``sum_i lambda_i v_i(P)``.
    """
    tol = ctx.tol
    probes = [_check_projection(p, tol, "probe") for p in probes]
    for i, p in enumerate(probes):
        m = def_membership(space, p, tol)
        if not m.member:
            raise NotMember(f"probe {i} is not in Def(S) (atom {m.witness_index})")
    weights = tuple(float(abs(np.vdot(ctx.psi, v)) ** 2) for v in space.members)
    valuations = []
    for i, v in enumerate(space.members):
        assign = {j: bool(np.linalg.norm(p @ v - v) <= tol.eps_eq) for j, p in enumerate(probes)}
        valuations.append(Valuation(i, assign))
    born, classical = [], []
    for j, p in enumerate(probes):
        born.append(float(np.vdot(ctx.psi, p @ ctx.psi).real))
        classical.append(float(sum(w for w, val in zip(weights, valuations) if val(j))))
    worst = max((abs(a - b) for a, b in zip(born, classical)), default=0.0)
    return ClassicalRepresentation(weights, tuple(valuations), tuple(born), tuple(classical), float(worst))


# --------------------------------------------------------------------------
# classicality of operator families on a state
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ClassicalityResult:
    classical: bool
    residual: float
    pair: tuple | None
    mode: str
    size: int
    matrices: tuple | None = None

    def __bool__(self):
        return self.classical


def _pairwise(psi, mats, tol, mode):
    mats = np.asarray(mats, dtype=np.complex128)
    if len(mats) < 2:
        return ClassicalityResult(True, 0.0, None, mode, len(mats))
    res = _kernels.pair_commutator_residuals(mats, psi)
    i, j = np.unravel_index(int(np.argmax(res)), res.shape)
    worst = float(res[i, j])
    if worst <= tol.eps_eq:
        return ClassicalityResult(True, worst, None, mode, len(mats))
    a, b = (int(i), int(j)) if i < j else (int(j), int(i))
    return ClassicalityResult(False, worst, (a, b), mode, len(mats), (mats[a], mats[b]))


def krylov_subspace(psi, letters, tol=DEFAULT_TOL):
    """Orthonormal columns spanning the cyclic subspace generated from ``psi``."""
    basis = orthonormal_rows(np.asarray(psi)[None], tol.eps_eig)
    frontier = basis
    while frontier.shape[0]:
        cands = np.concatenate([frontier @ np.asarray(g).T for g in letters]) if letters else frontier[:0]
        if cands.shape[0] == 0:
            break
        r = cands - (cands @ basis.conj().T) @ basis
        r = r - (r @ basis.conj().T) @ basis
        norms = np.linalg.norm(cands, axis=1)
        r = r / np.maximum(norms, 1e-300)[:, None]
        new = orthonormal_rows(r, tol.eps_eig) if np.max(np.linalg.norm(r, axis=1)) > tol.eps_eig else r[:0]
        if new.shape[0]:
            new = new - (new @ basis.conj().T) @ basis
            new = orthonormal_rows(new, tol.eps_eig)
        basis = np.vstack([basis, new])
        frontier = new
    return basis.T


def _cyclic(psi, mats, tol):
    """Classicality through the cyclic subspace ``K = [B psi]``.

    ``psi`` is classical on the generated algebra iff the generators and
    their adjoints pairwise commute on ``K``.
    """
    letters = list(mats) + [dag(m) for m in mats]
    k = krylov_subspace(psi, letters, tol)
    norms = [float(np.linalg.norm(a)) for a in letters]
    worst, pair = 0.0, None
    for i, j in combinations(range(len(letters)), 2):
        a, b = letters[i], letters[j]
        r = float(np.linalg.norm((a @ b - b @ a) @ k))
        scale = 1.0 + norms[i] * norms[j]
        if r / scale > worst:
            worst, pair = r / scale, (i, j)
    if worst <= tol.eps_eq:
        return ClassicalityResult(True, worst, None, "cyclic", len(letters))
    return ClassicalityResult(False, worst, pair, "cyclic", len(letters), (letters[pair[0]], letters[pair[1]]))


def is_classical_family(psi, ops, mode="algebra", tol=DEFAULT_TOL):
    """Decide whether ``psi`` is a mixture of dispersion-free states on ``ops``.

    ``pairwise`` checks ``||[A, B] psi||`` on the given operators only;
    ``algebra`` closes them into a *-algebra first and checks all basis
    pairs; ``cyclic`` decides the algebra question without the closure via
    the cyclic subspace of ``psi``. On failure the offending pair is
    returned (indices into the operator list, the closure basis, or the
    generator-plus-adjoint list respectively).
    """
    psi = np.asarray(psi.amplitudes if hasattr(psi, "amplitudes") else psi, dtype=np.complex128)
    mats = [as_matrix(a, "operator") for a in ops]
    for a in mats:
        if a.shape != (psi.shape[0], psi.shape[0]):
            raise DimensionMismatch(f"operator shape {a.shape} does not match state dimension {psi.shape[0]}")
    if mode == "pairwise":
        return _pairwise(psi, mats, tol, mode)
    if mode == "algebra":
        alg = algebra_closure(mats, tol, dim=psi.shape[0])
        return _pairwise(psi, alg.basis, tol, mode)
    if mode == "cyclic":
        return _cyclic(psi, mats, tol)
    raise ValueError(f"unknown classicality mode {mode!r}")


# --------------------------------------------------------------------------
# L(psi, R)
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class RealityMembership:
    member: bool
    candidate_residual: float
    correlation_residual: float
    partner_indices: tuple
    partner: np.ndarray = field(repr=False)

    def __bool__(self):
        return self.member


def reality_criterion_membership(ctx, p):
    """Decide ``P in L(psi, R)``.

    Candidacy: ``||[P, E_r] psi|| <= eps_eq`` for every eigenprojection.
    Correlation: some sum ``P'`` of eigenprojections has ``P' psi = P psi``.
    The vectors ``E_r psi`` are mutually orthogonal, so the distance
    ``||P' psi - P psi||`` splits over eigenspaces and the best ``P'`` out
    of all ``2^k`` sums is chosen eigenspace by eigenspace.
    """
    tol = ctx.tol
    p = _check_projection(p, tol)
    if p.shape[0] != ctx.dim:
        raise DimensionMismatch("projection dimension does not match the context")
    psi = ctx.psi
    eps = ctx.spectral.eigenprojections
    cand = max(float(np.linalg.norm((p @ e - e @ p) @ psi)) for e in eps)
    ppsi = p @ psi
    chosen = []
    for r, e in enumerate(eps):
        part = e @ ppsi
        if np.linalg.norm(e @ psi - part) < np.linalg.norm(part):
            chosen.append(r)
    partner = sum((eps[r] for r in chosen), np.zeros_like(p))
    corr = float(np.linalg.norm(partner @ psi - ppsi))
    member = cand <= tol.eps_eq and corr <= tol.eps_eq
    return RealityMembership(member, cand, corr, tuple(chosen), partner)


# --------------------------------------------------------------------------
# randomized maximality probe for Def(S)
# --------------------------------------------------------------------------


@dataclass
class ProbeReport:
    samples: int
    members_hit: int
    violations: list
    seed: int

    def as_dict(self):
        return {
            "samples": self.samples,
            "members_hit": self.members_hit,
            "violations": list(self.violations),
            "seed": self.seed,
        }


def chunk_rng(seed, index):
    """Generator for sample range ``index``; independent of how ranges are spread over workers."""
    return np.random.default_rng([int(seed), int(index)])


def _probe_chunk(ctx, space, def_mats, seed, index, count):
    tol = ctx.tol
    rng = chunk_rng(seed, index)
    hits, violations = 0, []
    for _ in range(count):
        v = random_unit_vector(ctx.dim, rng)
        p = ket_bra(v)
        if def_membership(space, p, tol).member:
            hits += 1
            continue
        res = is_classical_family(ctx.psi, def_mats + [p], "algebra", tol)
        if res.classical:
            violations.append({"projection": p, "commutator_residual": res.residual})
    return hits, violations


def maximality_probe(ctx, space, samples=1000, seed=0, workers=1):
    """Adjoin random rank-1 projections to ``Def(S)`` and confirm classicality breaks.

    Every sampled projection outside ``Def(S)`` must make the generated
    algebra non-classical on ``psi``; any that does not is a violation.
    """
    def_mats = def_algebra_basis(space, ctx.dim)
    counts = [min(PROBE_CHUNK, samples - s) for s in range(0, samples, PROBE_CHUNK)]
    jobs = [(ctx, space, def_mats, seed, i, c) for i, c in enumerate(counts)]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda a: _probe_chunk(*a), jobs))
    else:
        results = [_probe_chunk(*a) for a in jobs]
    hits = sum(h for h, _ in results)
    violations = [v for _, vs in results for v in vs]
    return ProbeReport(samples, hits, violations, seed)


def def_algebra(space, dim=None, tol=DEFAULT_TOL):
    return OperatorAlgebra.from_matrices(def_algebra_basis(space, dim), tol, dim=dim or space.dim)
