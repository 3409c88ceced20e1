"""Symmetries of a measurement context and definability of event spaces.

A unitary is a context symmetry when it fixes ``psi`` and commutes with
``R``. Such unitaries are block diagonal over the eigenspaces ``H_k`` of
``R`` and fix each component ``psi_k = E_k psi``, so they act freely on the
complement of ``psi_k`` inside ``H_k``. Invariance under all of them is
membership in the commutant of the algebra they span, which makes
definability a finite linear-algebra test.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .context import EventSpace, validate_event_space
from .errors import ConsistencyError
from .linalg import (
    OperatorAlgebra,
    algebra_closure,
    commutant,
    dag,
    ket_bra,
)


@dataclass(frozen=True)
class SymmetryGenerators:
    unitaries: tuple
    description: tuple

    def __len__(self):
        return len(self.unitaries)


@dataclass(frozen=True)
class _Block:
    index: int
    value: float
    psi_hat: np.ndarray | None
    complement: np.ndarray  # rows: orthonormal basis of H_k minus psi_hat


def _blocks(ctx):
    tol = ctx.tol
    out = []
    for k, (r, e) in enumerate(zip(ctx.spectral.eigenvalues, ctx.spectral.eigenprojections)):
        comp_k = e @ ctx.psi
        nrm = np.linalg.norm(comp_k)
        if nrm > tol.eps_eq:
            hat = comp_k / nrm
            rest = e - ket_bra(hat)
        else:
            hat = None
            rest = e
        w, v = np.linalg.eigh((rest + dag(rest)) / 2)
        out.append(_Block(k, r, hat, v[:, w > 0.5].T))
    return out


def symmetry_generators(ctx):
    """Phase and swap unitaries on the in-block complements of the ``psi`` components.

    The generated group is a finite subgroup of the context symmetry group
    whose linear span is the same algebra, so both have the same commutant.
    """
    n = ctx.dim
    eye = np.eye(n, dtype=np.complex128)
    unitaries, notes = [], []
    for b in _blocks(ctx):
        basis = b.complement
        for j, e in enumerate(basis):
            unitaries.append(eye + (1j - 1) * ket_bra(e))
            notes.append(f"phase i on complement vector {j} of eigenspace {b.index} (value {b.value:.6g})")
        for j in range(len(basis) - 1):
            e0, e1 = basis[j], basis[j + 1]
            u = eye - ket_bra(e0) - ket_bra(e1) + ket_bra(e0, e1) + ket_bra(e1, e0)
            unitaries.append(u)
            notes.append(f"swap of complement vectors {j}<->{j + 1} in eigenspace {b.index}")
    return SymmetryGenerators(tuple(unitaries), tuple(notes))


def psi_components(ctx):
    """Normalised components ``E_k psi / ||E_k psi||`` with nonzero norm."""
    return [b.psi_hat for b in _blocks(ctx) if b.psi_hat is not None]


def closed_form_invariant_algebra(ctx):
    """Matrix units on ``span{psi_hat_k}`` plus one scalar per nonempty block complement."""
    hats = psi_components(ctx)
    mats = [ket_bra(a, b) for a in hats for b in hats]
    for b in _blocks(ctx):
        if len(b.complement):
            mats.append(b.complement.T @ b.complement.conj())
    return OperatorAlgebra.from_matrices(mats, ctx.tol, dim=ctx.dim)


def invariant_algebra(ctx, check=True):
    """Commutant of the algebra generated by the context symmetries.

    With ``check`` the numeric commutant is compared to the closed form and
    a :class:`ConsistencyError` is raised on disagreement.
    """
    gens = symmetry_generators(ctx)
    sym_alg = algebra_closure(list(gens.unitaries), ctx.tol, dim=ctx.dim)
    inv = commutant(sym_alg, ctx.tol)
    if check:
        closed = closed_form_invariant_algebra(ctx)
        if not inv.same_span(closed, ctx.tol):
            raise ConsistencyError(
                f"invariant algebra: numeric dimension {len(inv)} vs closed form {len(closed)}, "
                f"span distance {inv.span_distance(closed):.3e}"
            )
    return inv


def reflection_symmetry(ctx):
    """``2 Pi_W - I`` with ``W = span{psi_hat_k}``: identity on ``W``, minus identity off it.

    It is the product of the squared phase generators, hence a member of the
    generated group; for the singlet and ``sigma_x (x) I`` it is
    ``P1 - P2`` with ``P1`` the anticorrelated and ``P2`` the correlated
    x-projections.
    """
    hats = psi_components(ctx)
    pw = sum((ket_bra(h) for h in hats), np.zeros((ctx.dim, ctx.dim), dtype=np.complex128))
    return 2 * pw - np.eye(ctx.dim)


@dataclass(frozen=True)
class DefinabilityResult:
    definable: bool
    residual: float
    witness_member: int | None = None
    witness_symmetry: np.ndarray | None = None
    witness_residual: float = 0.0

    def __bool__(self):
        return self.definable

    def as_dict(self):
        return {
            "definable": self.definable,
            "witness_member": self.witness_member,
            "witness_symmetry": self.witness_symmetry,
            "residual": self.witness_residual if not self.definable else self.residual,
        }


def _conj_defect(u, p):
    return float(np.linalg.norm(dag(u) @ p @ u - p))


def is_definable(ctx, space, algebra=None):
    """Decide whether every member of ``space`` is invariant under all context symmetries.

    A failing member does not commute with some generator (the generators
    generate the group), so the witness search over the reflection and the
    generators always succeeds.
    """
    tol = ctx.tol
    inv = invariant_algebra(ctx) if algebra is None else algebra
    worst, bad = 0.0, None
    for i, p in enumerate(space.projectors):
        r = inv.residual(p)
        if r > worst:
            worst = r
        if bad is None and not inv.contains(p, tol):
            bad = i
    if bad is None:
        return DefinabilityResult(True, worst)
    p = space.projectors[bad]
    candidates = [reflection_symmetry(ctx)] + list(symmetry_generators(ctx).unitaries)
    for u in candidates:
        d = _conj_defect(u, p)
        if d > tol.eps_eq:
            return DefinabilityResult(False, worst, bad, u, d)
    raise ConsistencyError("member lies outside the invariant algebra but no generator moves it")


@dataclass(frozen=True)
class UniquenessCertificate:
    valid: bool
    definable: bool
    complement_atoms_orthogonal: bool
    eigen_intersections: tuple
    passed: bool


def uniqueness_certificate(ctx, space=None):
    """Enumerate the rank-1 projections of the invariant algebra that could be atoms.

    Rank-1 projections in the closed-form algebra are either onto unit
    vectors of ``W = span{psi_hat_k}`` or onto one-dimensional block
    complements. The latter are orthogonal to ``psi``; an eigenvector of
    ``R`` inside ``W`` must lie in some ``W cap H_k``, which is checked to be
    exactly ``span{psi_hat_k}``.
    """
    tol = ctx.tol
    space = unique_definable_event_space(ctx, check=False) if space is None else space
    rep = validate_event_space(ctx, space)
    defn = is_definable(ctx, space)
    comp_ok = True
    for b in _blocks(ctx):
        if len(b.complement) == 1:
            if abs(np.vdot(b.complement[0], ctx.psi)) > tol.eps_eq:
                comp_ok = False
    hats = psi_components(ctx)
    pw = sum((ket_bra(h) for h in hats), np.zeros((ctx.dim, ctx.dim), dtype=np.complex128))
    inter = []
    for b, e in zip(_blocks(ctx), ctx.spectral.eigenprojections):
        # multiplicity of eigenvalue 1 of Pi_W E_k Pi_W = dim(W cap H_k)
        w = np.linalg.eigvalsh((pw @ e @ pw + dag(pw @ e @ pw)) / 2)
        dim_int = int(np.sum(w > 1 - tol.eps_eig))
        expected = 1 if b.psi_hat is not None else 0
        inter.append((b.index, dim_int, expected))
    inter_ok = all(d == x for _, d, x in inter)
    passed = rep.valid and defn.definable and comp_ok and inter_ok
    return UniquenessCertificate(rep.valid, defn.definable, comp_ok, tuple(inter), passed)


def unique_definable_event_space(ctx, check=True):
    """``{E_k psi / ||E_k psi||}``: the only appropriate event space invariant under all context symmetries."""
    space = EventSpace(psi_components(ctx), ctx.tol)
    if check:
        cert = uniqueness_certificate(ctx, space)
        if not cert.passed:
            raise ConsistencyError(f"uniqueness certificate failed: {cert}")
    return space
