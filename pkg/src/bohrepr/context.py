"""Measurement contexts, appropriate mixtures and appropriate event spaces."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, IncompleteBasis, NotEigenbasis, NotNormalized
from .linalg import (
    DEFAULT_TOL,
    SpectralDecomposition,
    as_matrix,
    as_vector,
    ket_bra,
    spectral_decomposition,
)


class State:
    """Unit vector on a finite-dimensional Hilbert space."""

    def __init__(self, amplitudes, tol=DEFAULT_TOL):
        amps = as_vector(amplitudes, "state")
        norm = float(np.linalg.norm(amps))
        if abs(norm - 1.0) > tol.eps_eq:
            raise NotNormalized(f"state norm {norm:.6g} outside tolerance {tol.eps_eq:g}")
        self.amplitudes = amps.copy()
        self.amplitudes.setflags(write=False)

    @property
    def dim(self):
        return self.amplitudes.shape[0]

    def expectation(self, a):
        return complex(np.vdot(self.amplitudes, np.asarray(a) @ self.amplitudes))

    def projector(self):
        return ket_bra(self.amplitudes)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.amplitudes, dtype=dtype)


def _state(psi, tol):
    return psi if isinstance(psi, State) else State(psi, tol)


class MeasurementContext:
    """A pair ``(psi, R)``; the spectral decomposition of ``R`` is cached at construction."""

    def __init__(self, state, observable, tol=DEFAULT_TOL):
        self.tol = tol
        self.state = _state(state, tol)
        self.observable = as_matrix(observable, "observable")
        if self.observable.shape != (self.state.dim, self.state.dim):
            raise DimensionMismatch(
                f"observable shape {self.observable.shape} does not match state dimension {self.state.dim}"
            )
        self.spectral: SpectralDecomposition = spectral_decomposition(self.observable, tol)

    @property
    def psi(self):
        return self.state.amplitudes

    @property
    def dim(self):
        return self.state.dim

    def components(self):
        """``E_k psi`` for every eigenprojection ``E_k`` of ``R``."""
        return [e @ self.psi for e in self.spectral.eigenprojections]

    def eigenspace_of(self, vector):
        """Index of the eigenspace containing ``vector``, or ``None``."""
        v = np.asarray(vector)
        for k, e in enumerate(self.spectral.eigenprojections):
            if np.linalg.norm(e @ v - v) <= self.tol.eps_eq * (1.0 + np.linalg.norm(v)):
                return k
        return None


@dataclass(frozen=True)
class AppropriateMixture:
    weights: tuple
    vectors: tuple

    @property
    def projectors(self):
        return tuple(ket_bra(v) for v in self.vectors)

    def density(self):
        return sum(w * p for w, p in zip(self.weights, self.projectors))

    def expectation(self, a):
        a = np.asarray(a)
        return complex(sum(w * np.vdot(v, a @ v) for w, v in zip(self.weights, self.vectors)))


@dataclass(frozen=True)
class EventSpace:
    """Rank-1 projections stored as unit vectors.

    Orthogonality of the members is *not* enforced here; it is one of the
    conditions reported by :func:`validate_event_space`.
    """

    members: tuple

    def __init__(self, members, tol=DEFAULT_TOL):
        vs = []
        for i, m in enumerate(members):
            v = as_vector(m, f"event space member {i}")
            nrm = np.linalg.norm(v)
            if abs(nrm - 1.0) > tol.eps_eq:
                raise NotNormalized(f"event space member {i} has norm {nrm:.6g}")
            v = v.copy()
            v.setflags(write=False)
            vs.append(v)
        object.__setattr__(self, "members", tuple(vs))

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    @property
    def dim(self):
        return self.members[0].shape[0] if self.members else None

    @property
    def projectors(self):
        return [ket_bra(v) for v in self.members]

    def total(self, dim=None):
        """Sum of the member projections."""
        n = self.dim if dim is None else dim
        return sum((ket_bra(v) for v in self.members), np.zeros((n, n), dtype=np.complex128))

    def equivalent(self, other, tol=DEFAULT_TOL):
        """Same set of projections, up to member order and phases."""
        if len(self) != len(other):
            return False
        unmatched = list(other.members)
        for v in self.members:
            for j, w in enumerate(unmatched):
                if abs(abs(np.vdot(v, w)) - 1.0) <= tol.eps_eq * 10:
                    del unmatched[j]
                    break
            else:
                return False
        return True


def _check_eigenbasis(ctx, eigenbasis):
    tol = ctx.tol
    vs = [as_vector(v, "eigenbasis vector") for v in eigenbasis]
    for i, v in enumerate(vs):
        if v.shape[0] != ctx.dim:
            raise DimensionMismatch(f"eigenbasis vector {i} has dimension {v.shape[0]}, expected {ctx.dim}")
    r = ctx.observable
    scale = 1.0 + float(np.linalg.norm(r, 2))
    for i, v in enumerate(vs):
        nrm = np.linalg.norm(v)
        if abs(nrm - 1.0) > tol.eps_eq:
            raise NotEigenbasis(f"eigenbasis vector {i} has norm {nrm:.6g}")
        rv = r @ v
        resid = np.linalg.norm(rv - np.vdot(v, rv) * v)
        if resid > tol.eps_eq * scale:
            raise NotEigenbasis(f"vector {i} is not an eigenvector of R (residual {resid:.3e})")
    if vs:
        gram = np.array([[np.vdot(a, b) for b in vs] for a in vs])
        off = np.linalg.norm(gram - np.eye(len(vs)))
        if off > tol.eps_eq * len(vs):
            raise NotEigenbasis(f"eigenbasis vectors are not orthonormal (Gram defect {off:.3e})")
    if len(vs) < ctx.dim:
        raise IncompleteBasis(f"{len(vs)} vectors cannot span a space of dimension {ctx.dim}")
    if len(vs) > ctx.dim:
        raise NotEigenbasis(f"{len(vs)} orthonormal vectors cannot exist in dimension {ctx.dim}")
    return vs


def appropriate_mixture(ctx, eigenbasis):
    """Mixture ``W = sum lambda_i |phi_i><phi_i|`` with ``lambda_i = |<psi, phi_i>|^2``.

    Members with weight at or below ``eps_eq`` are dropped.
    """
    vs = _check_eigenbasis(ctx, eigenbasis)
    weights, kept = [], []
    for v in vs:
        w = abs(np.vdot(ctx.psi, v)) ** 2
        if w > ctx.tol.eps_eq:
            weights.append(float(w))
            kept.append(v)
    return AppropriateMixture(tuple(weights), tuple(kept))


def canonical_event_space(ctx, eigenbasis):
    """Members of the eigenbasis that are nonorthogonal to ``psi``."""
    mix = appropriate_mixture(ctx, eigenbasis)
    return EventSpace(mix.vectors, ctx.tol)


def eigenbasis_of(ctx, rng=None):
    """An orthonormal eigenbasis of ``R``; randomly rotated inside each eigenspace if ``rng`` is given."""
    out = []
    for e in ctx.spectral.eigenprojections:
        w, v = np.linalg.eigh(e)
        cols = v[:, w > 0.5]
        if rng is not None and cols.shape[1] > 1:
            m = cols.shape[1]
            z = rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))
            qmat, _ = np.linalg.qr(z)
            cols = cols @ qmat
        out.extend(cols.T)
    return out


@dataclass
class EventSpaceReport:
    eigenvectors: bool
    orthogonal: bool
    nonorthogonal: bool
    maximal: bool
    residuals: dict = field(default_factory=dict)
    failures: list = field(default_factory=list)

    @property
    def valid(self):
        return self.eigenvectors and self.orthogonal and self.nonorthogonal and self.maximal

    def as_dict(self):
        return {
            "valid": self.valid,
            "eigenvectors": self.eigenvectors,
            "orthogonal": self.orthogonal,
            "nonorthogonal": self.nonorthogonal,
            "maximal": self.maximal,
            "residuals": dict(self.residuals),
            "failures": list(self.failures),
        }


def validate_event_space(ctx, space):
    """Check the three appropriateness conditions and maximality; every failure is reported."""
    tol = ctx.tol
    members = list(space.members)
    for i, v in enumerate(members):
        if v.shape[0] != ctx.dim:
            raise DimensionMismatch(f"member {i} has dimension {v.shape[0]}, expected {ctx.dim}")
    failures = []
    residuals = {}

    r = ctx.observable
    scale = 1.0 + float(np.linalg.norm(r, 2))
    worst = 0.0
    for i, v in enumerate(members):
        rv = r @ v
        res = float(np.linalg.norm(rv - np.vdot(v, rv) * v))
        worst = max(worst, res)
        if res > tol.eps_eq * scale:
            failures.append(f"member {i} is not an eigenvector of R (residual {res:.3e})")
    residuals["eigenvector"] = worst
    eig_ok = worst <= tol.eps_eq * scale

    worst = 0.0
    for i in range(len(members)):
        for j in range(i + 1, len(members)):
            ov = abs(np.vdot(members[i], members[j]))
            worst = max(worst, float(ov))
            if ov > tol.eps_eq:
                failures.append(f"members {i} and {j} are not orthogonal (overlap {ov:.3e})")
    residuals["orthogonality"] = worst
    orth_ok = worst <= tol.eps_eq

    smallest = min((abs(np.vdot(ctx.psi, v)) ** 2 for v in members), default=1.0)
    for i, v in enumerate(members):
        w = abs(np.vdot(ctx.psi, v)) ** 2
        if w <= tol.eps_eq:
            failures.append(f"member {i} is orthogonal to psi (weight {w:.3e})")
    residuals["min_weight"] = float(smallest)
    nonorth_ok = smallest > tol.eps_eq

    worst = 0.0
    for k, e in enumerate(ctx.spectral.eigenprojections):
        inside = [v for v in members if np.linalg.norm(e @ v - v) <= tol.eps_eq * 10]
        covered = sum((ket_bra(v) for v in inside), np.zeros_like(e))
        res = float(np.linalg.norm((e - covered) @ ctx.psi))
        worst = max(worst, res)
        if res > tol.eps_eq:
            failures.append(
                f"not maximal: eigenspace {k} (value {ctx.spectral.eigenvalues[k]:.6g}) "
                f"leaves psi component {res:.3e} uncovered"
            )
    residuals["maximality"] = worst
    max_ok = worst <= tol.eps_eq

    return EventSpaceReport(eig_ok, orth_ok, nonorth_ok, max_ok, residuals, failures)
