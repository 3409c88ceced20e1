"""Dense complex matrix substrate.

Operator spans are handled through their row-major vectorisations scaled
by ``1/sqrt(n)``, so that the Euclidean inner product of two vectorised
matrices equals the normalised trace inner product ``Tr(A* B) / n``.
Basis matrices of an :class:`OperatorAlgebra` therefore have Frobenius
norm ``sqrt(n)`` (the identity is a unit vector).
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

import numpy as np

from .errors import ConsistencyError, DimensionMismatch, NotSelfAdjoint, NotSquare

MAX_CLOSURE_ROUNDS = 64
_SQUARE_PRODUCT_LIMIT = 256


@dataclass(frozen=True)
class TolerancePolicy:
    """Numerical thresholds.

    ``eps_eq`` bounds matrix/vector equality residuals (Frobenius or 2-norm);
    ``eps_eig`` is the eigenvalue grouping gap and the rank threshold for
    unit-normalised span and null-space decisions.
    """

    eps_eq: float = 1e-9
    eps_eig: float = 1e-8

    def __post_init__(self):
        if not (self.eps_eq > 0 and self.eps_eig > 0):
            raise ValueError("tolerances must be positive")
        if self.eps_eq > self.eps_eig:
            raise ValueError("eps_eq must not exceed eps_eig")

    @classmethod
    def from_eps_eq(cls, eps_eq):
        """Policy with the given equality threshold; ``eps_eig`` is raised to match if needed."""
        return cls(eps_eq=float(eps_eq), eps_eig=max(cls.eps_eig, float(eps_eq)))

    def as_dict(self):
        return {"eps_eq": self.eps_eq, "eps_eig": self.eps_eig}


DEFAULT_TOL = TolerancePolicy()


# --------------------------------------------------------------------------
# elementary helpers
# --------------------------------------------------------------------------


def as_matrix(x, name="matrix"):
    m = np.asarray(x, dtype=np.complex128)
    if m.ndim != 2:
        raise DimensionMismatch(f"{name} must be 2-dimensional, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name} has non-finite entries")
    return m


def as_vector(x, name="vector"):
    v = np.asarray(x, dtype=np.complex128)
    if v.ndim != 1:
        raise DimensionMismatch(f"{name} must be 1-dimensional, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{name} has non-finite entries")
    return v


def dag(a):
    return np.conj(np.swapaxes(a, -1, -2))


def self_adjoint_residual(h):
    h = np.asarray(h)
    return float(np.linalg.norm(h - dag(h)))


def projection_residual(p):
    """``max(||P - P*||, ||P^2 - P||)`` in Frobenius norm."""
    p = np.asarray(p)
    return max(self_adjoint_residual(p), float(np.linalg.norm(p @ p - p)))


def unitarity_residual(u):
    u = np.asarray(u)
    return float(np.linalg.norm(dag(u) @ u - np.eye(u.shape[0])))


def commutator(a, b):
    return a @ b - b @ a


def ket_bra(u, v=None):
    v = u if v is None else v
    return np.outer(u, np.conj(v))


def projector_onto(vectors):
    """Orthogonal projection onto the span of the given vectors (rows or list)."""
    vs = np.atleast_2d(np.asarray(vectors, dtype=np.complex128))
    if vs.size == 0:
        raise ValueError("need at least one vector")
    basis = orthonormal_rows(vs)
    return basis.T @ basis.conj()


def orthonormal_rows(vs, thr=1e-10):
    """Orthonormal basis (as rows) of the row span of ``vs``."""
    vs = np.atleast_2d(np.asarray(vs, dtype=np.complex128))
    if vs.shape[0] == 0:
        return np.zeros((0, vs.shape[1]), dtype=np.complex128)
    _, s, vh = np.linalg.svd(vs, full_matrices=False)
    scale = max(1.0, float(s[0])) if s.size else 1.0
    return vh[s > thr * scale]


def null_space(m, thr=1e-10):
    """Orthonormal columns spanning the null space of ``m``.

    Singular values ``<= thr * max(1, s_max)`` are treated as zero.
    """
    m = np.atleast_2d(np.asarray(m, dtype=np.complex128))
    if m.shape[0] == 0:
        return np.eye(m.shape[1], dtype=np.complex128)
    _, s, vh = np.linalg.svd(m, full_matrices=True)
    scale = max(1.0, float(s[0])) if s.size else 1.0
    rank = int(np.sum(s > thr * scale))
    return vh[rank:].conj().T


# --------------------------------------------------------------------------
# spectral decomposition
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class SpectralDecomposition:
    eigenvalues: tuple
    eigenprojections: tuple

    @property
    def ranks(self):
        return tuple(int(round(np.trace(e).real)) for e in self.eigenprojections)

    def reconstruct(self):
        return sum(r * e for r, e in zip(self.eigenvalues, self.eigenprojections))

    def apply(self, func):
        """Return ``f(H) = sum_r f(r) E_r`` for a callable or a sequence of values."""
        vals = [func(r) for r in self.eigenvalues] if callable(func) else list(func)
        if len(vals) != len(self.eigenvalues):
            raise DimensionMismatch("need one function value per eigenvalue")
        return sum(v * e for v, e in zip(vals, self.eigenprojections))

    def __len__(self):
        return len(self.eigenvalues)


def spectral_decomposition(h, tol=DEFAULT_TOL):
    """Distinct eigenvalues (ascending) and eigenprojections of a self-adjoint matrix.

    Sorted eigenvalues are clustered by single linkage: consecutive values
    closer than ``tol.eps_eig`` share one eigenprojection, whose eigenvalue
    is the cluster mean.
    """
    h = as_matrix(h, "observable")
    if h.shape[0] != h.shape[1]:
        raise NotSquare(f"observable must be square, got shape {h.shape}")
    res = self_adjoint_residual(h)
    if res > tol.eps_eq:
        raise NotSelfAdjoint(res)
    h = (h + dag(h)) / 2
    w, v = np.linalg.eigh(h)
    groups = [[0]]
    for i in range(1, len(w)):
        if w[i] - w[i - 1] < tol.eps_eig:
            groups[-1].append(i)
        else:
            groups.append([i])
    values, projections = [], []
    for g in groups:
        vs = v[:, g]
        values.append(float(np.mean(w[g])))
        projections.append(vs @ vs.conj().T)
    return SpectralDecomposition(tuple(values), tuple(projections))


def tensor_product(*mats):
    """Kronecker product of one or more matrices (or vectors)."""
    if not mats:
        raise ValueError("tensor_product needs at least one factor")
    return reduce(np.kron, [np.asarray(m, dtype=np.complex128) for m in mats])


def trace_inner(a, b):
    """Normalised trace inner product ``Tr(A* B) / n``."""
    a = np.asarray(a)
    return complex(np.vdot(a, np.asarray(b)) / a.shape[0])


# --------------------------------------------------------------------------
# operator spans and algebras
# --------------------------------------------------------------------------


def _vec(mats, n):
    mats = np.asarray(mats, dtype=np.complex128)
    return mats.reshape(mats.shape[0], n * n) / np.sqrt(n)


def _unvec(rows, n):
    return np.asarray(rows).reshape(-1, n, n) * np.sqrt(n)


def _extend(q, cands, thr):
    """Append to orthonormal rows ``q`` the new directions of ``cands``.

    Candidates are unit-normalised first; directions whose singular value
    after projection falls at or below ``thr`` are discarded. Returns
    ``(q_new, added_rows)``.
    """
    if cands.shape[0] == 0:
        return q, cands[:0]
    norms = np.linalg.norm(cands, axis=1)
    cands = cands[norms > 0] / norms[norms > 0, None]
    if cands.shape[0] == 0:
        return q, cands
    r = cands
    for _ in range(2):
        if q.shape[0]:
            r = r - (r @ q.conj().T) @ q
    _, s, vh = np.linalg.svd(r, full_matrices=False)
    added = vh[s > thr]
    if added.shape[0] and q.shape[0]:
        added = added - (added @ q.conj().T) @ q
        added = orthonormal_rows(added, thr=thr)
    return np.vstack([q, added]), added


class OperatorAlgebra:
    """Span of matrices, orthonormal under the normalised trace inner product.

    Instances built by :func:`algebra_closure` and :func:`commutant` are
    *-closed, identity-containing algebras; :meth:`from_matrices` builds a
    plain span and leaves closure to the caller (see :meth:`invariant_residuals`).
    """

    def __init__(self, dim, rows):
        self.dim = int(dim)
        self._rows = np.ascontiguousarray(rows, dtype=np.complex128)
        self._rows.setflags(write=False)

    @classmethod
    def from_matrices(cls, mats, tol=DEFAULT_TOL, dim=None):
        mats = [as_matrix(m, "span element") for m in mats]
        if dim is None:
            if not mats:
                raise ValueError("dimension required for an empty span")
            dim = mats[0].shape[0]
        for m in mats:
            if m.shape != (dim, dim):
                raise DimensionMismatch(f"expected {dim}x{dim}, got {m.shape}")
        q = np.zeros((0, dim * dim), dtype=np.complex128)
        if mats:
            q, _ = _extend(q, _vec(np.stack(mats), dim), tol.eps_eig)
        return cls(dim, q)

    @property
    def rows(self):
        """Orthonormal vectorised basis, shape ``(k, n*n)``."""
        return self._rows

    @property
    def basis(self):
        """Basis matrices, shape ``(k, n, n)``, each of Frobenius norm ``sqrt(n)``."""
        return _unvec(self._rows, self.dim)

    def __len__(self):
        return self._rows.shape[0]

    def __repr__(self):
        return f"OperatorAlgebra(dim={self.dim}, size={len(self)})"

    def residual(self, x):
        """Frobenius norm of ``x`` minus its projection onto the span."""
        x = np.asarray(x, dtype=np.complex128)
        v = x.reshape(-1) / np.sqrt(self.dim)
        if len(self):
            v = v - (self._rows.conj() @ v) @ self._rows
        return float(np.linalg.norm(v) * np.sqrt(self.dim))

    def contains(self, x, tol=DEFAULT_TOL):
        return self.residual(x) <= tol.eps_eq * (1.0 + float(np.linalg.norm(x)))

    def max_residual(self, mats):
        mats = list(mats)
        return max((self.residual(m) for m in mats), default=0.0)

    def issubspace(self, other, tol=DEFAULT_TOL):
        return all(other.contains(b, tol) for b in self.basis)

    def same_span(self, other, tol=DEFAULT_TOL):
        return (
            self.dim == other.dim
            and len(self) == len(other)
            and self.issubspace(other, tol)
            and other.issubspace(self, tol)
        )

    def span_distance(self, other):
        """Largest membership residual of either basis in the other span."""
        a = max((other.residual(b) for b in self.basis), default=0.0)
        b = max((self.residual(b) for b in other.basis), default=0.0)
        return max(a, b)

    def is_abelian(self, tol=DEFAULT_TOL):
        b = self.basis
        for i in range(len(b)):
            for j in range(i + 1, len(b)):
                if np.linalg.norm(commutator(b[i], b[j])) > tol.eps_eq * self.dim:
                    return False
        return True

    def invariant_residuals(self):
        """Residuals of the algebra invariants: adjoint, product and identity."""
        b = self.basis
        adj = max((self.residual(dag(x)) for x in b), default=0.0)
        prod = 0.0
        for x in b:
            for y in b:
                prod = max(prod, self.residual(x @ y) / np.sqrt(self.dim))
        ident = self.residual(np.eye(self.dim))
        return {"adjoint": adj, "product": prod, "identity": ident}


def _check_generators(generators, dim):
    mats = []
    for g in generators:
        g = as_matrix(g, "generator")
        if g.shape[0] != g.shape[1]:
            raise DimensionMismatch(f"generator must be square, got {g.shape}")
        mats.append(g)
    if dim is None:
        if not mats:
            raise ValueError("dimension required for an empty generator set")
        dim = mats[0].shape[0]
    for g in mats:
        if g.shape != (dim, dim):
            raise DimensionMismatch(f"generators have inconsistent shapes: {g.shape} vs {(dim, dim)}")
    return mats, dim


def algebra_closure(generators, tol=DEFAULT_TOL, dim=None, max_rounds=MAX_CLOSURE_ROUNDS):
    """Smallest *-closed, identity-containing span containing ``generators``.

    Works on words: the span starts at ``{I}`` plus the letters (generators
    and their adjoints) and grows by left-multiplying the most recently
    added directions by every letter; small frontiers are also multiplied
    pairwise, which doubles the word length per round.
    """
    gens, dim = _check_generators(generators, dim)
    letters = gens + [dag(g) for g in gens]
    q = np.zeros((0, dim * dim), dtype=np.complex128)
    q, _ = _extend(q, _vec(np.eye(dim)[None], dim), tol.eps_eig)
    if not letters:
        return OperatorAlgebra(dim, q)
    q, frontier = _extend(q, _vec(np.stack(letters), dim), tol.eps_eig)
    letter_stack = np.stack(letters)
    rounds = 0
    while frontier.shape[0]:
        rounds += 1
        if rounds > max_rounds:
            raise ConsistencyError(f"closure did not stabilise within {max_rounds} rounds")
        fm = _unvec(frontier, dim)
        cands = [np.einsum("aij,bjk->abik", letter_stack, fm).reshape(-1, dim, dim)]
        if fm.shape[0] ** 2 <= _SQUARE_PRODUCT_LIMIT:
            cands.append(np.einsum("aij,bjk->abik", fm, fm).reshape(-1, dim, dim))
        q, frontier = _extend(q, _vec(np.concatenate(cands), dim), tol.eps_eig)
    return OperatorAlgebra(dim, q)


def _ad_matrix(a):
    """Matrix of ``T -> A T - T A`` acting on row-major ``vec(T)``."""
    n = a.shape[0]
    eye = np.eye(n)
    return np.kron(a, eye) - np.kron(eye, a.T)


def commutant(alg, tol=DEFAULT_TOL):
    """Basis of ``{T : [T, A] = 0 for every A in alg}``.

    The null space of the stacked commutator system is found by sequential
    elimination: a fixed-seed random element of the span cuts the search
    space first, then every basis element restricts it further.
    """
    n = alg.dim
    basis = alg.basis
    if len(basis) == 0:
        return OperatorAlgebra(n, np.eye(n * n, dtype=np.complex128))
    rng = np.random.default_rng(20240917)
    coeffs = rng.standard_normal(len(basis)) + 1j * rng.standard_normal(len(basis))
    probe = np.tensordot(coeffs / np.linalg.norm(coeffs), basis, axes=1)
    cols = null_space(_ad_matrix(probe), tol.eps_eig)  # (n*n, r)
    for b in basis:
        if cols.shape[1] == 0:
            break
        ts = cols.T.reshape(-1, n, n)
        images = (b @ ts - ts @ b).reshape(-1, n * n)  # (r, n*n)
        keep = null_space(images.T, tol.eps_eig)  # (r, r')
        cols = cols @ keep
    rows = orthonormal_rows(cols.T, thr=tol.eps_eig) if cols.shape[1] else cols.T
    return OperatorAlgebra(n, rows)


def double_commutant(alg, tol=DEFAULT_TOL):
    return commutant(commutant(alg, tol), tol)
