"""Hot numeric kernels.

Each kernel exists twice: a numba ``@njit`` version and a pure-numpy
version with identical semantics. The module-level names dispatch to the
numba path unless ``BOHREPR_DISABLE_NUMBA`` is set to a truthy value or
numba cannot be imported. Both implementations stay importable under
``*_numba`` / ``*_numpy`` so tests and the benchmark can compare them.
"""
from __future__ import annotations

import os

import numpy as np

_FLAG = os.environ.get("BOHREPR_DISABLE_NUMBA", "").strip().lower()
_DISABLED = _FLAG in ("1", "true", "yes", "on")

try:  # pragma: no cover - import guard
    from numba import njit
except ImportError:  # pragma: no cover
    njit = None

HAVE_NUMBA = njit is not None
USE_NUMBA = HAVE_NUMBA and not _DISABLED


# --------------------------------------------------------------------------
# ||[A_i, A_j] psi|| for every pair of a stack of matrices
# --------------------------------------------------------------------------


def pair_commutator_residuals_numpy(mats, psi):
    """Return the ``(k, k)`` array of ``||(A_i A_j - A_j A_i) psi||``."""
    mats = np.ascontiguousarray(mats, dtype=np.complex128)
    psi = np.ascontiguousarray(psi, dtype=np.complex128)
    v = mats @ psi  # (k, n): A_j psi
    # w[i, j] = A_i A_j psi
    w = np.einsum("inm,jm->ijn", mats, v)
    diff = w - w.transpose(1, 0, 2)
    return np.sqrt(np.sum(np.abs(diff) ** 2, axis=2))


def _pair_commutator_residuals_impl(mats, psi):
    k, n, _ = mats.shape
    v = np.zeros((k, n), dtype=np.complex128)
    for j in range(k):
        for r in range(n):
            acc = 0j
            for c in range(n):
                acc += mats[j, r, c] * psi[c]
            v[j, r] = acc
    out = np.zeros((k, k), dtype=np.float64)
    for i in range(k):
        for j in range(i + 1, k):
            s = 0.0
            for r in range(n):
                acc = 0j
                for c in range(n):
                    acc += mats[i, r, c] * v[j, c] - mats[j, r, c] * v[i, c]
                s += acc.real * acc.real + acc.imag * acc.imag
            out[i, j] = np.sqrt(s)
            out[j, i] = out[i, j]
    return out


# --------------------------------------------------------------------------
# dispersion <A psi, A psi> - |<psi, A psi>|^2 for states x operators
# --------------------------------------------------------------------------


def dispersions_numpy(states, ops):
    """Return the ``(s, k)`` array of dispersions of ``ops`` on each state row."""
    states = np.ascontiguousarray(states, dtype=np.complex128)
    ops = np.ascontiguousarray(ops, dtype=np.complex128)
    images = np.einsum("knm,sm->skn", ops, states)
    second = np.sum(np.abs(images) ** 2, axis=2)
    first = np.einsum("sn,skn->sk", states.conj(), images)
    return np.maximum(second - np.abs(first) ** 2, 0.0)


def _dispersions_impl(states, ops):
    s_count, n = states.shape
    k = ops.shape[0]
    out = np.zeros((s_count, k), dtype=np.float64)
    for s in range(s_count):
        for q in range(k):
            second = 0.0
            first = 0j
            for r in range(n):
                acc = 0j
                for c in range(n):
                    acc += ops[q, r, c] * states[s, c]
                second += acc.real * acc.real + acc.imag * acc.imag
                first += np.conj(states[s, r]) * acc
            val = second - (first.real * first.real + first.imag * first.imag)
            out[s, q] = val if val > 0.0 else 0.0
    return out


if HAVE_NUMBA:
    _pair_commutator_residuals_jit = njit(cache=True)(_pair_commutator_residuals_impl)
    _dispersions_jit = njit(cache=True)(_dispersions_impl)

    def pair_commutator_residuals_numba(mats, psi):
        return _pair_commutator_residuals_jit(
            np.ascontiguousarray(mats, dtype=np.complex128),
            np.ascontiguousarray(psi, dtype=np.complex128),
        )

    def dispersions_numba(states, ops):
        return _dispersions_jit(
            np.ascontiguousarray(states, dtype=np.complex128),
            np.ascontiguousarray(ops, dtype=np.complex128),
        )
else:  # pragma: no cover
    pair_commutator_residuals_numba = pair_commutator_residuals_numpy
    dispersions_numba = dispersions_numpy


if USE_NUMBA:
    pair_commutator_residuals = pair_commutator_residuals_numba
    dispersions = dispersions_numba
else:
    pair_commutator_residuals = pair_commutator_residuals_numpy
    dispersions = dispersions_numpy


def backend():
    return "numba" if USE_NUMBA else "numpy"


def warmup():
    """Trigger JIT compilation so later timings exclude it."""
    if not USE_NUMBA:
        return
    m = np.eye(2, dtype=np.complex128)[None].repeat(2, axis=0)
    pair_commutator_residuals(m, np.ones(2, dtype=np.complex128))
    dispersions(np.ones((1, 2), dtype=np.complex128), m)
