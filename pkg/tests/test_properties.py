"""Property-based checks of the structural invariants."""
import numpy as np
from hypothesis import given
from hypothesis import strategies as st

from conftest import random_context
from bohrepr.beables import (
    def_membership,
    random_def_member,
    reality_criterion_membership,
)
from bohrepr.context import canonical_event_space, eigenbasis_of, validate_event_space
from bohrepr.eprbohm import sample_lattice_probes
from bohrepr.linalg import algebra_closure, double_commutant, spectral_decomposition
from bohrepr.report import assemble, check_bound, check_close, check_true, parse, serialize
from bohrepr.symmetry import invariant_algebra, is_definable, unique_definable_event_space
from bohrepr.weyl import WeylSystem

seeds = st.integers(0, 2 ** 32 - 1)
dims = st.integers(2, 5)


@given(seed=seeds, n=dims)
def test_spectral_reconstruction(seed, n):
    rng = np.random.default_rng(seed)
    ctx = random_context(rng, n)
    sd = spectral_decomposition(ctx.observable)
    assert np.allclose(sd.reconstruct(), ctx.observable, atol=1e-10)
    assert sum(sd.ranks) == n
    total = sum(sd.eigenprojections)
    assert np.allclose(total, np.eye(n), atol=1e-10)


@given(seed=seeds, n=dims)
def test_canonical_event_space_is_appropriate(seed, n):
    rng = np.random.default_rng(seed)
    ctx = random_context(rng, n)
    space = canonical_event_space(ctx, eigenbasis_of(ctx, rng))
    assert validate_event_space(ctx, space).valid
    weights = [abs(np.vdot(ctx.psi, m)) ** 2 for m in space.members]
    assert min(weights) > 1e-9
    assert abs(sum(weights) - 1) < 1e-9


@given(seed=seeds, n=dims)
def test_unique_space_valid_definable_and_only_one(seed, n):
    rng = np.random.default_rng(seed)
    ctx = random_context(rng, n)
    unique = unique_definable_event_space(ctx)
    inv = invariant_algebra(ctx)
    assert validate_event_space(ctx, unique).valid
    assert is_definable(ctx, unique, inv).definable
    other = canonical_event_space(ctx, eigenbasis_of(ctx, rng))
    assert is_definable(ctx, other, inv).definable == other.equivalent(unique)


@given(seed=seeds, n=dims)
def test_reality_lattice_equals_def_of_unique_space(seed, n):
    rng = np.random.default_rng(seed)
    ctx = random_context(rng, n)
    unique = unique_definable_event_space(ctx)
    for p in sample_lattice_probes(ctx, unique, 8, rng):
        assert reality_criterion_membership(ctx, p).member == def_membership(unique, p).member


@given(seed=seeds, n=dims)
def test_random_def_members_are_members(seed, n):
    rng = np.random.default_rng(seed)
    ctx = random_context(rng, n)
    unique = unique_definable_event_space(ctx)
    p = random_def_member(unique, rng, n)
    assert np.allclose(p @ p, p, atol=1e-10)
    assert def_membership(unique, p).member


def _random_generators(rng, n, k):
    gens = []
    for _ in range(k):
        g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        # random block pattern so nontrivial commutants occur
        mask = rng.random((n, n)) < 0.4
        gens.append(np.where(mask | np.eye(n, dtype=bool), g, 0))
    return gens


@given(seed=seeds, n=st.integers(1, 4), k=st.integers(0, 2))
def test_closure_idempotent_and_star_closed(seed, n, k):
    rng = np.random.default_rng(seed)
    alg = algebra_closure(_random_generators(rng, n, k), dim=n)
    assert algebra_closure(list(alg.basis), dim=n).same_span(alg)
    inv = alg.invariant_residuals()
    assert max(inv.values()) < 1e-8


@given(seed=seeds, n=st.integers(1, 4), k=st.integers(0, 2))
def test_double_commutant_fixed_point(seed, n, k):
    rng = np.random.default_rng(seed)
    alg = algebra_closure(_random_generators(rng, n, k), dim=n)
    assert double_commutant(alg).same_span(alg)


@given(d=st.integers(2, 7), a=st.integers(-20, 20), b=st.integers(-20, 20))
def test_weyl_commutation(d, a, b):
    s = WeylSystem(d)
    lhs = s.U(a) @ s.V(b)
    rhs = s.root(a * b) * s.V(b) @ s.U(a)
    assert np.allclose(lhs, rhs, atol=1e-12)


ident = st.text("abcdefgh._", min_size=1, max_size=8)
real = st.floats(0, 1e3, allow_nan=False)


@given(entries=st.lists(st.tuples(ident, real, real, st.booleans()), max_size=6, unique_by=lambda t: t[0]),
       seed=st.integers(0, 100))
def test_report_round_trip(entries, seed):
    out = []
    for i, (name, x, tol, flag) in enumerate(entries):
        kind = i % 3
        if kind == 0:
            out.append(check_bound(name, "bound", x, tol, "TRIVIAL"))
        elif kind == 1:
            out.append(check_close(name, "close", complex(x, tol), complex(x, tol), tol, "DERIVED"))
        else:
            out.append(check_true(name, "flag", flag, True, "PAPER", evidence=x))
    r = assemble({"s": out}, seed=seed)
    text = serialize(r)
    assert parse(text).as_dict() == r.as_dict()
    assert r.summary["passed"] + r.summary["failed"] == len(entries)
