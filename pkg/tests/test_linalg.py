import numpy as np
import pytest

from bohrepr.errors import ConsistencyError, DimensionMismatch, NotSelfAdjoint, NotSquare
from bohrepr.linalg import (
    DEFAULT_TOL,
    OperatorAlgebra,
    TolerancePolicy,
    algebra_closure,
    commutant,
    dag,
    double_commutant,
    ket_bra,
    null_space,
    orthonormal_rows,
    projector_onto,
    spectral_decomposition,
    tensor_product,
    trace_inner,
)

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]])
SZ = np.diag([1.0, -1.0]).astype(complex)


def test_tolerance_policy_defaults_and_validation():
    assert DEFAULT_TOL.as_dict() == {"eps_eq": 1e-9, "eps_eig": 1e-8}
    with pytest.raises(ValueError):
        TolerancePolicy(eps_eq=0.0)
    with pytest.raises(ValueError):
        TolerancePolicy(eps_eq=1e-6, eps_eig=1e-8)
    assert TolerancePolicy.from_eps_eq(1e-6).eps_eig == 1e-6
    assert TolerancePolicy.from_eps_eq(1e-12).eps_eig == 1e-8


def test_spectral_groups_near_degenerate_values():
    sd = spectral_decomposition(np.diag([1.0, 1.0 + 1e-12, 2.0]))
    assert sd.ranks == (2, 1)
    assert sd.eigenvalues[0] == pytest.approx(1.0)
    assert np.allclose(sd.eigenprojections[1], np.diag([0, 0, 1]))


def test_spectral_pauli_x():
    sd = spectral_decomposition(SX)
    assert sd.eigenvalues == pytest.approx((-1.0, 1.0))
    plus = np.array([1, 1]) / np.sqrt(2)
    assert np.allclose(sd.eigenprojections[1], np.outer(plus, plus))
    assert np.allclose(sd.reconstruct(), SX)
    assert np.allclose(sd.apply(lambda r: r ** 2), np.eye(2))
    with pytest.raises(DimensionMismatch):
        sd.apply([1.0])


def test_spectral_rejects_bad_input():
    with pytest.raises(NotSquare):
        spectral_decomposition(np.ones((2, 3)))
    h = np.array([[1, 1], [0, -1]], dtype=complex)
    with pytest.raises(NotSelfAdjoint) as info:
        spectral_decomposition(h)
    # residual is the Frobenius norm of H - H*, computed independently
    assert info.value.residual == pytest.approx(np.sqrt(2))
    assert "||H - H*||" in str(info.value)


def test_tensor_product_and_trace_inner():
    assert np.allclose(tensor_product(SX, SZ), np.kron(SX, SZ))
    assert np.allclose(tensor_product(SX, SZ, SY), np.kron(np.kron(SX, SZ), SY))
    assert trace_inner(SX, SX) == pytest.approx(1.0)
    assert trace_inner(SX, SZ) == pytest.approx(0.0)
    with pytest.raises(ValueError):
        tensor_product()


def test_projector_and_null_space():
    p = projector_onto([np.array([1, 1, 0]), np.array([0, 1, 1]), np.array([1, 2, 1])])
    assert np.allclose(p @ p, p)
    assert np.trace(p).real == pytest.approx(2)
    ns = null_space(np.array([[1, 1, 0], [0, 0, 1]], dtype=complex))
    assert ns.shape == (3, 1)
    assert np.allclose(abs(ns[:, 0]), [1 / np.sqrt(2), 1 / np.sqrt(2), 0])
    rows = orthonormal_rows(np.array([[1, 0], [2, 0], [0, 3]], dtype=complex))
    assert rows.shape == (2, 2)


@pytest.mark.parametrize(
    "gens, dim, size",
    [
        ([], 2, 1),
        ([SX], 2, 2),
        ([SX, SZ], 2, 4),
        ([SY], 2, 2),
        ([np.diag([1.0, 2.0, 3.0])], 3, 3),
        ([np.diag([1.0, 1.0, 3.0])], 3, 2),
        ([np.array([[0, 1, 0], [0, 0, 0], [0, 0, 0]], dtype=complex)], 3, 5),
        ([np.kron(SX, np.eye(2)), np.kron(SZ, np.eye(2))], 4, 4),
    ],
)
def test_closure_sizes(gens, dim, size):
    # sizes from hand enumeration: Pauli pair -> M_2; E_12 -> M_2 (+) C
    alg = algebra_closure(gens, dim=dim)
    assert len(alg) == size
    assert alg.contains(np.eye(dim))
    for g in gens:
        assert alg.contains(g) and alg.contains(dag(g))
    inv = alg.invariant_residuals()
    assert max(inv.values()) < 1e-9


def test_closure_idempotent():
    alg = algebra_closure([np.kron(SX, SZ), np.kron(SY, np.eye(2))])
    again = algebra_closure(list(alg.basis))
    assert again.same_span(alg)


def test_closure_round_cap():
    rng = np.random.default_rng(0)
    g = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
    with pytest.raises(ConsistencyError):
        algebra_closure([g], max_rounds=1)


def test_basis_normalisation():
    alg = algebra_closure([SX, SZ])
    for b in alg.basis:
        assert np.linalg.norm(b) == pytest.approx(np.sqrt(2))
    gram = np.array([[trace_inner(a, b) for b in alg.basis] for a in alg.basis])
    assert np.allclose(gram, np.eye(4))


def test_commutant_examples():
    full = algebra_closure([SX, SZ])
    assert len(commutant(full)) == 1
    diag = algebra_closure([np.diag([1.0, 2.0, 3.0])])
    comm = commutant(diag)
    assert comm.same_span(diag)
    # commutant of C*I_2 (x) M_2 is M_2 (x) C*I_2
    right = algebra_closure([np.kron(np.eye(2), SX), np.kron(np.eye(2), SZ)])
    left = algebra_closure([np.kron(SX, np.eye(2)), np.kron(SZ, np.eye(2))])
    assert commutant(right).same_span(left)


def test_commutant_of_empty_span_is_everything():
    alg = OperatorAlgebra.from_matrices([], dim=2)
    assert len(commutant(alg)) == 4


def test_double_commutant_block_algebra(rng):
    # M_2 (+) M_1 (+) M_1 with the two M_1 blocks tied together
    a = np.zeros((4, 4), dtype=complex)
    a[:2, :2] = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    a[2, 2] = a[3, 3] = 1.0
    alg = algebra_closure([a])
    assert double_commutant(alg).same_span(alg)


def test_span_membership():
    alg = OperatorAlgebra.from_matrices([SX, SZ])
    assert alg.contains(2 * SX - 3j * SZ)
    assert not alg.contains(SY)
    assert alg.residual(SY) == pytest.approx(np.sqrt(2))
    assert alg.is_abelian() is False
    assert OperatorAlgebra.from_matrices([SZ, np.eye(2)]).is_abelian()
    with pytest.raises(DimensionMismatch):
        OperatorAlgebra.from_matrices([SX, np.eye(3)])


def test_ket_bra():
    u, v = np.array([1, 1j]), np.array([0, 1])
    assert np.allclose(ket_bra(u, v), np.outer(u, v.conj()))
    assert np.allclose(ket_bra(u), np.outer(u, u.conj()))
