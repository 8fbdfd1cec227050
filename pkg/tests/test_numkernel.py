import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ksgnslab.errors import NonFinite, NonHermitian, NotPSD
from ksgnslab.numkernel import (
    Tolerance,
    herm_eig,
    herm_expi,
    herm_power,
    operator_norm,
    pseudo_inverse,
    rank_kernel,
)

from conftest import random_complex


def test_tolerance_validation():
    Tolerance(rtol=0.0, ctol=1e-8)
    with pytest.raises(ValueError):
        Tolerance(rtol=1.0)
    with pytest.raises(ValueError):
        Tolerance(ctol=0.0)
    with pytest.raises(ValueError):
        Tolerance(rtol=-1e-3)


def test_herm_eig_identity():
    w, V = herm_eig(np.eye(3, dtype=complex))
    assert np.allclose(w, [1.0, 1.0, 1.0])
    assert np.allclose(V.conj().T @ V, np.eye(3))


def test_herm_eig_diagonal():
    w, _ = herm_eig(np.diag([2.0, 0.0]).astype(complex))
    assert np.allclose(w, [0.0, 2.0])


def test_herm_eig_rejects_non_hermitian():
    with pytest.raises(NonHermitian):
        herm_eig(np.array([[0.0, 1.0], [0.0, 0.0]]))
    with pytest.raises(NonHermitian):
        herm_eig(np.zeros((2, 3)))


def test_non_finite_rejected():
    with pytest.raises(NonFinite):
        operator_norm(np.array([[np.nan, 0.0], [0.0, 1.0]]))
    with pytest.raises(NonFinite):
        herm_eig(np.array([[np.inf, 0.0], [0.0, 1.0]]))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 8))
def test_herm_eig_reconstructs(seed, n):
    rng = np.random.default_rng(seed)
    M = random_complex(rng, n, n)
    H = M + M.conj().T
    w, V = herm_eig(H)
    assert np.all(np.diff(w) >= 0)
    resid = operator_norm(H @ V - V @ np.diag(w))
    assert resid <= 1e-10 * (1.0 + operator_norm(H))
    assert operator_norm(V.conj().T @ V - np.eye(n)) <= 1e-10
    recon = operator_norm((V * w) @ V.conj().T - H)
    assert recon <= 1e-10 * (1.0 + operator_norm(H))


def test_rank_kernel_zero_matrix():
    rank, rng_basis, ker = rank_kernel(np.zeros((3, 3), dtype=complex))
    assert rank == 0
    assert ker.shape == (3, 3)
    assert np.allclose(ker.conj().T @ ker, np.eye(3))


def test_rank_kernel_diag():
    rank, rng_basis, ker = rank_kernel(np.diag([1.0, 1.0, 0.0]).astype(complex))
    assert rank == 2
    assert rng_basis.shape == (3, 2)
    # orthonormal range, range orthogonal to kernel
    assert np.allclose(rng_basis.conj().T @ rng_basis, np.eye(2), atol=1e-12)
    assert np.max(np.abs(rng_basis.conj().T @ ker)) <= 1e-12


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 7))
def test_rank_kernel_rank_one(seed, n):
    rng = np.random.default_rng(seed)
    x = random_complex(rng, n)
    G = np.outer(x, x.conj())
    rank, _, _ = rank_kernel(G)
    assert rank == (1 if np.linalg.norm(x) > 0 else 0)


def test_rank_kernel_rejects_negative():
    with pytest.raises(NotPSD):
        rank_kernel(np.diag([1.0, -1.0]).astype(complex))


def test_operator_norm_examples():
    assert operator_norm(np.eye(4)) == pytest.approx(1.0)
    assert operator_norm(np.diag([3.0, -4.0])) == pytest.approx(4.0)
    assert operator_norm(np.zeros((0, 0))) == 0.0


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_operator_norm_eigen_oracle(seed):
    rng = np.random.default_rng(seed)
    M = random_complex(rng, 5, 5)
    lam = np.linalg.eigvalsh(M.conj().T @ M)[-1]
    assert abs(operator_norm(M) ** 2 - lam) <= 1e-10 * (1.0 + operator_norm(M) ** 2)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6))
def test_operator_norm_submultiplicative(seed):
    rng = np.random.default_rng(seed)
    A = random_complex(rng, 4, 4)
    B = random_complex(rng, 4, 4)
    assert operator_norm(A @ B) <= operator_norm(A) * operator_norm(B) + 1e-8


def test_pseudo_inverse_examples():
    assert np.allclose(pseudo_inverse(np.eye(3, dtype=complex)), np.eye(3))
    assert np.allclose(
        pseudo_inverse(np.diag([2.0, 0.0]).astype(complex)), np.diag([0.5, 0.0])
    )


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6))
def test_pseudo_inverse_full_rank(seed):
    rng = np.random.default_rng(seed)
    M = random_complex(rng, 4, 4) + 2.0 * np.eye(4)
    cond = np.linalg.cond(M)
    inv = pseudo_inverse(M)
    assert operator_norm(inv - np.linalg.inv(M)) <= 1e-9 * cond


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6))
def test_pseudo_inverse_moore_penrose(seed):
    rng = np.random.default_rng(seed)
    M = random_complex(rng, 4, 6)
    P = pseudo_inverse(M)
    scale = 1.0 + operator_norm(M)
    assert operator_norm(M @ P @ M - M) <= 1e-8 * scale
    assert operator_norm(P @ M @ P - P) <= 1e-8 * scale


def test_herm_power_inverse_square_root():
    rng = np.random.default_rng(0)
    M = random_complex(rng, 5, 5)
    G = M @ M.conj().T + np.eye(5)
    S = herm_power(G, 0.5)
    Si = herm_power(G, -0.5)
    assert operator_norm(S @ S - G) <= 1e-10 * operator_norm(G)
    assert operator_norm(S @ Si - np.eye(5)) <= 1e-10


def test_herm_expi_unitary():
    rng = np.random.default_rng(1)
    M = random_complex(rng, 4, 4)
    H = M + M.conj().T
    U = herm_expi(H)
    assert operator_norm(U.conj().T @ U - np.eye(4)) <= 1e-12 * (1 + operator_norm(H))
