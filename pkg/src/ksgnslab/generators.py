"""Seeded instance generators shared by the harness and the test suite.

Modules and representations are generated in a canonical form where every
right module over B = (+)_t M_{m_t} is a sum of row spaces C^{r_t x m_t}
and every unital representation is a multiplicity embedding conjugated by a
random unitary; a random well-conditioned coordinate change then hides the
canonical form so downstream code never sees identity Gram matrices.
"""

from __future__ import annotations

import numpy as np

from .cp import CPMap, Correspondence, Intertwiner, intertwiner_space, random_cp
from .cstar import (
    AlgebraShape,
    Automorphism,
    StarMap,
    AlgebraElement,
    from_coeffs,
    haar_unitary,
    identity_automorphism,
    identity_star_map,
    random_automorphism,
    random_element,
)
from .errors import InvalidConfig
from .hilbert import HilbertModule, ModuleMap, adjoint_map, module_operator_norm
from .numkernel import DEFAULT_TOL, Tolerance
from .poscor import (
    PosCorMorphism,
    PosCorObject,
    inclusion_unitary,
    interior_tensor_along,
    make_poscor_morphism,
)
from .equivariant import scramble_module


SHAPE_MENU: tuple[tuple[int, ...], ...] = ((1,), (2,), (3,), (2, 2), (1, 2))


def random_shape(rng: np.random.Generator, max_blocks: int = 2, max_block: int = 3) -> AlgebraShape:
    menu = [s for s in SHAPE_MENU if len(s) <= max_blocks and max(s) <= max_block]
    if not menu:
        raise InvalidConfig("size caps rule out every algebra shape")
    return AlgebraShape(menu[rng.integers(len(menu))])


def canonical_module(B: AlgebraShape, rows: tuple[int, ...]) -> HilbertModule:
    """(+)_t C^{r_t x m_t} with x.b = x b and <x, y> = x* y blockwise."""
    if len(rows) != len(B.blocks):
        raise InvalidConfig("one row count per block required")
    dims = [r * m for r, m in zip(rows, B.blocks)]
    d = sum(dims)
    offsets = np.concatenate([[0], np.cumsum(dims)])

    def flat(t: int, a: int, b: int) -> int:
        return int(offsets[t] + a * B.blocks[t] + b)

    action = np.zeros((B.dim, d, d), dtype=complex)
    for p, t, k, l in B.basis_labels():
        for a in range(rows[t]):
            action[p, flat(t, a, l), flat(t, a, k)] = 1.0
    pairing = []
    for t, m in enumerate(B.blocks):
        P = np.zeros((d, d, m, m), dtype=complex)
        for a in range(rows[t]):
            for b in range(m):
                for b2 in range(m):
                    P[flat(t, a, b), flat(t, a, b2), b, b2] = 1.0
        pairing.append(P)
    return HilbertModule(B, d, action, pairing)


def random_rows(
    B: AlgebraShape, rng: np.random.Generator, max_dim: int, min_dim: int = 1
) -> tuple[int, ...]:
    """Row counts with min_dim <= sum r_t m_t <= max_dim (not all zero)."""
    if min_dim > max_dim or max_dim < min(B.blocks):
        raise InvalidConfig(f"no module of dimension within [{min_dim}, {max_dim}]")
    for _ in range(256):
        rows = tuple(int(rng.integers(0, max_dim // m + 1)) for m in B.blocks)
        d = sum(r * m for r, m in zip(rows, B.blocks))
        if min_dim <= d <= max_dim and any(rows):
            return rows
    # fall back to a single row in the smallest block
    t = int(np.argmin(B.blocks))
    return tuple(1 if i == t else 0 for i in range(len(B.blocks)))


def random_module(
    B: AlgebraShape, rng: np.random.Generator, max_dim: int, min_dim: int = 1
) -> HilbertModule:
    rows = random_rows(B, rng, max_dim, min_dim)
    module, _ = scramble_module(canonical_module(B, rows), rng)
    return module


def random_star_map(
    B: AlgebraShape,
    rng: np.random.Generator,
    max_block: int = 4,
    max_out_blocks: int = 2,
    codomain: AlgebraShape | None = None,
    multiplicities: tuple[tuple[int, ...], ...] | None = None,
) -> StarMap:
    """Random unital *-homomorphism out of B.

    When no codomain is supplied, one is built from random multiplicities
    nu with block sizes p_u = sum_t nu[u][t] m_t.
    """
    if multiplicities is None:
        n_out = int(rng.integers(1, max_out_blocks + 1))
        multiplicities = []
        for _ in range(n_out):
            for _ in range(64):
                nu = tuple(int(rng.integers(0, 3)) for _ in B.blocks)
                size = sum(n * m for n, m in zip(nu, B.blocks))
                if 1 <= size <= max_block:
                    multiplicities.append(nu)
                    break
            else:
                multiplicities.append(
                    tuple(1 if i == int(np.argmin(B.blocks)) else 0 for i in range(len(B.blocks)))
                )
        multiplicities = tuple(multiplicities)
    sizes = tuple(
        sum(n * m for n, m in zip(nu, B.blocks)) for nu in multiplicities
    )
    C = codomain if codomain is not None else AlgebraShape(sizes)
    if tuple(C.blocks) != sizes:
        raise InvalidConfig("codomain blocks do not match the multiplicities")
    conjugators = [haar_unitary(p, rng) for p in C.blocks]

    def embed(a: AlgebraElement) -> AlgebraElement:
        out_blocks = []
        for u, nu in enumerate(multiplicities):
            p = C.blocks[u]
            D = np.zeros((p, p), dtype=complex)
            pos = 0
            for t, count in enumerate(nu):
                m = B.blocks[t]
                for _ in range(count):
                    D[pos : pos + m, pos : pos + m] = a.blocks[t]
                    pos += m
            W = conjugators[u]
            out_blocks.append(W @ D @ W.conj().T)
        return AlgebraElement(C, out_blocks)

    images = [
        embed(from_coeffs(B, np.eye(B.dim)[:, p])) for p in range(B.dim)
    ]
    return StarMap(B, C, images)


def random_representation(
    A: AlgebraShape, B: AlgebraShape, rng: np.random.Generator, max_dim: int
) -> tuple[HilbertModule, Correspondence]:
    """A module F over B with a unital *-representation pi: A -> L(F).

    Row counts are r_t = sum_i mu[t][i] n_i, so a multiplicity embedding of A
    acts blockwise on the row spaces; everything is then scrambled.
    """
    for _ in range(256):
        mu = [
            tuple(int(rng.integers(0, 3)) for _ in A.blocks) for _ in B.blocks
        ]
        rows = tuple(sum(m * n for m, n in zip(mu_t, A.blocks)) for mu_t in mu)
        d = sum(r * m for r, m in zip(rows, B.blocks))
        if 0 < d <= max_dim:
            break
    else:
        # one copy of the smallest A-block inside the smallest B-block
        t = int(np.argmin(B.blocks))
        i = int(np.argmin(A.blocks))
        if A.blocks[i] * B.blocks[t] > max_dim:
            raise InvalidConfig(f"cannot fit a representation within dimension {max_dim}")
        mu = [
            tuple((1 if (t2 == t and i2 == i) else 0) for i2 in range(len(A.blocks)))
            for t2 in range(len(B.blocks))
        ]
        rows = tuple(sum(m * n for m, n in zip(mu_t, A.blocks)) for mu_t in mu)
    F0 = canonical_module(B, rows)
    conjugators = [haar_unitary(r, rng) for r in rows]
    dims = [r * m for r, m in zip(rows, B.blocks)]
    offsets = np.concatenate([[0], np.cumsum(dims)])

    def rep_block(t: int, a_blocks: list[np.ndarray]) -> np.ndarray:
        r = rows[t]
        D = np.zeros((r, r), dtype=complex)
        pos = 0
        for i, count in enumerate(mu[t]):
            n = A.blocks[i]
            for _ in range(count):
                D[pos : pos + n, pos : pos + n] = a_blocks[i]
                pos += n
        W = conjugators[t]
        return W @ D @ W.conj().T

    dA = A.dim
    images = np.zeros((dA, F0.dim, F0.dim), dtype=complex)
    for p, i, k, l in A.basis_labels():
        unit_blocks = [np.zeros((n, n), dtype=complex) for n in A.blocks]
        unit_blocks[i][k, l] = 1.0
        for t, m in enumerate(B.blocks):
            T = rep_block(t, unit_blocks)  # acts on the row index
            block = np.kron(T, np.eye(m, dtype=complex))
            sl = slice(offsets[t], offsets[t + 1])
            images[p][sl, sl] = block
    F, S = scramble_module(F0, rng)
    S_inv = np.linalg.inv(S)
    images = np.stack([S_inv @ img @ S for img in images])
    return F, Correspondence(A, F, images)


def conjugate_cp(
    phi: CPMap, W: ModuleMap, alpha: Automorphism
) -> CPMap:
    """psi(a) = W phi(alpha^{-1}(a)) W* on W's target module; (W, alpha) then
    intertwines phi and psi when W is unitary."""
    Ws = adjoint_map(W).matrix
    moved = np.einsum("qp,qij->pij", alpha.inverse_matrix, phi.images)
    images = np.einsum("ij,pjk,kl->pil", W.matrix, moved, Ws, optimize=True)
    return CPMap(phi.algebra, W.target, images)


def extend_morphism(
    E: HilbertModule,
    phi: CPMap,
    rng: np.random.Generator,
    unitary_eta: bool = False,
    tol: Tolerance = DEFAULT_TOL,
) -> tuple[HilbertModule, CPMap, Intertwiner]:
    """A fresh (E', phi') with an intertwiner (eta, alpha): (E, phi) -> (E', phi').

    E' is a transported copy of E and phi' the conjugated map, so the
    transport unitary intertwines by construction; a random element of the
    solved intertwiner space is returned unless unitary_eta is set.
    """
    E2, S = scramble_module(E, rng)
    W = ModuleMap(E, E2, np.linalg.inv(S))
    alpha = random_automorphism(phi.algebra, rng)
    phi2 = conjugate_cp(phi, W, alpha)
    if unitary_eta:
        return E2, phi2, Intertwiner(W, alpha)
    basis = intertwiner_space(phi, phi2, alpha, tol)
    coeffs = rng.standard_normal(len(basis)) + 1j * rng.standard_normal(len(basis))
    mat = sum(
        (c * b.matrix for c, b in zip(coeffs, basis)),
        start=np.zeros((E2.dim, E.dim), dtype=complex),
    )
    eta = ModuleMap(E, E2, mat)
    norm = module_operator_norm(eta)
    if norm > 1e-9:
        eta = ModuleMap(E, E2, mat / norm * (0.5 + rng.uniform()))
    else:
        eta = W
    return E2, phi2, Intertwiner(eta, alpha)


def random_morphism_pair(
    A: AlgebraShape,
    B: AlgebraShape,
    rng: np.random.Generator,
    max_dim: int,
    unitary_eta: bool = False,
    tol: Tolerance = DEFAULT_TOL,
) -> tuple[HilbertModule, CPMap, HilbertModule, CPMap, Intertwiner]:
    """(E1, phi1), (E2, phi2) and an intertwiner between them."""
    E1 = random_module(B, rng, max_dim)
    phi1 = random_cp(A, E1, rng)
    E2, phi2, m = extend_morphism(E1, phi1, rng, unitary_eta, tol)
    return E1, phi1, E2, phi2, m


def random_object(
    ident: str,
    A: AlgebraShape,
    B: AlgebraShape,
    rng: np.random.Generator,
    max_dim: int,
    tol: Tolerance = DEFAULT_TOL,
) -> PosCorObject:
    E = random_module(B, rng, max_dim)
    return PosCorObject(ident, A, B, E, random_cp(A, E, rng))


def random_morphism_to_new_object(
    dom: PosCorObject,
    ident: str,
    rng: np.random.Generator,
    max_block: int = 3,
    max_out_blocks: int = 2,
    max_dim: int = 12,
    tol: Tolerance = DEFAULT_TOL,
) -> tuple[PosCorObject, PosCorMorphism]:
    """Extend a diagram: pick rho out of dom's coefficients, tensor, and make
    the codomain a transported copy of the tensor so that the transport is a
    unitary morphism component."""
    rho = random_star_map(dom.coefficient, rng, max_block=max_block, max_out_blocks=max_out_blocks)
    for _ in range(32):
        if dom.module.dim * rho.codomain.dim <= max_dim:
            break
        rho = random_star_map(dom.coefficient, rng, max_block=max_block, max_out_blocks=max_out_blocks)
    tensor = interior_tensor_along(dom.module, rho, tol)
    E2, S = scramble_module(tensor.module, rng)
    W = ModuleMap(tensor.module, E2, np.linalg.inv(S))
    alpha = random_automorphism(dom.input_algebra, rng)
    phi_ext_images = np.stack(
        [
            (tensor.q @ np.kron(dom.phi.images[p], np.eye(tensor.right.dim)) @ tensor.s)
            for p in range(dom.input_algebra.dim)
        ]
    )
    phi_ext = CPMap(dom.input_algebra, tensor.module, phi_ext_images)
    psi = conjugate_cp(phi_ext, W, alpha)
    cod = PosCorObject(ident, dom.input_algebra, rho.codomain, E2, psi)
    morphism = make_poscor_morphism(
        dom, cod, rho, W.matrix, alpha, dom_tensor=tensor, tol=tol
    )
    return cod, morphism


def random_endomorphism(
    obj: PosCorObject, rng: np.random.Generator, tol: Tolerance = DEFAULT_TOL
) -> PosCorMorphism:
    """An endomorphism of obj: a random element of the commutant of phi,
    composed with the inclusion unitary."""
    inc = inclusion_unitary(obj.module, tol)
    basis = intertwiner_space(
        obj.phi, obj.phi, identity_automorphism(obj.input_algebra), tol
    )
    coeffs = rng.standard_normal(len(basis)) + 1j * rng.standard_normal(len(basis))
    mat = sum(
        (c * b.matrix for c, b in zip(coeffs, basis)),
        start=np.zeros((obj.module.dim, obj.module.dim), dtype=complex),
    )
    norm = module_operator_norm(ModuleMap(obj.module, obj.module, mat))
    if norm <= 1e-9:
        mat, norm = np.eye(obj.module.dim, dtype=complex), 1.0
    eta = (mat / norm) @ inc.iota.matrix
    return make_poscor_morphism(
        obj,
        obj,
        identity_star_map(obj.coefficient),
        eta,
        identity_automorphism(obj.input_algebra),
        dom_tensor=inc.tensor,
        tol=tol,
    )


def random_vectors(
    E: HilbertModule, rng: np.random.Generator, count: int
) -> list[np.ndarray]:
    return [
        (rng.standard_normal(E.dim) + 1j * rng.standard_normal(E.dim)) / np.sqrt(2.0)
        for _ in range(count)
    ]


def random_elements(
    A: AlgebraShape, rng: np.random.Generator, count: int
) -> list[AlgebraElement]:
    return [random_element(A, rng) for _ in range(count)]
