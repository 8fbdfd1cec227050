"""Finite-dimensional Hilbert modules over block C*-algebras.

A (pre-)module over B is a coordinate space C^d carrying

* a right action, stored as one d x d matrix R(u) per matrix-unit basis
  element u of B.  Right actions are anti-multiplicative as matrices:
  R(b1 b2) = R(b2) R(b1), and R(1) = I.
* a B-valued pairing, stored per B-block t as an array P_t of shape
  (d, d, n_t, n_t) holding the t-th block of <e_i, e_j>.  The pairing is
  conjugate-linear in the first slot and linear in the second.

Scalarizing the pairing through the faithful trace gives the Gram matrix
G_ij = tau(<e_i, e_j>).  Null-space detection, vector norms of the ambient
Hilbert-space realization, operator norms, and adjoints all run through G:
a module map T realizes as G_tgt^(1/2) T G_src^(-1/2) on the standard inner
product, and that realization is a faithful *-representation of L(E), so
module operator norms are exactly realized operator norms.

Quotients by the pairing's null space use the orthonormal eigenvector basis
of the Gram range, so the quotient map q and section s satisfy q s = I up to
eigensolver error, and conditioning is explicit in the kept eigenvalues.
Zero-dimensional modules are legal everywhere.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .cstar import (
    AlgebraElement,
    AlgebraShape,
    Automorphism,
    basis_element,
    right_mult_matrix,
    unit_element,
)
from .errors import ShapeMismatch, SingularGram, SubmoduleViolation
from .numkernel import (
    DEFAULT_TOL,
    Tolerance,
    herm_power,
    operator_norm,
    rank_kernel,
    require_finite,
)
from .reporting import CheckReport


@dataclass
class PreModule:
    """Right B-module with a possibly degenerate B-valued pairing."""

    algebra: AlgebraShape
    dim: int
    action: np.ndarray  # (dim_B, d, d); action[p] = R(u_p)
    pairing: list[np.ndarray]  # per B-block t: (d, d, n_t, n_t)

    def __post_init__(self) -> None:
        d = self.dim
        self.action = require_finite(self.action, "module action")
        if self.action.shape != (self.algebra.dim, d, d):
            raise ShapeMismatch(
                f"action tensor {self.action.shape} != {(self.algebra.dim, d, d)}"
            )
        mats = []
        for n, P in zip(self.algebra.blocks, self.pairing):
            P = require_finite(P, "module pairing")
            if P.shape != (d, d, n, n):
                raise ShapeMismatch(f"pairing block {P.shape} != {(d, d, n, n)}")
            mats.append(P)
        self.pairing = mats

    def gram(self) -> np.ndarray:
        if self.dim == 0:
            return np.zeros((0, 0), dtype=complex)
        return sum(np.einsum("ijkk->ij", P) for P in self.pairing)

    def action_matrix(self, b: AlgebraElement) -> np.ndarray:
        if b.shape != self.algebra:
            raise ShapeMismatch("coefficient outside the module's algebra")
        return np.einsum("p,pij->ij", b.coeffs(), self.action)

    def pair(self, x: np.ndarray, y: np.ndarray) -> AlgebraElement:
        x = np.asarray(x, dtype=complex).reshape(self.dim)
        y = np.asarray(y, dtype=complex).reshape(self.dim)
        return AlgebraElement(
            self.algebra,
            [np.einsum("i,j,ijkl->kl", x.conj(), y, P, optimize=True) for P in self.pairing],
        )


class HilbertModule(PreModule):
    """PreModule whose Gram matrix is positive definite."""

    def __post_init__(self) -> None:
        super().__post_init__()
        G = self.gram()
        G = (G + G.conj().T) / 2.0
        self.gram_matrix = G
        if self.dim:
            w = np.linalg.eigvalsh(G)
            if w[-1] <= 0.0 or w[0] <= DEFAULT_TOL.rtol * w[-1]:
                raise SingularGram(
                    f"Gram spectrum [{w[0]:.3e}, {w[-1]:.3e}] is not positive definite"
                )

    @cached_property
    def gram_sqrt(self) -> np.ndarray:
        return herm_power(self.gram_matrix, 0.5)

    @cached_property
    def gram_isqrt(self) -> np.ndarray:
        return herm_power(self.gram_matrix, -0.5)

    @cached_property
    def gram_inv(self) -> np.ndarray:
        return herm_power(self.gram_matrix, -1.0)

    def vector_norm(self, x: np.ndarray) -> float:
        """||x|| = sqrt(||<x, x>||_B)."""
        return float(np.sqrt(max(self.pair(x, x).norm(), 0.0)))


def vector_distance(E: HilbertModule, x: np.ndarray, y: np.ndarray) -> float:
    return E.vector_norm(np.asarray(x) - np.asarray(y))


def validate_premodule(pre: PreModule, tol: Tolerance = DEFAULT_TOL) -> CheckReport:
    """Residuals for the pre-module axioms.

    Checks pairing hermiticity <e_i,e_j> = <e_j,e_i>*, compatibility
    <x, y b> = <x, y> b on the basis, right-action anti-multiplicativity,
    unitality of the action, and PSD-ness of the scalarized Gram.
    """
    rep = CheckReport()
    B, d = pre.algebra, pre.dim
    scale = 1.0 + max((operator_norm(P.reshape(d * d, -1)) for P in pre.pairing), default=0.0)
    herm = 0.0
    for P in pre.pairing:
        herm = max(herm, float(np.max(np.abs(P - P.conj().transpose(1, 0, 3, 2))))) if P.size else herm
    rep.add("pairing_hermitian", herm, tol.ctol * scale)

    compat = 0.0
    act_scale = 1.0
    eye = np.eye(d)
    for p in range(B.dim):
        u = basis_element(B, p)
        R = pre.action[p]
        act_scale = max(act_scale, operator_norm(R))
        for j in range(d):
            moved = R[:, j]  # e_j . u_p
            for i in range(d):
                lhs = pre.pair(eye[:, i], moved)
                rhs = pre.pair(eye[:, i], eye[:, j]) * u
                compat = max(compat, (lhs - rhs).norm())
    rep.add("pairing_action_compat", compat, tol.ctol * scale * act_scale)

    anti = 0.0
    for p, i, k, l in B.basis_labels():
        for r, i2, k2, l2 in B.basis_labels():
            if i != i2:
                prod = np.zeros((d, d), dtype=complex)
            elif l == k2:
                prod = pre.action[B.basis_index(i, k, l2)]
            else:
                prod = np.zeros((d, d), dtype=complex)
            anti = max(anti, operator_norm(prod - pre.action[r] @ pre.action[p]))
    rep.add("action_antimultiplicative", anti, tol.ctol * (1.0 + act_scale**2))
    unital = operator_norm(pre.action_matrix(unit_element(B)) - np.eye(d))
    rep.add("action_unital", unital, tol.ctol * (1.0 + act_scale))

    G = pre.gram()
    if d:
        w = np.linalg.eigvalsh((G + G.conj().T) / 2.0)
        rep.add("gram_psd", max(0.0, -float(w[0])), tol.ctol * (1.0 + float(w[-1])))
    else:
        rep.add("gram_psd", 0.0, tol.ctol)
    return rep


# -- quotient by the null space -------------------------------------------


@dataclass
class Quotient:
    module: HilbertModule
    q: np.ndarray  # (rank, d): quotient map onto eigen-coordinates
    s: np.ndarray  # (d, rank): section, q s = I
    kernel: np.ndarray  # (d, d - rank): kernel basis of the Gram matrix


def quotient_by_null(pre: PreModule, tol: Tolerance = DEFAULT_TOL) -> Quotient:
    """Quotient a pre-module by the null space of its pairing.

    The null space is detected as ker(G) for the scalarized Gram G; by
    faithfulness of the trace this agrees with {z : <z, z> = 0} whenever the
    pairing is PSD.  Raises SubmoduleViolation when the kernel is not
    invariant under the action, which signals an invalid pre-module.
    """
    G = pre.gram()
    rank, range_basis, kernel_basis = rank_kernel(G, tol)
    q = range_basis.conj().T
    s = range_basis
    for p in range(pre.algebra.dim):
        R = pre.action[p]
        resid = operator_norm(q @ R @ kernel_basis)
        if resid > tol.ctol * (1.0 + operator_norm(R)):
            raise SubmoduleViolation(
                f"action of basis element {p} leaks out of the null space "
                f"(residual {resid:.3e})"
            )
    new_action = np.einsum("iu,puv,vj->pij", q, pre.action, s, optimize=True)
    new_pairing = [
        np.einsum("ui,vj,uvkl->ijkl", s.conj(), s, P, optimize=True) for P in pre.pairing
    ]
    module = HilbertModule(pre.algebra, rank, new_action, new_pairing)
    return Quotient(module, q, s, kernel_basis)


# -- module maps -----------------------------------------------------------


@dataclass
class ModuleMap:
    """B-linear map between Hilbert modules over the same algebra.

    In finite dimension every B-linear map is adjointable, with adjoint
    G_src^(-1) T^dagger G_tgt; adjoint_map applies that formula.
    """

    source: HilbertModule
    target: HilbertModule
    matrix: np.ndarray

    def __post_init__(self) -> None:
        if self.source.algebra != self.target.algebra:
            raise ShapeMismatch("module map across different coefficient algebras")
        self.matrix = require_finite(self.matrix, "module map matrix")
        if self.matrix.shape != (self.target.dim, self.source.dim):
            raise ShapeMismatch(
                f"matrix {self.matrix.shape} != {(self.target.dim, self.source.dim)}"
            )

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return self.matrix @ np.asarray(x, dtype=complex).reshape(self.source.dim)

    def linearity_residual(self) -> float:
        worst = 0.0
        for p in range(self.source.algebra.dim):
            worst = max(
                worst,
                operator_norm(
                    self.matrix @ self.source.action[p]
                    - self.target.action[p] @ self.matrix
                ),
            )
        return worst


def identity_map(E: HilbertModule) -> ModuleMap:
    return ModuleMap(E, E, np.eye(E.dim, dtype=complex))


def compose_maps(outer: ModuleMap, inner: ModuleMap) -> ModuleMap:
    if outer.source is not inner.target and outer.source.dim != inner.target.dim:
        raise ShapeMismatch("maps do not chain")
    return ModuleMap(inner.source, outer.target, outer.matrix @ inner.matrix)


def realize(m: ModuleMap) -> np.ndarray:
    """Hilbert-space realization G_tgt^(1/2) T G_src^(-1/2)."""
    return m.target.gram_sqrt @ m.matrix @ m.source.gram_isqrt


def unrealize(E: HilbertModule, F: HilbertModule, M: np.ndarray) -> ModuleMap:
    return ModuleMap(E, F, F.gram_isqrt @ M @ E.gram_sqrt)


def adjoint_map(m: ModuleMap) -> ModuleMap:
    """Unique adjoint of a B-linear map: G_src^(-1) T^dagger G_tgt."""
    if m.source.dim and np.all(m.source.gram_matrix == 0):
        raise SingularGram("source Gram is zero")
    mat = m.source.gram_inv @ m.matrix.conj().T @ m.target.gram_matrix
    return ModuleMap(m.target, m.source, mat)


def module_operator_norm(m: ModuleMap) -> float:
    """Norm in L(E1, E2), computed through the faithful realization."""
    return operator_norm(realize(m))


def adjoint_identity_residual(m: ModuleMap, adj: ModuleMap) -> float:
    """Max over basis pairs of ||<T e_i, e_j>_tgt - <e_i, T* e_j>_src||."""
    worst = 0.0
    src, tgt = m.source, m.target
    for i in range(src.dim):
        Ti = m.matrix[:, i]
        for j in range(tgt.dim):
            Sj = adj.matrix[:, j]
            lhs = tgt.pair(Ti, np.eye(tgt.dim)[:, j])
            rhs = src.pair(np.eye(src.dim)[:, i], Sj)
            worst = max(worst, (lhs - rhs).norm())
    return worst


def is_map_positive(m: ModuleMap, tol: Tolerance = DEFAULT_TOL) -> tuple[bool, float]:
    """Positivity of an element of L(E) through its realization."""
    M = realize(m)
    H = (M + M.conj().T) / 2.0
    defect = operator_norm(M - M.conj().T)
    w = np.linalg.eigvalsh(H) if H.size else np.zeros(1)
    ok = defect <= tol.ctol * (1.0 + operator_norm(M)) and float(w[0]) >= -tol.ctol * (
        1.0 + operator_norm(M)
    )
    return bool(ok), float(w[0])


def rank_one_operator(E: HilbertModule, x: np.ndarray, y: np.ndarray) -> ModuleMap:
    """theta_{x,y}: z -> x . <y, z>."""
    x = np.asarray(x, dtype=complex).reshape(E.dim)
    y = np.asarray(y, dtype=complex).reshape(E.dim)
    cols = np.zeros((E.dim, E.dim), dtype=complex)
    eye = np.eye(E.dim)
    for j in range(E.dim):
        b = E.pair(y, eye[:, j])
        cols[:, j] = E.action_matrix(b) @ x
    return ModuleMap(E, E, cols)


# -- alpha-twisted maps ----------------------------------------------------


@dataclass
class AlphaLinearMap:
    """Map f with f(x b) = f(x) alpha(b): matrix R_tgt(alpha(b)) f = f R_src(b)."""

    source: HilbertModule
    target: HilbertModule
    twist: Automorphism
    matrix: np.ndarray

    def __post_init__(self) -> None:
        if self.source.algebra != self.target.algebra:
            raise ShapeMismatch("twisted map across different coefficient algebras")
        if self.twist.shape != self.source.algebra:
            raise ShapeMismatch("twist automorphism lives on the wrong algebra")
        self.matrix = require_finite(self.matrix, "twisted map matrix")
        if self.matrix.shape != (self.target.dim, self.source.dim):
            raise ShapeMismatch("twisted map matrix has wrong shape")

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return self.matrix @ np.asarray(x, dtype=complex).reshape(self.source.dim)

    def twisted_linearity_residual(self) -> float:
        worst = 0.0
        src, tgt = self.source, self.target
        amat = self.twist.matrix
        for p in range(src.algebra.dim):
            twisted = np.einsum("q,qij->ij", amat[:, p], tgt.action)
            worst = max(
                worst,
                operator_norm(self.matrix @ src.action[p] - twisted @ self.matrix),
            )
        return worst


def algebra_module(shape: AlgebraShape) -> HilbertModule:
    """B viewed as a Hilbert module over itself with <a, b> = a* b."""
    d = shape.dim
    action = np.stack(
        [right_mult_matrix(basis_element(shape, p)) for p in range(d)]
    ) if d else np.zeros((0, 0, 0))
    pairing = []
    for t, n in enumerate(shape.blocks):
        P = np.zeros((d, d, n, n), dtype=complex)
        for p, i, k, l in shape.basis_labels():
            if i != t:
                continue
            for r, j, k2, l2 in shape.basis_labels():
                if j != t or k != k2:
                    continue
                # <E_kl, E_k l2> = E_lk E_k l2 = E_{l l2}
                P[p, r, l, l2] += 1.0
        pairing.append(P)
    return HilbertModule(shape, d, action, pairing)
