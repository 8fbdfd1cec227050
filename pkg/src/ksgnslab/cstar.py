"""Finite-dimensional C*-algebras: direct sums of full complex matrix blocks.

An algebra A = M_{n_1} (+) ... (+) M_{n_k} is presented by its block sizes.
Elements are lists of per-block matrices.  The matrix-unit basis is ordered
block by block, row-major inside each block, and every linear map between
algebras is stored through its images on that basis.

The faithful positive functional used everywhere for scalarization is the
unnormalized trace tau(a) = sum_i tr(a_i); tau(a* a) > 0 for a != 0, which is
what lets Gram-matrix kernels detect genuine null vectors downstream.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import ShapeMismatch
from .numkernel import DEFAULT_TOL, Tolerance, herm_eig, operator_norm, require_finite
from .reporting import CheckReport


@dataclass(frozen=True)
class AlgebraShape:
    """Block sizes (n_1, ..., n_k) of a finite direct sum of matrix algebras."""

    blocks: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.blocks) < 1 or any(n < 1 for n in self.blocks):
            raise ShapeMismatch(f"invalid block sizes {self.blocks}")
        object.__setattr__(self, "blocks", tuple(int(n) for n in self.blocks))

    @property
    def dim(self) -> int:
        """Vector-space dimension sum n_i**2 (= size of the matrix-unit basis)."""
        return sum(n * n for n in self.blocks)

    @property
    def offsets(self) -> tuple[int, ...]:
        offs = [0]
        for n in self.blocks:
            offs.append(offs[-1] + n * n)
        return tuple(offs)

    def basis_index(self, block: int, row: int, col: int) -> int:
        return self.offsets[block] + row * self.blocks[block] + col

    def basis_labels(self):
        """Yield (flat_index, block, row, col) over the matrix-unit basis."""
        p = 0
        for i, n in enumerate(self.blocks):
            for k in range(n):
                for l in range(n):
                    yield p, i, k, l
                    p += 1

    def star_permutation(self) -> np.ndarray:
        """Permutation sending each matrix unit to its adjoint's index."""
        perm = np.zeros(self.dim, dtype=int)
        for p, i, k, l in self.basis_labels():
            perm[p] = self.basis_index(i, l, k)
        return perm


@dataclass
class AlgebraElement:
    shape: AlgebraShape
    blocks: list[np.ndarray]

    def __post_init__(self) -> None:
        if len(self.blocks) != len(self.shape.blocks):
            raise ShapeMismatch("block count does not match shape")
        mats = []
        for n, b in zip(self.shape.blocks, self.blocks):
            b = require_finite(b, "algebra element block")
            if b.shape != (n, n):
                raise ShapeMismatch(f"block of shape {b.shape}, expected {(n, n)}")
            mats.append(b)
        self.blocks = mats

    # -- arithmetic -------------------------------------------------------

    def _check(self, other: "AlgebraElement") -> None:
        if self.shape != other.shape:
            raise ShapeMismatch("elements live in different algebras")

    def __add__(self, other: "AlgebraElement") -> "AlgebraElement":
        self._check(other)
        return AlgebraElement(self.shape, [a + b for a, b in zip(self.blocks, other.blocks)])

    def __sub__(self, other: "AlgebraElement") -> "AlgebraElement":
        self._check(other)
        return AlgebraElement(self.shape, [a - b for a, b in zip(self.blocks, other.blocks)])

    def __mul__(self, other: "AlgebraElement") -> "AlgebraElement":
        self._check(other)
        return AlgebraElement(self.shape, [a @ b for a, b in zip(self.blocks, other.blocks)])

    def scale(self, c: complex) -> "AlgebraElement":
        return AlgebraElement(self.shape, [c * b for b in self.blocks])

    def star(self) -> "AlgebraElement":
        return AlgebraElement(self.shape, [b.conj().T for b in self.blocks])

    def norm(self) -> float:
        return max(operator_norm(b) for b in self.blocks)

    def trace(self) -> complex:
        return complex(sum(np.trace(b) for b in self.blocks))

    def coeffs(self) -> np.ndarray:
        """Coordinates in the matrix-unit basis (row-major per block)."""
        return np.concatenate([b.reshape(-1) for b in self.blocks])

    def is_hermitian(self, tol: Tolerance = DEFAULT_TOL) -> bool:
        return (self - self.star()).norm() <= tol.ctol * (1.0 + self.norm())


def zero_element(shape: AlgebraShape) -> AlgebraElement:
    return AlgebraElement(shape, [np.zeros((n, n), dtype=complex) for n in shape.blocks])


def unit_element(shape: AlgebraShape) -> AlgebraElement:
    return AlgebraElement(shape, [np.eye(n, dtype=complex) for n in shape.blocks])


def basis_element(shape: AlgebraShape, p: int) -> AlgebraElement:
    return from_coeffs(shape, np.eye(shape.dim, dtype=complex)[:, p])


def from_coeffs(shape: AlgebraShape, vec: np.ndarray) -> AlgebraElement:
    vec = np.asarray(vec, dtype=complex).reshape(-1)
    if vec.size != shape.dim:
        raise ShapeMismatch(f"coefficient vector of length {vec.size}, expected {shape.dim}")
    offs = shape.offsets
    return AlgebraElement(
        shape,
        [vec[offs[i] : offs[i + 1]].reshape(n, n) for i, n in enumerate(shape.blocks)],
    )


def random_element(
    shape: AlgebraShape, rng: np.random.Generator, hermitian: bool = False
) -> AlgebraElement:
    blocks = []
    for n in shape.blocks:
        b = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2.0)
        if hermitian:
            b = (b + b.conj().T) / 2.0
        blocks.append(b)
    return AlgebraElement(shape, blocks)


def left_mult_matrix(a: AlgebraElement) -> np.ndarray:
    """Matrix of x -> a x on matrix-unit coordinates (block diag of a_i kron I)."""
    mats = [np.kron(b, np.eye(n, dtype=complex)) for b, n in zip(a.blocks, a.shape.blocks)]
    return _block_diag(mats)


def right_mult_matrix(a: AlgebraElement) -> np.ndarray:
    """Matrix of x -> x a on matrix-unit coordinates (block diag of I kron a_i^T)."""
    mats = [np.kron(np.eye(n, dtype=complex), b.T) for b, n in zip(a.blocks, a.shape.blocks)]
    return _block_diag(mats)


def _block_diag(mats: list[np.ndarray]) -> np.ndarray:
    total = sum(m.shape[0] for m in mats)
    out = np.zeros((total, total), dtype=complex)
    pos = 0
    for m in mats:
        d = m.shape[0]
        out[pos : pos + d, pos : pos + d] = m
        pos += d
    return out


# -- spec operations ------------------------------------------------------


def algebra_ops(
    a: AlgebraElement, b: AlgebraElement
) -> tuple[AlgebraElement, AlgebraElement, float]:
    """Product ab, adjoint a*, and norm ||a|| in one call."""
    return a * b, a.star(), a.norm()


def trace_functional(a: AlgebraElement) -> complex:
    """The faithful trace tau(a) = sum_i tr(a_i)."""
    return a.trace()


def is_positive(a: AlgebraElement, tol: Tolerance = DEFAULT_TOL) -> tuple[bool, float]:
    """Positivity with witness: every block Hermitian and spectrum >= gate.

    Returns (verdict, minimum eigenvalue across blocks of the hermitized
    element).  A non-Hermitian element is never positive, but the witness is
    still reported.
    """
    hermitian = a.is_hermitian(tol)
    min_eig = np.inf
    for b in a.blocks:
        w, _ = herm_eig((b + b.conj().T) / 2.0, tol)
        min_eig = min(min_eig, float(w[0]))
    gate = -tol.ctol * (1.0 + a.norm())
    return bool(hermitian and min_eig >= gate), float(min_eig)


# -- linear *-maps between algebras ---------------------------------------


@dataclass
class StarMap:
    """Complex-linear map determined by its images on the matrix-unit basis.

    Being a *-homomorphism or unital is a checked property, not structural;
    see check_star_map.
    """

    domain: AlgebraShape
    codomain: AlgebraShape
    images: list[AlgebraElement]

    def __post_init__(self) -> None:
        if len(self.images) != self.domain.dim:
            raise ShapeMismatch("one image per domain basis element required")
        for img in self.images:
            if img.shape != self.codomain:
                raise ShapeMismatch("image outside the stated codomain")

    @cached_property
    def matrix(self) -> np.ndarray:
        """Coefficient matrix (codomain.dim x domain.dim)."""
        if not self.images:
            return np.zeros((self.codomain.dim, 0), dtype=complex)
        return np.stack([img.coeffs() for img in self.images], axis=1)

    def __call__(self, a: AlgebraElement) -> AlgebraElement:
        if a.shape != self.domain:
            raise ShapeMismatch("argument outside the stated domain")
        return from_coeffs(self.codomain, self.matrix @ a.coeffs())


def identity_star_map(shape: AlgebraShape) -> StarMap:
    return StarMap(shape, shape, [basis_element(shape, p) for p in range(shape.dim)])


def compose_star_maps(outer: StarMap, inner: StarMap) -> StarMap:
    if inner.codomain != outer.domain:
        raise ShapeMismatch("star maps do not chain")
    return StarMap(
        inner.domain, outer.codomain, [outer(img) for img in inner.images]
    )


def star_map_distance(r1: StarMap, r2: StarMap) -> float:
    """Max over basis of ||r1(u) - r2(u)|| in the codomain norm."""
    if r1.domain != r2.domain or r1.codomain != r2.codomain:
        raise ShapeMismatch("star maps between different algebras")
    return max(
        (a - b).norm() for a, b in zip(r1.images, r2.images)
    ) if r1.images else 0.0


def check_star_map(rho: StarMap, tol: Tolerance = DEFAULT_TOL) -> CheckReport:
    """Residuals for multiplicativity, *-preservation, and unitality.

    Unitality realizes nondegeneracy in the unital finite-dimensional model.
    """
    rep = CheckReport()
    dom = rho.domain
    scale = max((img.norm() for img in rho.images), default=1.0)
    mult = 0.0
    for p, i, k, l in dom.basis_labels():
        for r, j, k2, l2 in dom.basis_labels():
            # u_p u_r is a matrix unit or zero; only same-block l == k2 survives
            if i != j:
                continue
            prod_img = (
                rho.images[dom.basis_index(i, k, l2)]
                if l == k2
                else zero_element(rho.codomain)
            )
            mult = max(mult, (prod_img - rho.images[p] * rho.images[r]).norm())
    star_perm = dom.star_permutation()
    star = max(
        (rho.images[star_perm[p]] - rho.images[p].star()).norm() for p in range(dom.dim)
    )
    unital = (rho(unit_element(dom)) - unit_element(rho.codomain)).norm()
    gate = tol.ctol * (1.0 + scale * scale)
    rep.add("multiplicativity", mult, gate)
    rep.add("star_preservation", star, gate)
    rep.add("unitality", unital, gate)
    return rep


@dataclass
class Automorphism:
    """A *-automorphism stored with its inverse."""

    forward: StarMap
    inverse: StarMap

    def __post_init__(self) -> None:
        if self.forward.domain != self.forward.codomain:
            raise ShapeMismatch("automorphism must be an endomap")
        if self.inverse.domain != self.forward.domain:
            raise ShapeMismatch("inverse lives on a different algebra")

    @property
    def shape(self) -> AlgebraShape:
        return self.forward.domain

    @property
    def matrix(self) -> np.ndarray:
        return self.forward.matrix

    @property
    def inverse_matrix(self) -> np.ndarray:
        return self.inverse.matrix

    def __call__(self, a: AlgebraElement) -> AlgebraElement:
        return self.forward(a)

    def inv(self, a: AlgebraElement) -> AlgebraElement:
        return self.inverse(a)

    def inverted(self) -> "Automorphism":
        return Automorphism(self.inverse, self.forward)


def identity_automorphism(shape: AlgebraShape) -> Automorphism:
    ident = identity_star_map(shape)
    return Automorphism(ident, identity_star_map(shape))


def compose_automorphisms(outer: Automorphism, inner: Automorphism) -> Automorphism:
    return Automorphism(
        compose_star_maps(outer.forward, inner.forward),
        compose_star_maps(inner.inverse, outer.inverse),
    )


def automorphism_defect(alpha: Automorphism, tol: Tolerance = DEFAULT_TOL) -> CheckReport:
    rep = check_star_map(alpha.forward, tol)
    round_trip = operator_norm(
        alpha.inverse.matrix @ alpha.forward.matrix - np.eye(alpha.shape.dim)
    )
    rep.add("inverse_round_trip", round_trip, tol.ctol)
    return rep


def haar_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary via phase-fixed QR."""
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def inner_automorphism(shape: AlgebraShape, unitaries: list[np.ndarray]) -> Automorphism:
    """Blockwise conjugation a_i -> u_i a_i u_i*."""
    fwd = []
    inv = []
    for p, i, k, l in shape.basis_labels():
        unit = np.zeros((shape.blocks[i], shape.blocks[i]), dtype=complex)
        unit[k, l] = 1.0
        f_blocks = [np.zeros((n, n), dtype=complex) for n in shape.blocks]
        g_blocks = [np.zeros((n, n), dtype=complex) for n in shape.blocks]
        u = unitaries[i]
        f_blocks[i] = u @ unit @ u.conj().T
        g_blocks[i] = u.conj().T @ unit @ u
        fwd.append(AlgebraElement(shape, f_blocks))
        inv.append(AlgebraElement(shape, g_blocks))
    return Automorphism(StarMap(shape, shape, fwd), StarMap(shape, shape, inv))


def block_permutation_automorphism(shape: AlgebraShape, perm: list[int]) -> Automorphism:
    """Permute equal-size blocks: block i of alpha(a) is a_{perm[i]}."""
    if sorted(perm) != list(range(len(shape.blocks))):
        raise ShapeMismatch("not a permutation of the blocks")
    for i, j in enumerate(perm):
        if shape.blocks[i] != shape.blocks[j]:
            raise ShapeMismatch("permutation mixes blocks of different sizes")
    inv_perm = [0] * len(perm)
    for i, j in enumerate(perm):
        inv_perm[j] = i

    def images_for(p_of: list[int]) -> list[AlgebraElement]:
        images = []
        for p, i, k, l in shape.basis_labels():
            blocks = [np.zeros((n, n), dtype=complex) for n in shape.blocks]
            tgt = p_of[i]
            blocks[tgt][k, l] = 1.0
            images.append(AlgebraElement(shape, blocks))
        return images

    # alpha(a)_i = a_{perm[i]}  <=>  matrix unit in block i maps to block inv_perm[i]
    return Automorphism(
        StarMap(shape, shape, images_for(inv_perm)),
        StarMap(shape, shape, images_for(perm)),
    )


def random_automorphism(shape: AlgebraShape, seed) -> Automorphism:
    """Random block permutation composed with blockwise unitary conjugation.

    This family is exhaustive for finite direct sums of matrix blocks.
    """
    rng = np.random.default_rng(seed)
    # permute only inside classes of equal block size
    by_size: dict[int, list[int]] = {}
    for i, n in enumerate(shape.blocks):
        by_size.setdefault(n, []).append(i)
    perm = list(range(len(shape.blocks)))
    for members in by_size.values():
        shuffled = [members[j] for j in rng.permutation(len(members))]
        for src, dst in zip(members, shuffled):
            perm[src] = dst
    swap = block_permutation_automorphism(shape, perm)
    conj = inner_automorphism(
        shape, [haar_unitary(n, rng) for n in shape.blocks]
    )
    return compose_automorphisms(conj, swap)
