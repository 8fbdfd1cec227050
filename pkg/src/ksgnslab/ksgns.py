"""The KSGNS dilation of a completely positive map and its functorial layer.

Given phi: A -> L(E) completely positive, the dilation space is the quotient
of the pre-module on the basis {a_p (x) e_q} (dimension dim_A * dim_E) whose
pairing is <a (x) x, a' (x) x'> = <x, phi(a* a') x'>_E, with B acting on the
E slot.  Left multiplication descends to the quotient and gives the dilated
representation pi_phi; the embedding V_phi sends x to the class of 1 (x) x,
which is the unital collapse of the approximate-unit limit.

Descent of pi_phi is verified numerically rather than assumed: invariance of
the Gram kernel under left multiplication is a theorem, but floating point
demands an explicit residual gate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cstar import (
    AlgebraElement,
    basis_element,
    left_mult_matrix,
    unit_element,
)
from .cp import (
    CPMap,
    Intertwiner,
    check_cp,
    check_correspondence,
)
from .errors import (
    NonConvergentInput,
    NotCP,
    ShapeMismatch,
    WellDefinednessViolation,
)
from .hilbert import (
    HilbertModule,
    ModuleMap,
    PreModule,
    adjoint_map,
    module_operator_norm,
    quotient_by_null,
)
from .numkernel import DEFAULT_TOL, Tolerance, operator_norm, pseudo_inverse
from .reporting import CheckReport


@dataclass
class KsgnsTriple:
    """(F_phi, pi_phi, V_phi) plus the quotient data that realized it."""

    source: HilbertModule  # E
    phi: CPMap
    module: HilbertModule  # F_phi
    pi: CPMap  # the dilated representation, a correspondence
    embedding: ModuleMap  # V_phi: E -> F_phi
    q: np.ndarray
    s: np.ndarray
    kernel: np.ndarray

    @property
    def dim(self) -> int:
        return self.module.dim

    def pi_map(self, a: AlgebraElement) -> ModuleMap:
        return self.pi(a)


def _pair_image_tensor(phi: CPMap) -> np.ndarray:
    """M[p, r] = matrix of phi(u_p* u_r); zero unless the units chain."""
    A = phi.algebra
    d = phi.module.dim
    M = np.zeros((A.dim, A.dim, d, d), dtype=complex)
    for p, i, k, l in A.basis_labels():
        for r, j, k2, l2 in A.basis_labels():
            # u_p* u_r = E_{lk} E_{k2 l2} = delta_{ij} delta_{k k2} E_{l l2}
            if i == j and k == k2:
                M[p, r] = phi.images[A.basis_index(i, l, l2)]
    return M


def ksgns_premodule(E: HilbertModule, phi: CPMap) -> PreModule:
    """Pre-module on {a_p (x) e_q} with the dilation pairing."""
    A = phi.algebra
    dA, dE = A.dim, E.dim
    M = _pair_image_tensor(phi)
    action = np.stack(
        [np.kron(np.eye(dA, dtype=complex), E.action[p]) for p in range(E.algebra.dim)]
    ) if E.algebra.dim else np.zeros((0, dA * dE, dA * dE))
    pairing = [
        np.einsum("prjs,qjkl->pqrskl", M, P, optimize=True).reshape(dA * dE, dA * dE, *P.shape[2:])
        for P in E.pairing
    ]
    return PreModule(E.algebra, dA * dE, action, pairing)


def ksgns(E: HilbertModule, phi: CPMap, tol: Tolerance = DEFAULT_TOL) -> KsgnsTriple:
    """Dilate a completely positive map to a representation on F_phi.

    Raises NotCP when the Choi certificate fails and SubmoduleViolation (via
    the quotient) or WellDefinednessViolation when numerics break down.
    """
    if phi.module is not E and phi.module.dim != E.dim:
        raise ShapeMismatch("map does not act on the supplied module")
    ok, mins = check_cp(phi, tol)
    if not ok:
        raise NotCP(f"Choi certificate failed (min eigenvalues {mins})")
    A = phi.algebra
    dA, dE = A.dim, E.dim
    pre = ksgns_premodule(E, phi)
    quot = quotient_by_null(pre, tol)
    F, q, s = quot.module, quot.q, quot.s

    # left multiplication descends to pi_phi
    images = np.zeros((dA, F.dim, F.dim), dtype=complex)
    for p in range(dA):
        L = np.kron(left_mult_matrix(basis_element(A, p)), np.eye(dE, dtype=complex))
        leak = operator_norm(q @ L @ quot.kernel)
        if leak > tol.ctol * (1.0 + operator_norm(L)):
            raise WellDefinednessViolation(
                f"left multiplication leaks out of the null space ({leak:.3e})"
            )
        images[p] = q @ L @ s
    pi = CPMap(A, F, images)

    # V_phi x = class of 1_A (x) x
    unit_coeffs = unit_element(A).coeffs()
    V_pre = np.kron(unit_coeffs.reshape(dA, 1), np.eye(dE, dtype=complex))
    embedding = ModuleMap(E, F, q @ V_pre)
    return KsgnsTriple(E, phi, F, pi, embedding, q, s, quot.kernel)


def spanning_rank(t: KsgnsTriple, tol: Tolerance = DEFAULT_TOL) -> int:
    """Rank of the column family {pi(a_p) V e_q} at the rank cutoff."""
    dA = t.phi.algebra.dim
    cols = [t.pi.images[p] @ t.embedding.matrix for p in range(dA)]
    if not cols or t.module.dim == 0:
        return 0
    S = np.hstack(cols)
    svals = np.linalg.svd(S, compute_uv=False)
    if svals.size == 0 or svals[0] == 0.0:
        return 0
    return int(np.count_nonzero(svals > tol.rtol * svals[0]))


def check_triple(t: KsgnsTriple, tol: Tolerance = DEFAULT_TOL) -> CheckReport:
    """Residuals for the two dilation conditions and the adjoint formula."""
    rep = CheckReport()
    scale = 1.0 + t.phi.norm
    recon = 0.0
    Vs = adjoint_map(t.embedding).matrix
    V = t.embedding.matrix
    for p in range(t.phi.algebra.dim):
        recon = max(
            recon,
            module_operator_norm(
                ModuleMap(t.source, t.source, Vs @ t.pi.images[p] @ V - t.phi.images[p])
            ),
        )
    rep.add("reconstruction", recon, tol.ctol * scale)
    rep.add(
        "spanning_defect", float(t.module.dim - spanning_rank(t, tol)), 0.0
    )
    # V*(class of a (x) y) = phi(a) y, checked on all pre-basis columns
    dA, dE = t.phi.algebra.dim, t.source.dim
    W = Vs @ t.q  # (dE, dA*dE)
    adj_formula = 0.0
    for p in range(dA):
        adj_formula = max(
            adj_formula,
            operator_norm(W[:, p * dE : (p + 1) * dE] - t.phi.images[p]),
        )
    rep.add("embedding_adjoint_formula", adj_formula, tol.ctol * scale)
    rep.merge(check_correspondence(t.pi, tol), prefix="pi_")
    return rep


def triple_uniqueness_unitary(
    t1: KsgnsTriple, t2: KsgnsTriple, tol: Tolerance = DEFAULT_TOL
) -> tuple[ModuleMap, CheckReport]:
    """Solve the B-linear unitary U with U V_1 = V_2 and U pi_1 U* = pi_2.

    Both triples must dilate the same (E, phi); U is solved on the spanning
    columns by pseudo-inverse.
    """
    dA = t1.phi.algebra.dim
    cols1 = np.hstack([t1.pi.images[p] @ t1.embedding.matrix for p in range(dA)])
    cols2 = np.hstack([t2.pi.images[p] @ t2.embedding.matrix for p in range(dA)])
    U = ModuleMap(t1.module, t2.module, cols2 @ pseudo_inverse(cols1, tol))
    rep = CheckReport()
    scale = 1.0 + t1.phi.norm
    Ustar = adjoint_map(U).matrix
    rep.add(
        "unitary",
        max(
            operator_norm(Ustar @ U.matrix - np.eye(t1.module.dim)),
            operator_norm(U.matrix @ Ustar - np.eye(t2.module.dim)),
        ),
        tol.ctol * scale,
    )
    rep.add(
        "embedding_match",
        module_operator_norm(
            ModuleMap(t1.source, t2.module, U.matrix @ t1.embedding.matrix - t2.embedding.matrix)
        ),
        tol.ctol * scale,
    )
    rep.add(
        "representation_match",
        max(
            operator_norm(U.matrix @ t1.pi.images[p] @ Ustar - t2.pi.images[p])
            for p in range(dA)
        ),
        tol.ctol * scale,
    )
    return U, rep


def conjugated_triple(t: KsgnsTriple, Z: ModuleMap) -> KsgnsTriple:
    """Transport a triple along a B-linear unitary Z in L(F_phi)."""
    Zi = adjoint_map(Z).matrix
    images = np.stack([Z.matrix @ img @ Zi for img in t.pi.images])
    return KsgnsTriple(
        t.source,
        t.phi,
        t.module,
        CPMap(t.phi.algebra, t.module, images),
        ModuleMap(t.source, t.module, Z.matrix @ t.embedding.matrix),
        t.q,
        t.s,
        t.kernel,
    )


# -- the endofunctor on intertwiners ----------------------------------------


def ksgns_lift(
    m: Intertwiner,
    t1: KsgnsTriple,
    t2: KsgnsTriple,
    tol: Tolerance = DEFAULT_TOL,
) -> Intertwiner:
    """Lift an intertwiner (eta, alpha) to (eta~, alpha) on the dilations.

    eta~ is the compression of alpha (x) eta to the quotients; the well-
    definedness gate checks that alpha (x) eta maps ker G_1 into ker G_2.
    """
    K = np.kron(m.alpha.matrix, m.eta.matrix)
    leak = operator_norm(t2.q @ K @ t1.kernel)
    if leak > tol.ctol * (1.0 + operator_norm(K)):
        raise WellDefinednessViolation(
            f"alpha (x) eta leaks out of the null space ({leak:.3e})"
        )
    lifted = ModuleMap(t1.module, t2.module, t2.q @ K @ t1.s)
    return Intertwiner(lifted, m.alpha)


def check_lift(
    m: Intertwiner,
    lifted: Intertwiner,
    t1: KsgnsTriple,
    t2: KsgnsTriple,
    tol: Tolerance = DEFAULT_TOL,
) -> CheckReport:
    """Contraction, adjoint formula, intertwining, and embedding compatibility."""
    from .cp import check_morphism

    rep = CheckReport()
    norm_eta = m.norm
    scale = 1.0 + norm_eta
    rep.add(
        "contraction",
        max(0.0, lifted.norm - norm_eta),
        tol.ctol * scale,
    )
    # adjoint sends the class of a (x) y to alpha^{-1}(a) (x) eta*(y)
    K_adj = np.kron(m.alpha.inverse_matrix, adjoint_map(m.eta).matrix)
    rep.add(
        "adjoint_formula",
        operator_norm(adjoint_map(lifted.eta).matrix @ t2.q - t1.q @ K_adj),
        tol.ctol * scale * (1.0 + t1.phi.norm + t2.phi.norm),
    )
    rep.merge(check_morphism(lifted, t1.pi, t2.pi, tol), prefix="pi_")
    rep.add(
        "embedding_compat",
        module_operator_norm(
            ModuleMap(
                t1.source,
                t2.module,
                lifted.eta.matrix @ t1.embedding.matrix
                - t2.embedding.matrix @ m.eta.matrix,
            )
        ),
        tol.ctol * scale,
    )
    return rep


@dataclass
class IdempotencyUnitary:
    """V_{pi_phi}: F_phi -> F_{pi_phi} together with the second-level triple."""

    unitary: ModuleMap
    second: KsgnsTriple


def idempotency_unitary(t: KsgnsTriple, tol: Tolerance = DEFAULT_TOL) -> IdempotencyUnitary:
    """Dilate the dilated representation; its embedding is already unitary."""
    second = ksgns(t.module, t.pi, tol)
    return IdempotencyUnitary(second.embedding, second)


def check_idempotency(
    idem: IdempotencyUnitary, t: KsgnsTriple, tol: Tolerance = DEFAULT_TOL
) -> CheckReport:
    rep = CheckReport()
    V = idem.unitary
    Vs = adjoint_map(V).matrix
    scale = 1.0 + t.phi.norm
    rep.add(
        "unitary",
        max(
            operator_norm(Vs @ V.matrix - np.eye(t.module.dim)),
            operator_norm(V.matrix @ Vs - np.eye(idem.second.module.dim)),
        ),
        tol.ctol * scale,
    )
    rep.add("dim_match", float(idem.second.module.dim - t.module.dim), 0.0)
    inter = max(
        operator_norm(V.matrix @ t.pi.images[p] - idem.second.pi.images[p] @ V.matrix)
        for p in range(t.phi.algebra.dim)
    ) if t.phi.algebra.dim else 0.0
    rep.add("intertwines", inter, tol.ctol * scale)
    return rep


# -- continuity probe --------------------------------------------------------


@dataclass
class ProbeReport:
    input_distances: list[float]
    lifted_distances: list[float]
    constant: float
    final_gate: float

    @property
    def passed(self) -> bool:
        if not self.lifted_distances:
            return True
        bounded = all(
            lift <= self.constant * max(inp, 1e-300) + self.final_gate
            for inp, lift in zip(self.input_distances, self.lifted_distances)
        )
        return bounded and self.lifted_distances[-1] <= self.final_gate


def continuity_probe(
    path: list[Intertwiner],
    target: Intertwiner,
    t1: KsgnsTriple,
    t2: KsgnsTriple,
    samples: list[tuple[np.ndarray, AlgebraElement]],
    tol: Tolerance = DEFAULT_TOL,
) -> ProbeReport:
    """Push a convergent morphism path through the lift and watch the
    pseudo-metric distances decay on the given (x, a) samples.

    The input path must itself converge: if its distances do not fall to
    10 * ctol the probe raises NonConvergentInput.  The pass constant is a
    pragmatic bound, not a sharp one.
    """
    from .cp import hom_pseudometric

    def max_dist(m: Intertwiner) -> float:
        return max(
            (hom_pseudometric(m, target, x, a) for x, a in samples), default=0.0
        )

    input_distances = [max_dist(m) for m in path]
    gate = 10.0 * tol.ctol
    if input_distances and input_distances[-1] > gate:
        raise NonConvergentInput(
            f"input path distance ends at {input_distances[-1]:.3e} > {gate:.1e}"
        )
    lifted_target = ksgns_lift(target, t1, t2, tol)
    V = t1.embedding.matrix
    pushed = [(V @ np.asarray(x, dtype=complex).reshape(-1), a) for x, a in samples]
    lifted_distances = []
    for m in path:
        lifted = ksgns_lift(m, t1, t2, tol)
        lifted_distances.append(
            max(
                (hom_pseudometric(lifted, lifted_target, x, a) for x, a in pushed),
                default=0.0,
            )
        )
    constant = max(1.0, target.norm * (1.0 + t2.phi.norm)) * 10.0
    return ProbeReport(input_distances, lifted_distances, constant, gate)
