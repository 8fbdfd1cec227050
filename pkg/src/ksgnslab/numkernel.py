"""Dense complex matrix kernel.

Everything downstream reduces to four primitives on complex double matrices:
Hermitian eigendecomposition, tolerance-based rank/kernel splitting, operator
norms, and pseudo-inverses.  Rank decisions for positive semidefinite matrices
always go through the Hermitian eigendecomposition, never through LU, so that
null spaces of Gram matrices stay numerically stable.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NonFinite, NonHermitian, NotPSD


@dataclass(frozen=True)
class Tolerance:
    """Numerical policy: `rtol` is the relative rank cutoff, `ctol` the
    residual pass threshold."""

    rtol: float = 1e-10
    ctol: float = 1e-8

    def __post_init__(self) -> None:
        if not (0.0 <= self.rtol < 1.0):
            raise ValueError(f"rtol must lie in [0, 1), got {self.rtol}")
        if not self.ctol > 0.0:
            raise ValueError(f"ctol must be positive, got {self.ctol}")


DEFAULT_TOL = Tolerance()


def require_finite(M: np.ndarray, what: str = "matrix") -> np.ndarray:
    M = np.asarray(M, dtype=complex)
    if M.size and not np.all(np.isfinite(M)):
        raise NonFinite(f"{what} contains NaN or Inf entries")
    return M


def operator_norm(M: np.ndarray) -> float:
    """Largest singular value; 0 for empty matrices."""
    M = require_finite(M)
    if M.size == 0:
        return 0.0
    return float(np.linalg.norm(M, 2))


def herm_eig(M: np.ndarray, tol: Tolerance = DEFAULT_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix.

    Returns (eigenvalues ascending, unitary eigenvector matrix).  Raises
    NonHermitian when the defect exceeds ctol * (1 + ||M||).
    """
    M = require_finite(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise NonHermitian(f"expected square matrix, got shape {M.shape}")
    if M.size == 0:
        return np.zeros(0), np.zeros((0, 0), dtype=complex)
    defect = operator_norm(M - M.conj().T)
    if defect > tol.ctol * (1.0 + operator_norm(M)):
        raise NonHermitian(f"Hermitian defect {defect:.3e} exceeds tolerance")
    w, V = np.linalg.eigh((M + M.conj().T) / 2.0)
    return w, V


def rank_kernel(
    G: np.ndarray, tol: Tolerance = DEFAULT_TOL
) -> tuple[int, np.ndarray, np.ndarray]:
    """Split a PSD Hermitian matrix into numerical range and kernel.

    rank = #{eigenvalues > rtol * lambda_max}.  The range basis columns are
    orthonormal eigenvectors of the kept eigenvalues (ascending order within
    each part); the kernel basis spans the rest.  Raises NotPSD when the
    minimum eigenvalue dips below -ctol * (1 + ||G||).
    """
    w, V = herm_eig(G, tol)
    if w.size == 0:
        return 0, np.zeros((0, 0), dtype=complex), np.zeros((0, 0), dtype=complex)
    lam_max = float(w[-1])
    scale = 1.0 + max(abs(float(w[0])), abs(lam_max))
    if float(w[0]) < -tol.ctol * scale:
        raise NotPSD(f"minimum eigenvalue {w[0]:.3e} below PSD gate")
    if lam_max <= 0.0:
        keep = np.zeros(w.shape, dtype=bool)
    else:
        keep = w > tol.rtol * lam_max
    return int(np.count_nonzero(keep)), V[:, keep], V[:, ~keep]


def pseudo_inverse(M: np.ndarray, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Moore-Penrose inverse with singular values below rtol * sigma_max
    treated as zero."""
    M = require_finite(M)
    if M.size == 0:
        return np.zeros((M.shape[1], M.shape[0]), dtype=complex)
    return np.linalg.pinv(M, rcond=tol.rtol)


def herm_power(M: np.ndarray, power: float, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """M**power for Hermitian positive definite M, via eigendecomposition.

    Eigenvalues are clipped at rtol * lambda_max so that inverse powers of a
    well-conditioned Gram matrix never blow up on rounding noise.
    """
    w, V = herm_eig(M, tol)
    if w.size == 0:
        return M.astype(complex)
    floor = tol.rtol * max(float(w[-1]), 0.0)
    w = np.maximum(w, max(floor, np.finfo(float).tiny))
    return (V * (w**power)) @ V.conj().T


def herm_expi(H: np.ndarray, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """exp(iH) for Hermitian H; the result is unitary."""
    w, V = herm_eig(H, tol)
    return (V * np.exp(1j * w)) @ V.conj().T
