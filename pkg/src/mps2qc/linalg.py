"""Dense complex linear algebra kernel for small matrices.

Everything here is deterministic: the SVD is gauge-fixed, isometry
completion orthonormalizes basis vectors in index order, and fractional
powers use principal-branch eigenphases. All downstream decompositions
inherit their reproducibility from these conventions.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
import scipy.linalg

logger = logging.getLogger(__name__)

__all__ = [
    "Tolerances",
    "DEFAULT_TOLS",
    "SvdResult",
    "svd",
    "closest_unitary",
    "fractional_unitary_power",
    "complete_isometry",
]


@dataclass(frozen=True)
class Tolerances:
    """Central numerical tolerances used across the package.

    dependence: threshold below which a candidate vector is considered
        linearly dependent during isometry completion.
    unitarity: maximum allowed deviation from U^dag U = I.
    equality: tolerance for exact-value comparisons (norms, fidelities).
    """

    dependence: float = 1e-8
    unitarity: float = 1e-10
    equality: float = 1e-12


DEFAULT_TOLS = Tolerances()


class SvdResult(NamedTuple):
    U: np.ndarray
    s: np.ndarray
    Vh: np.ndarray


def _require_finite(a: np.ndarray, name: str = "matrix") -> None:
    if not np.isfinite(a).all():
        raise ValueError(f"{name} contains non-finite entries")


def svd(a: np.ndarray) -> SvdResult:
    """Gauge-fixed singular value decomposition a = U @ diag(s) @ Vh.

    The gauge: in each left singular vector the entry of largest magnitude
    is made real and non-negative, with the compensating phase pushed into
    the corresponding row of Vh. Singular values are non-increasing.
    """
    a = np.asarray(a, dtype=complex)
    _require_finite(a)
    try:
        U, s, Vh = np.linalg.svd(a, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError(
            f"SVD failed to converge for {a.shape[0]}x{a.shape[1]} matrix"
        ) from exc
    U = U.copy()
    Vh = Vh.copy()
    for k in range(s.shape[0]):
        i = int(np.argmax(np.abs(U[:, k])))
        z = U[i, k]
        mag = abs(z)
        if mag > 0.0:
            phase = z / mag
            U[:, k] *= np.conj(phase)
            Vh[k, :] *= phase
    return SvdResult(U, s, Vh)


def closest_unitary(f: np.ndarray, tols: Tolerances = DEFAULT_TOLS) -> np.ndarray:
    """Unitary matrix minimizing the Frobenius distance to square matrix f.

    Computed as U @ Vh from the SVD of f. A zero input is ill-defined; the
    identity is returned and the event is logged.
    """
    f = np.asarray(f, dtype=complex)
    if f.ndim != 2 or f.shape[0] != f.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {f.shape}")
    _require_finite(f)
    if not f.any():
        logger.warning("closest_unitary: zero input is degenerate, returning identity")
        return np.eye(f.shape[0], dtype=complex)
    U, s, Vh = svd(f)
    if s[-1] < 1e-14 * s[0]:
        logger.debug("closest_unitary: rank-deficient input, polar factor not unique")
    return U @ Vh


def _check_unitary(v: np.ndarray, tol: float, name: str) -> None:
    dev = np.max(np.abs(v.conj().T @ v - np.eye(v.shape[0])))
    if dev > tol:
        raise ValueError(f"{name} is not unitary (deviation {dev:.3e} > {tol:.1e})")


def fractional_unitary_power(
    v: np.ndarray, r: float, tols: Tolerances = DEFAULT_TOLS
) -> np.ndarray:
    """Principal-branch fractional power v**r of a unitary matrix, r in [0, 1].

    Eigendecomposes v = W diag(exp(i*theta)) W^dag with theta in (-pi, pi]
    and returns W diag(exp(i*r*theta)) W^dag. Eigenphases within 1e-8 of the
    branch cut at pi are a known hazard; they are logged and the principal
    branch is used regardless.
    """
    v = np.asarray(v, dtype=complex)
    if not 0.0 <= r <= 1.0:
        raise ValueError(f"exponent r must lie in [0, 1], got {r}")
    _require_finite(v)
    # accept anything within 100x the contract tolerance, reject garbage
    _check_unitary(v, 100 * tols.unitarity, "fractional power input")
    if r == 1.0:
        return v.copy()
    if r == 0.0:
        return np.eye(v.shape[0], dtype=complex)
    # Schur of a normal matrix is diagonal, giving orthonormal eigenvectors
    # even for degenerate eigenvalues (np.linalg.eig does not guarantee that).
    t, w = scipy.linalg.schur(v, output="complex")
    theta = np.angle(np.diagonal(t))
    if np.any(np.abs(np.pi - np.abs(theta)) < 1e-8):
        logger.debug("fractional_unitary_power: eigenphase near branch cut at pi")
    return (w * np.exp(1j * r * theta)) @ w.conj().T


def complete_isometry(q: np.ndarray, tols: Tolerances = DEFAULT_TOLS) -> np.ndarray:
    """Extend an isometry q (n x m, n >= m, q^dag q = I) to an n x n unitary.

    The first m columns of the result equal q exactly. The remaining columns
    are built by orthonormalizing standard basis vectors against the current
    column set in index order, skipping candidates whose residual norm falls
    below the dependence tolerance. The procedure is deterministic: identical
    inputs give bit-identical outputs.
    """
    q = np.asarray(q, dtype=complex)
    if q.ndim != 2 or q.shape[0] < q.shape[1]:
        raise ValueError(f"expected a tall matrix, got shape {q.shape}")
    _require_finite(q)
    n, m = q.shape
    dev = np.max(np.abs(q.conj().T @ q - np.eye(m))) if m else 0.0
    if dev > tols.unitarity:
        raise ValueError(f"input is not an isometry (deviation {dev:.3e})")
    if n == m:
        return q.copy()
    cols = [q[:, j] for j in range(m)]
    for j in range(n):
        if len(cols) == n:
            break
        v = np.zeros(n, dtype=complex)
        v[j] = 1.0
        # two Gram-Schmidt passes for numerical orthogonality
        for _ in range(2):
            for c in cols:
                v = v - c * (np.conj(c) @ v)
        nv = np.linalg.norm(v)
        if nv > tols.dependence:
            cols.append(v / nv)
    if len(cols) != n:
        raise ValueError("isometry completion failed to find a full kernel basis")
    return np.stack(cols, axis=1)
