"""Dense complex linear algebra for density matrices and measurement operators.

All functions take plain ``numpy`` arrays.  Matrices are dense, square and
complex; Hermiticity and positivity are checked only where the contract
requires it, so hot loops stay cheap.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimMismatch, NoConvergence, NotHermitian, NotPSD, OutOfRange

HERM_TOL = 1e-10
PSD_TOL = -1e-10


def as_operator(a: np.ndarray) -> np.ndarray:
    """Validate and return ``a`` as a square complex matrix."""
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimMismatch(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a.real)) or not np.all(np.isfinite(a.imag)):
        raise ValueError("matrix entries must be finite")
    return a


def _check_same_dim(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise DimMismatch(f"operands have shapes {a.shape} and {b.shape}")


def _is_hermitian(a: np.ndarray, tol: float = HERM_TOL) -> bool:
    return float(np.max(np.abs(a - a.conj().T))) <= tol


@dataclass(frozen=True)
class HermEig:
    """Spectral decomposition of a Hermitian matrix.

    ``eigenvalues`` are real and sorted in descending order; column ``k`` of
    ``eigenvectors`` is the eigenvector paired with ``eigenvalues[k]``.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def herm_eig(a: np.ndarray) -> HermEig:
    """Full eigendecomposition of a Hermitian matrix.

    Raises NotHermitian when ``max|a - a†|`` exceeds 1e-10 and NoConvergence
    when the underlying iteration gives up.  Output is deterministic for
    identical input.
    """
    a = as_operator(a)
    if not _is_hermitian(a):
        raise NotHermitian(f"max|a - a†| = {np.max(np.abs(a - a.conj().T)):.3e}")
    try:
        w, v = np.linalg.eigh(a)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - numpy rarely fails here
        raise NoConvergence(str(exc)) from exc
    return HermEig(np.ascontiguousarray(w[::-1]), np.ascontiguousarray(v[:, ::-1]))


def trace_norm(o: np.ndarray) -> float:
    """Trace norm ``Tr sqrt(o† o)``, i.e. the sum of singular values.

    Hermitian input (within tolerance) is diagonalized directly; general
    input goes through the singular values of ``o† o``.
    """
    o = as_operator(o)
    if _is_hermitian(o):
        w = np.linalg.eigvalsh((o + o.conj().T) / 2.0)
        return float(np.sum(np.abs(w)))
    w = np.linalg.eigvalsh(o.conj().T @ o)
    return float(np.sum(np.sqrt(np.clip(w, 0.0, None))))


def trace_distance(rho: np.ndarray, sigma: np.ndarray) -> float:
    """Trace distance ``(1/2)‖rho - sigma‖_1`` between density matrices.

    The result is clipped to [0, 1].
    """
    rho = as_operator(rho)
    sigma = as_operator(sigma)
    _check_same_dim(rho, sigma)
    return float(min(max(0.5 * trace_norm(rho - sigma), 0.0), 1.0))


def mat_sqrt_psd(a: np.ndarray) -> np.ndarray:
    """Principal square root of a PSD Hermitian matrix.

    Eigenvalues in [-1e-10, 0) are clamped to zero; anything lower raises
    NotPSD.  Eigenvalues below 1e-14 of the largest are zeroed outright so
    rank-deficient inputs do not pick up O(sqrt(eps)) dust in the null
    space.
    """
    dec = herm_eig(a)
    w = dec.eigenvalues
    if float(np.min(w)) < PSD_TOL:
        raise NotPSD(f"minimum eigenvalue {np.min(w):.3e}")
    w = np.clip(w, 0.0, None)
    if float(w.max()) > 0.0:
        w[w <= 1e-14 * w.max()] = 0.0
    v = dec.eigenvectors
    return (v * np.sqrt(w)) @ v.conj().T


def fidelity(rho: np.ndarray, sigma: np.ndarray) -> float:
    """Square-root fidelity ``Tr sqrt(sqrt(sigma) rho sqrt(sigma))``.

    Evaluated as the nuclear norm of ``sqrt(rho) sqrt(sigma)``, which agrees
    with the trace form but never takes square roots of the triple product's
    eigenvalue roundoff.  Symmetric in its arguments and clipped to [0, 1].
    For a pure ``sigma = |phi><phi|`` this reduces to ``sqrt(<phi|rho|phi>)``.
    """
    rho = as_operator(rho)
    sigma = as_operator(sigma)
    _check_same_dim(rho, sigma)
    prod = mat_sqrt_psd(rho) @ mat_sqrt_psd(sigma)
    sv = np.linalg.svd(prod, compute_uv=False)
    return float(min(max(np.sum(sv), 0.0), 1.0))


def von_neumann_entropy(rho: np.ndarray) -> float:
    """Von Neumann entropy in bits, ``-Tr rho log2 rho``.

    Zero eigenvalues contribute zero; tiny negatives from roundoff are
    clamped.
    """
    dec = herm_eig(rho)
    w = np.clip(dec.eigenvalues, 0.0, 1.0)
    w = w[w > 0.0]
    return float(max(0.0, -np.sum(w * np.log2(w))))


def helstrom_pmax(rho: np.ndarray, sigma: np.ndarray, p: float) -> tuple[float, np.ndarray]:
    """Optimal success probability for discriminating ``rho`` vs ``sigma``.

    With prior ``p`` on ``rho`` the best single-shot strategy succeeds with
    probability ``(1 + ‖p rho - (1-p) sigma‖_1) / 2``; the second return
    value is the projector onto the positive eigenspace of
    ``p rho - (1-p) sigma``, which is measured to decide for ``rho``.
    """
    if not 0.0 <= p <= 1.0:
        raise OutOfRange(f"prior p={p} outside [0, 1]")
    rho = as_operator(rho)
    sigma = as_operator(sigma)
    _check_same_dim(rho, sigma)
    x = p * rho - (1.0 - p) * sigma
    dec = herm_eig(x)
    pmax = 0.5 * (1.0 + float(np.sum(np.abs(dec.eigenvalues))))
    pos = dec.eigenvectors[:, dec.eigenvalues > 0.0]
    proj = pos @ pos.conj().T
    return pmax, proj


def tensor(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product of two operators."""
    return np.kron(as_operator(a), as_operator(b))


def partial_trace(a: np.ndarray, dims: tuple[int, int], keep: str) -> np.ndarray:
    """Partial trace of a bipartite operator on ``C^dA ⊗ C^dB``.

    ``keep`` selects the surviving factor, ``"A"`` or ``"B"``.
    """
    a = as_operator(a)
    da, db = dims
    if a.shape[0] != da * db:
        raise DimMismatch(f"matrix of size {a.shape[0]} is not {da}x{db} bipartite")
    t = a.reshape(da, db, da, db)
    if keep == "A":
        return np.einsum("ijkj->ik", t)
    if keep == "B":
        return np.einsum("ijil->jl", t)
    raise OutOfRange(f"keep must be 'A' or 'B', got {keep!r}")
