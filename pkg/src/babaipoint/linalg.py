"""Dense kernels: positive-diagonal QR."""

from __future__ import annotations

import numpy as np

from .errors import SingularMatrix


def qr_decompose(V, det_tol: float = 1e-12):
    """Return ``(Q, R)`` with ``V = Q @ R``, ``Q`` orthogonal and ``R`` upper
    triangular with a strictly positive diagonal."""
    V = np.asarray(V, dtype=float)
    if V.ndim != 2 or V.shape[0] != V.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {V.shape}")
    if not np.all(np.isfinite(V)):
        raise ValueError("matrix has non-finite entries")
    n = V.shape[0]
    scale = max(np.abs(V).max(), 1e-300) ** n
    # LAPACK geqrf (Householder), then flip signs so that diag(R) > 0
    Q, R = np.linalg.qr(V)
    if abs(np.prod(np.diag(R))) < det_tol * scale:
        raise SingularMatrix(f"|det V| = {abs(np.prod(np.diag(R))):.3g} is numerically zero")
    signs = np.where(np.diag(R) < 0, -1.0, 1.0)
    R = signs[:, None] * R
    Q = Q * signs[None, :]
    return Q, np.triu(R)


def qr_upper_triangular(V, det_tol: float = 1e-12) -> np.ndarray:
    """Upper-triangular ``R = Q^T V`` with positive diagonal."""
    return qr_decompose(V, det_tol)[1]
