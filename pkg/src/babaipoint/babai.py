"""Nearest-plane (Babai) decoding and an exact closest-vector oracle.

Rounding is ``[x] = floor(x + 1/2)`` everywhere, i.e. ties go up, so the
Babai cell of the origin is the half-open box ``[-a_i/2, a_i/2)`` in the
coordinates of the triangular basis.

The exact oracle is a Schnorr-Euchner depth-first search whose radius starts
at the Babai distance. It is written for correctness at desk scale
(``n <= 24``), not speed. :class:`BatchDecoder` is the vectorised variant
used by the Monte Carlo estimators.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .basis import LatticeBasis
from .errors import DimensionTooLarge, ZeroDiagonal

MAX_DIM = 24
_REL_MARGIN = 1e-9


def nearest_integer(x):
    """``floor(x + 1/2)``; works elementwise on arrays."""
    if np.ndim(x) == 0:
        return math.floor(x + 0.5)
    return np.floor(np.asarray(x, dtype=float) + 0.5).astype(np.int64)


@dataclass(frozen=True, eq=False)
class CvpResult:
    u: np.ndarray
    point: np.ndarray
    dist2: float


@dataclass(frozen=True)
class BabaiCell:
    sizes: tuple

    @property
    def volume(self) -> float:
        return float(np.prod(self.sizes))


def babai_cell(B: LatticeBasis) -> BabaiCell:
    return BabaiCell(tuple(float(a) for a in np.diag(B.R)))


def _check_triangular(R):
    R = np.asarray(R, dtype=float)
    if R.ndim != 2 or R.shape[0] != R.shape[1]:
        raise ValueError("R must be square")
    if np.any(np.diag(R) == 0):
        raise ZeroDiagonal("triangular basis has a zero diagonal entry")
    return R


def babai_coefficients(R, X) -> np.ndarray:
    """Nearest-plane coefficients for each row of ``X`` (shape ``(N, n)``)."""
    R = _check_triangular(R)
    X = np.atleast_2d(np.asarray(X, dtype=float))
    n = R.shape[0]
    U = np.zeros(X.shape, dtype=np.int64)
    for i in range(n - 1, -1, -1):
        t = X[:, i] - U[:, i + 1:] @ R[i, i + 1:]
        U[:, i] = np.floor(t / R[i, i] + 0.5)
    return U


def babai_nearest_plane(R, x) -> CvpResult:
    """Babai point of ``x`` for an upper-triangular generator ``R``.

    ``u_i = [(x_i - sum_{j>i} R[i, j] u_j) / R[i, i]]`` for ``i = n-1, ..., 0``.
    """
    R = _check_triangular(R)
    x = np.asarray(x, dtype=float)
    n = R.shape[0]
    u = np.zeros(n, dtype=np.int64)
    for i in range(n - 1, -1, -1):
        t = x[i] - float(R[i, i + 1:] @ u[i + 1:])
        u[i] = nearest_integer(t / R[i, i])
    p = R @ u
    return CvpResult(u, p, float(np.sum((x - p) ** 2)))


def _zigzag(c):
    k = math.floor(c + 0.5)
    yield k
    step = 1 if c >= k else -1
    lo, hi = k, k
    while True:
        if step > 0:
            hi += 1
            yield hi
            lo -= 1
            yield lo
        else:
            lo -= 1
            yield lo
            hi += 1
            yield hi


def _search(R, y, best_u, best_d, exclude_zero=False):
    """Depth-first search for the point of ``R Z^n`` closest to ``y``.

    ``best_u``/``best_d`` seed the incumbent; a candidate replaces it only
    when strictly closer by more than the safety margin, so the seed wins
    exact ties.
    """
    n = R.shape[0]
    diag = np.diag(R)
    u = np.zeros(n, dtype=np.int64)
    scale = float(np.max(diag) ** 2)
    state = {"u": None if best_u is None else np.array(best_u), "d": best_d}

    def margin():
        return _REL_MARGIN * max(state["d"], scale)

    def rec(i, acc):
        c = (y[i] - float(R[i, i + 1:] @ u[i + 1:])) / diag[i]
        for k in _zigzag(c):
            d = acc + (diag[i] * (c - k)) ** 2
            # zigzag order is nondecreasing in |c - k|
            if d > state["d"] + margin():
                break
            u[i] = k
            if i == 0:
                if exclude_zero and not u.any():
                    continue
                if state["u"] is None or d < state["d"] - margin():
                    state["u"] = u.copy()
                    state["d"] = d
            else:
                rec(i - 1, d)
        u[i] = 0

    rec(n - 1, 0.0)
    return state["u"], state["d"]


def closest_point_triangular(R, y) -> CvpResult:
    """Exact closest point of ``R Z^n`` to ``y`` (``R`` upper triangular)."""
    R = _check_triangular(R)
    if R.shape[0] > MAX_DIM:
        raise DimensionTooLarge(f"n = {R.shape[0]} > {MAX_DIM}")
    y = np.asarray(y, dtype=float)
    b = babai_nearest_plane(R, y)
    u, d = _search(R, y, b.u, b.dist2)
    p = R @ u
    return CvpResult(u, p, float(np.sum((y - p) ** 2)))


def closest_point(B: LatticeBasis, x) -> CvpResult:
    """Exact closest lattice point to ``x`` (original coordinates)."""
    if B.n > MAX_DIM:
        raise DimensionTooLarge(f"n = {B.n} > {MAX_DIM}")
    x = np.asarray(x, dtype=float)
    r = closest_point_triangular(B.R, B.Q.T @ x)
    p = B.matrix @ r.u
    return CvpResult(r.u, p, float(np.sum((x - p) ** 2)))


def shortest_vector(B: LatticeBasis):
    """A nonzero lattice vector of minimal norm and that norm."""
    if B.n > MAX_DIM:
        raise DimensionTooLarge(f"n = {B.n} > {MAX_DIM}")
    R = B.R
    norms2 = np.sum(R**2, axis=0)
    j = int(np.argmin(norms2))
    seed = np.zeros(B.n, dtype=np.int64)
    seed[j] = 1
    u, d = _search(R, np.zeros(B.n), seed, float(norms2[j]), exclude_zero=True)
    v = B.matrix @ u
    return v, float(np.linalg.norm(v))


def enumerate_ball(R, center, radius):
    """All ``u`` with ``||R u - center|| <= radius`` (Fincke-Pohst)."""
    R = _check_triangular(R)
    center = np.asarray(center, dtype=float)
    n = R.shape[0]
    diag = np.diag(R)
    r2 = radius**2
    u = np.zeros(n, dtype=np.int64)
    out = []

    def rec(i, acc):
        c = (center[i] - float(R[i, i + 1:] @ u[i + 1:])) / diag[i]
        half = math.sqrt(max(r2 - acc, 0.0)) / abs(diag[i])
        for k in range(math.ceil(c - half), math.floor(c + half) + 1):
            d = acc + (diag[i] * (c - k)) ** 2
            if d > r2:
                continue
            u[i] = k
            if i == 0:
                out.append(u.copy())
            else:
                rec(i - 1, d)
        u[i] = 0

    rec(n - 1, 0.0)
    return np.array(out, dtype=np.int64).reshape(-1, n)


class BatchDecoder:
    """Vectorised Babai and exact closest-point decoding for a fixed ``R``.

    The residual after Babai rounding lies in the Babai box, whose points are
    within ``rho = |diag R| / 2`` of the origin, so the true nearest point is
    one of the lattice vectors of norm at most ``2 rho``. Those are
    enumerated once.
    """

    def __init__(self, R, max_offsets=20000):
        self.R = _check_triangular(R)
        n = self.R.shape[0]
        rho = 0.5 * float(np.linalg.norm(np.diag(self.R)))
        K = enumerate_ball(self.R, np.zeros(n), 2 * rho * (1 + 1e-9))
        if len(K) > max_offsets:
            raise DimensionTooLarge(f"{len(K)} candidate offsets; use closest_point per sample")
        zero = ~K.any(axis=1)
        self.offsets = np.vstack([K[zero], K[~zero]])
        self.points = self.offsets @ self.R.T
        self.scale = float(np.max(np.diag(self.R)) ** 2)

    def babai(self, X) -> np.ndarray:
        return babai_coefficients(self.R, X)

    def closest(self, X, U_babai=None) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if U_babai is None:
            U_babai = self.babai(X)
        D = X - U_babai @ self.R.T
        d2 = np.sum((D[:, None, :] - self.points[None, :, :]) ** 2, axis=2)
        j = np.argmin(d2, axis=1)
        # keep the Babai point on (near-)ties, like the scalar search
        tie = d2[np.arange(len(j)), j] >= d2[:, 0] - _REL_MARGIN * self.scale
        j = np.where(tie, 0, j)
        return U_babai + self.offsets[j]
