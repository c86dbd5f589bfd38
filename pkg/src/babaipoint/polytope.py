"""Convex polytopes given by half-spaces, in two and three dimensions.

Vertices are found by brute force: every ``d``-subset of boundary planes is
solved and the solutions that satisfy all constraints are kept. With at most
a couple of dozen half-spaces this is cheap and easy to audit.

Volumes are obtained by fanning every facet polygon from the vertex centroid
(``sum area_f * height_f / 3``); areas in 2-D use the shoelace formula.
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import DegenerateInput, Unbounded

EPS_FEAS = 1e-9
EPS_DEDUP = 1e-7
_PROBE = 1e6


class DegenerateVolumeWarning(UserWarning):
    """Emitted when a vertex set is flat and its volume is reported as 0."""


def _normalize(normals, offsets):
    normals = np.atleast_2d(np.asarray(normals, dtype=float))
    offsets = np.asarray(offsets, dtype=float).reshape(-1)
    if normals.shape[0] != offsets.shape[0]:
        raise ValueError("normals and offsets disagree in length")
    norms = np.linalg.norm(normals, axis=1)
    if np.any(norms == 0):
        raise DegenerateInput("zero normal vector")
    return normals / norms[:, None], offsets / norms


def _dedup(points, tol):
    D = np.linalg.norm(points[:, None, :] - points[None, :, :], axis=2)
    close = D <= tol
    removed = np.zeros(len(points), dtype=bool)
    keep = []
    for i in range(len(points)):
        if removed[i]:
            continue
        keep.append(i)
        removed |= close[i]
    return points[keep]


def enumerate_vertices(normals, offsets, eps_feas=EPS_FEAS, eps_dedup=EPS_DEDUP):
    """Vertices of ``{x : normals @ x <= offsets}`` in 2-D or 3-D.

    An empty region yields an empty array. An unbounded region raises
    :class:`Unbounded` (detected with a large bounding-box probe).
    """
    N, c = _normalize(normals, offsets)
    d = N.shape[1]
    if d not in (2, 3):
        raise ValueError("only 2-D and 3-D polytopes are supported")
    if N.shape[0] < d + 1 or np.linalg.matrix_rank(N) < d:
        raise DegenerateInput(f"need at least {d + 1} half-spaces spanning R^{d}")
    scale = max(np.abs(c).max(), 1e-12)
    big = _PROBE * scale
    eye = np.eye(d)
    Np = np.vstack([N, eye, -eye])
    cp = np.concatenate([c, np.full(2 * d, big)])
    combos = np.array(list(itertools.combinations(range(len(cp)), d)))
    A = Np[combos]
    b = cp[combos]
    det = np.linalg.det(A)
    ok = np.abs(det) > 1e-12
    if not ok.any():
        return np.zeros((0, d))
    X = np.linalg.solve(A[ok], b[ok][..., None])[..., 0]
    slack = X @ Np.T - cp
    feas = np.all(slack <= eps_feas * scale, axis=1)
    X = X[feas]
    if len(X) == 0:
        return np.zeros((0, d))
    if np.any(np.abs(X).max(axis=1) > 0.5 * big):
        raise Unbounded("half-space system is unbounded")
    # sort before dedup so the result does not depend on plane order
    X = X[np.lexsort(X.T[::-1])]
    return _dedup(X, eps_dedup * scale)


def _polygon_area(points2d):
    c = points2d.mean(axis=0)
    ang = np.arctan2(points2d[:, 1] - c[1], points2d[:, 0] - c[0])
    p = points2d[np.argsort(ang)]
    x, y = p[:, 0], p[:, 1]
    return 0.5 * abs(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def _volume_from_facets(vertices, normals, offsets, eps):
    if len(vertices) < 4:
        return 0.0
    centroid = vertices.mean(axis=0)
    vol = 0.0
    for n, c in zip(normals, offsets):
        on = vertices[np.abs(vertices @ n - c) <= eps]
        if len(on) < 3:
            continue
        # orthonormal frame of the facet plane
        helper = np.eye(3)[np.argmin(np.abs(n))]
        e1 = np.cross(n, helper)
        e1 /= np.linalg.norm(e1)
        e2 = np.cross(n, e1)
        area = _polygon_area(np.column_stack([on @ e1, on @ e2]))
        vol += area * (c - n @ centroid) / 3.0
    return vol


def _unique_planes(normals, offsets, tol):
    keep_n, keep_c = [], []
    for n, c in zip(normals, offsets):
        if any(np.linalg.norm(n - m) <= tol and abs(c - k) <= tol for m, k in zip(keep_n, keep_c)):
            continue
        keep_n.append(n)
        keep_c.append(c)
    return np.array(keep_n), np.array(keep_c)


def hull_facets(vertices, eps=1e-9):
    """Supporting planes ``(normals, offsets)`` of the convex hull of 3-D points."""
    P = np.asarray(vertices, dtype=float)
    scale = max(np.abs(P).max(), 1e-12)
    tri = np.array(list(itertools.combinations(range(len(P)), 3)))
    n = np.cross(P[tri[:, 1]] - P[tri[:, 0]], P[tri[:, 2]] - P[tri[:, 0]])
    ln = np.linalg.norm(n, axis=1)
    good = ln > 1e-10 * scale**2
    tri, n = tri[good], n[good] / ln[good][:, None]
    c = np.einsum("ij,ij->i", n, P[tri[:, 0]])
    side = P @ n.T - c  # (V, T)
    tol = eps * scale
    below = np.all(side <= tol, axis=0)
    above = np.all(side >= -tol, axis=0)
    n = np.vstack([n[below], -n[above]])
    c = np.concatenate([c[below], -c[above]])
    if len(n) == 0:
        return np.zeros((0, 3)), np.zeros(0)
    return _unique_planes(n, c, 1e-7)


def polytope_volume(vertices) -> float:
    """Volume of the convex hull of at least four 3-D points.

    Flat (coplanar) inputs return ``0.0`` and emit a
    :class:`DegenerateVolumeWarning`.
    """
    P = np.asarray(vertices, dtype=float)
    if P.ndim != 2 or P.shape[1] != 3 or len(P) < 4:
        raise DegenerateInput("need at least four 3-D points")
    if np.linalg.matrix_rank(P[1:] - P[0], tol=1e-10 * max(np.abs(P).max(), 1e-12)) < 3:
        warnings.warn("coplanar vertex set, volume reported as 0", DegenerateVolumeWarning)
        return 0.0
    normals, offsets = hull_facets(P)
    return _volume_from_facets(P, normals, offsets, 1e-9 * max(np.abs(P).max(), 1e-12))


def polygon_area(vertices) -> float:
    P = np.asarray(vertices, dtype=float)
    if len(P) < 3:
        return 0.0
    return _polygon_area(P)


@dataclass(frozen=True, eq=False)
class Polyhedron3:
    """``{x in R^3 : n_i . x <= c_i}`` with unit normals; vertices and volume
    are computed lazily and cached."""

    normals: np.ndarray
    offsets: np.ndarray
    eps_feas: float = EPS_FEAS
    eps_dedup: float = EPS_DEDUP

    def __post_init__(self):
        N, c = _normalize(self.normals, self.offsets)
        if N.shape[1] != 3:
            raise ValueError("Polyhedron3 needs 3-D normals")
        object.__setattr__(self, "normals", N)
        object.__setattr__(self, "offsets", c)

    @classmethod
    def box(cls, sizes, center=(0.0, 0.0, 0.0), **kw) -> "Polyhedron3":
        """Axis-aligned box with the given side lengths."""
        sizes = np.asarray(sizes, dtype=float)
        center = np.asarray(center, dtype=float)
        eye = np.eye(3)
        normals = np.vstack([eye, -eye])
        offsets = np.concatenate([center + sizes / 2, -(center - sizes / 2)])
        return cls(normals, offsets, **kw)

    @cached_property
    def vertices(self) -> np.ndarray:
        return enumerate_vertices(self.normals, self.offsets, self.eps_feas, self.eps_dedup)

    @cached_property
    def volume(self) -> float:
        V = self.vertices
        if len(V) < 4:
            return 0.0
        scale = max(np.abs(self.offsets).max(), 1e-12)
        N, c = _unique_planes(self.normals, self.offsets, 1e-12)
        return _volume_from_facets(V, N, c, 10 * self.eps_feas * scale)

    @property
    def is_empty(self) -> bool:
        return len(self.vertices) == 0


def halfspace_vertices(P: Polyhedron3) -> np.ndarray:
    return P.vertices


def intersect(P: Polyhedron3, Q: Polyhedron3) -> Polyhedron3:
    """Intersection as the union of both constraint sets."""
    return Polyhedron3(
        np.vstack([P.normals, Q.normals]),
        np.concatenate([P.offsets, Q.offsets]),
        eps_feas=min(P.eps_feas, Q.eps_feas),
        eps_dedup=min(P.eps_dedup, Q.eps_dedup),
    )
