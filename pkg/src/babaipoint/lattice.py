"""Low-dimensional lattice geometry.

Reduction, obtuse superbases and Voronoi cells for ``n <= 3``. An obtuse
superbase ``v_0, ..., v_n`` (``v_0 = -sum v_i``, all ``v_i . v_j <= 0``)
yields every Voronoi-relevant vector as a subset sum ``sum_{i in S} v_i``
over strict non-empty ``S``, which makes the Voronoi cell a finite
half-space intersection.

Vonorms are reported as squared lengths ``N(v) = v . v``, conorms as
``p_ij = -v_i . v_j``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .babai import shortest_vector
from .basis import LatticeBasis
from .errors import NoObtuseSuperbaseFound, UnsupportedDimension
from .polytope import Polyhedron3, enumerate_vertices, polygon_area

EPS_CONORM = 1e-9
_MINK_SLACK = 1e-12

CELL_TYPES_3D = (
    "cuboid",
    "hexagonal-prism",
    "rhombic-dodecahedron",
    "hexa-rhombic-dodecahedron",
    "truncated-octahedron",
)


def gram(B: LatticeBasis) -> np.ndarray:
    """``A = V^T V``."""
    V = B.matrix
    A = V.T @ V
    return 0.5 * (A + A.T)


def is_minkowski_reduced(B: LatticeBasis):
    """Check the Gram-matrix inequalities for ``n <= 3``.

    Returns ``(ok, violations)`` where each violation is a short string
    naming the inequality that fails.
    """
    if B.n > 3:
        raise UnsupportedDimension("Minkowski inequalities are tabulated for n <= 3 only")
    A = gram(B)
    n = B.n
    slack = _MINK_SLACK * float(np.max(np.diag(A)))
    bad = []
    if A[0, 0] <= 0:
        bad.append("0 < a11")
    for s in range(n - 1):
        if A[s, s] > A[s + 1, s + 1] + slack:
            bad.append(f"a{s + 1}{s + 1} <= a{s + 2}{s + 2}")
    for s, t in itertools.combinations(range(n), 2):
        if 2 * abs(A[s, t]) > A[s, s] + slack:
            bad.append(f"2|a{s + 1}{t + 1}| <= a{s + 1}{s + 1}")
    for r, s, t in itertools.combinations(range(n), 3):
        # |v_t + e1 v_r + e2 v_s| >= |v_t|; the sign on a_rs is the product e1 e2
        for e1, e2 in itertools.product((1, -1), repeat=2):
            lhs = -2 * (e1 * A[r, t] + e2 * A[s, t] + e1 * e2 * A[r, s])
            if lhs > A[r, r] + A[s, s] + slack:
                sign = lambda e: "+" if e > 0 else "-"
                bad.append(
                    f"-2({sign(e1)}a{r + 1}{t + 1} {sign(e2)} a{s + 1}{t + 1} {sign(e1 * e2)} a{r + 1}{s + 1})"
                    f" <= a{r + 1}{r + 1} + a{s + 1}{s + 1}"
                )
    return not bad, bad


def _lagrange(v1, v2):
    v1, v2 = np.array(v1, float), np.array(v2, float)
    if v1 @ v1 > v2 @ v2:
        v1, v2 = v2, v1
    for _ in range(10000):
        mu = math.floor((v1 @ v2) / (v1 @ v1) + 0.5)
        if mu == 0:
            break
        v2 = v2 - mu * v1
        if v2 @ v2 < v1 @ v1:
            v1, v2 = v2, v1
    return v1, v2


def _size_reduce(vs):
    """Greedy pairwise reduction until no pair can be shortened."""
    vs = [np.array(v, float) for v in vs]
    for _ in range(10000):
        changed = False
        vs.sort(key=lambda v: v @ v)
        for i, j in itertools.permutations(range(len(vs)), 2):
            if vs[i] @ vs[i] > vs[j] @ vs[j]:
                continue
            mu = math.floor((vs[i] @ vs[j]) / (vs[i] @ vs[i]) + 0.5)
            if mu != 0:
                cand = vs[j] - mu * vs[i]
                if cand @ cand < vs[j] @ vs[j] * (1 - 1e-14):
                    vs[j] = cand
                    changed = True
        if not changed:
            return vs
    raise RuntimeError("size reduction did not converge")


def _selling(superbase, tol):
    """Selling reduction of a 3-D superbase to an obtuse one."""
    vs = [np.array(v, float) for v in superbase]
    for _ in range(100000):
        best, pair = tol, None
        for i, j in itertools.combinations(range(4), 2):
            ip = vs[i] @ vs[j]
            if ip > best:
                best, pair = ip, (i, j)
        if pair is None:
            return vs
        i, j = pair
        vi = vs[i].copy()
        for k in range(4):
            if k not in pair:
                vs[k] = vs[k] + vi
        vs[i] = -vi
    raise NoObtuseSuperbaseFound("Selling reduction did not terminate")


def _obtuse_vectors(B: LatticeBasis, eps):
    """Superbase ``[v0, v1, ..., vn]`` with pairwise non-positive products,
    ordered so that ``|v1| <= ... <= |vn| <= |v0|``."""
    n = B.n
    vs = list(B.vectors)
    scale = max(float(np.max(np.sum(B.matrix**2, axis=0))), 1e-300)
    if n == 1:
        return [-vs[0], vs[0]]
    if n == 2:
        v1, v2 = _lagrange(*vs)
        if v1 @ v2 > 0:
            v2 = -v2
        sb = [-(v1 + v2), v1, v2]
    elif n == 3:
        vs = _size_reduce(vs)
        sb = _selling([-(vs[0] + vs[1] + vs[2])] + vs, eps * scale)
    else:
        raise UnsupportedDimension("obtuse superbases are only built for n <= 3")
    sb.sort(key=lambda v: v @ v)
    return [sb[-1]] + sb[:-1]


def minkowski_reduce(B: LatticeBasis) -> LatticeBasis:
    """Minkowski-reduced basis of the same lattice (``n <= 3``).

    2-D uses Lagrange reduction. 3-D uses greedy pairwise reduction followed
    by Selling reduction to an obtuse superbase. The successive minima of a
    3-D lattice are among the seven subset sums of an obtuse superbase, and
    in dimension three they form a basis, so the shortest independent
    subset sums are taken.
    """
    if B.n > 3:
        raise UnsupportedDimension("Minkowski reduction is implemented for n <= 3 only")
    if B.n == 1:
        return LatticeBasis.from_matrix(np.abs(B.matrix), name=B.name)
    sb = _obtuse_vectors(B, EPS_CONORM)
    if B.n == 2:
        return LatticeBasis.from_matrix(np.column_stack(sb[1:]), name=B.name)
    return _reduced_from_superbase(sb, B.det, B.name)


def _reduced_from_superbase(sb, det, name=None) -> LatticeBasis:
    """Reduced basis from the seven subset sums of a 3-D obtuse superbase."""
    sums = [np.sum([sb[i] for i in S], axis=0) for S in _strict_subsets(4) if 0 not in S]
    sums.sort(key=lambda v: v @ v)
    # ties among short vectors matter, so search triples by norm profile
    best = None
    for trip in itertools.combinations(range(7), 3):
        M = np.column_stack([sums[k] for k in trip])
        if abs(abs(np.linalg.det(M)) - det) > 1e-9 * det:
            continue
        C = LatticeBasis.from_matrix(M, name=name)
        if not is_minkowski_reduced(C)[0]:
            continue
        key = tuple(float(sums[k] @ sums[k]) for k in trip)
        if best is None or key < best[0]:
            best = (key, C)
    if best is None:
        raise NoObtuseSuperbaseFound("no reduced triple among the superbase subset sums")
    return best[1]


def unimodular_transform(B: LatticeBasis, C: LatticeBasis, tol=1e-8) -> Optional[np.ndarray]:
    """Integer ``T`` with ``C = B T`` and ``|det T| = 1``, or ``None``."""
    T = np.linalg.solve(B.matrix, C.matrix)
    Ti = np.round(T)
    if np.max(np.abs(T - Ti)) > tol or abs(abs(round(np.linalg.det(Ti))) - 1) > 0:
        return None
    return Ti.astype(np.int64)


@dataclass(frozen=True, eq=False)
class ObtuseSuperbase:
    """``vectors[0] = v_0 = -sum``, ``vectors[1:]`` the basis part."""

    vectors: np.ndarray
    conorms: dict = field(default_factory=dict)
    vonorms: dict = field(default_factory=dict)

    @classmethod
    def from_vectors(cls, vectors) -> "ObtuseSuperbase":
        V = np.array(vectors, dtype=float)
        V.setflags(write=False)
        k = len(V)
        conorms = {(i, j): float(-V[i] @ V[j]) for i, j in itertools.combinations(range(k), 2)}
        vonorms = {}
        for S in _strict_subsets(k):
            if 0 in S:
                continue  # v_S and v_{S^c} = -v_S share a vonorm
            v = V[list(S)].sum(axis=0)
            vonorms[S] = float(v @ v)
        return cls(V, conorms, vonorms)

    @property
    def n(self) -> int:
        return self.vectors.shape[1]

    def basis(self) -> LatticeBasis:
        return LatticeBasis.from_matrix(self.vectors[1:].T)

    def subset_sum(self, S) -> np.ndarray:
        return self.vectors[list(S)].sum(axis=0)

    def reduced_basis(self) -> LatticeBasis:
        """Minkowski-reduced basis built from the superbase (``n <= 3``)."""
        if self.n == 3:
            det = abs(float(np.linalg.det(self.vectors[1:])))
            return _reduced_from_superbase(list(self.vectors), det)
        vs = sorted(self.vectors, key=lambda v: v @ v)[: self.n]
        return LatticeBasis.from_matrix(np.column_stack(vs))


def _strict_subsets(k):
    for r in range(1, k):
        yield from (tuple(c) for c in itertools.combinations(range(k), r))


def obtuse_superbase(B: LatticeBasis, eps_conorm: float = EPS_CONORM) -> ObtuseSuperbase:
    """Obtuse superbase of the lattice generated by ``B`` (``n <= 3``).

    The reduced basis is searched over sign flips and orderings for pairwise
    non-positive inner products; Selling reduction is the fallback.
    """
    if B.n > 3:
        raise UnsupportedDimension("obtuse superbases are only built for n <= 3")
    n = B.n
    red = minkowski_reduce(B).vectors
    scale = float(np.max(np.sum(red**2, axis=1)))
    tol = eps_conorm * scale
    for perm in itertools.permutations(range(n)):
        for signs in itertools.product((1.0, -1.0), repeat=n):
            vs = [signs[k] * red[p] for k, p in enumerate(perm)]
            if all(vs[i] @ vs[j] <= tol for i, j in itertools.combinations(range(n), 2)):
                v0 = -np.sum(vs, axis=0)
                if all(v0 @ v <= tol for v in vs):
                    return ObtuseSuperbase.from_vectors([v0] + vs)
    if n == 3:
        vs = _selling([-red.sum(axis=0)] + list(red), tol)
        if all(vs[i] @ vs[j] <= tol for i, j in itertools.combinations(range(4), 2)):
            vs.sort(key=lambda v: v @ v)
            return ObtuseSuperbase.from_vectors([vs[-1]] + vs[:-1])
    raise NoObtuseSuperbaseFound("no obtuse superbase found (degenerate input?)")


def _connected(nodes, edges):
    nodes = list(nodes)
    if len(nodes) <= 1:
        return True
    seen = {nodes[0]}
    stack = [nodes[0]]
    while stack:
        a = stack.pop()
        for b in nodes:
            if b not in seen and (min(a, b), max(a, b)) in edges:
                seen.add(b)
                stack.append(b)
    return len(seen) == len(nodes)


def relevant_subsets(S: ObtuseSuperbase, eps_conorm: float = EPS_CONORM):
    """Subsets ``T`` (with ``0 not in T``) whose sum ``v_T`` is a relevant vector.

    ``v_T`` spans a facet exactly when ``T`` and its complement are both
    connected in the graph of nonzero conorms.
    """
    k = S.n + 1
    scale = float(np.max(np.sum(S.vectors**2, axis=1)))
    edges = {ij for ij, p in S.conorms.items() if abs(p) > eps_conorm * scale}
    out = []
    for T in _strict_subsets(k):
        if 0 in T:
            continue
        comp = tuple(i for i in range(k) if i not in T)
        if _connected(T, edges) and _connected(comp, edges):
            out.append(T)
    return out


def classify_cell(S: ObtuseSuperbase, eps_conorm: float = EPS_CONORM) -> str:
    """Voronoi cell type from the zero pattern of the conorms."""
    faces = 2 * len(relevant_subsets(S, eps_conorm))
    if S.n == 1:
        return "segment"
    if S.n == 2:
        return {6: "hexagon", 4: "rectangle"}.get(faces, "degenerate")
    scale = float(np.max(np.sum(S.vectors**2, axis=1)))
    zeros = sum(abs(p) <= eps_conorm * scale for p in S.conorms.values())
    if faces == 14:
        return "truncated-octahedron"
    if faces == 12:
        return "hexa-rhombic-dodecahedron" if zeros == 1 else "rhombic-dodecahedron"
    if faces == 8:
        return "hexagonal-prism"
    if faces == 6:
        return "cuboid"
    return "degenerate"


@dataclass(frozen=True, eq=False)
class VoronoiCellSummary:
    cell_type: str
    relevant_vectors: np.ndarray
    vertices: np.ndarray
    r_pack: float
    r_cov: float
    volume: float
    conorms: dict
    normals: np.ndarray = field(repr=False, default=None)
    offsets: np.ndarray = field(repr=False, default=None)

    def polyhedron(self) -> Polyhedron3:
        return Polyhedron3(self.normals, self.offsets)


def voronoi_cell(S, eps_conorm: float = EPS_CONORM) -> VoronoiCellSummary:
    """Voronoi cell of the origin from an obtuse superbase (or a basis)."""
    if isinstance(S, LatticeBasis):
        S = obtuse_superbase(S, eps_conorm)
    n = S.n
    if n not in (2, 3):
        raise UnsupportedDimension("Voronoi cells are built for n in {2, 3}")
    sums = []
    for T in _strict_subsets(n + 1):
        sums.append(S.subset_sum(T))
    sums = np.array(sums)
    normals = sums
    offsets = 0.5 * np.sum(sums**2, axis=1)
    rel = relevant_subsets(S, eps_conorm)
    relevant = np.array([S.subset_sum(T) for T in rel] + [-S.subset_sum(T) for T in rel])
    if n == 3:
        P = Polyhedron3(normals, offsets)
        vertices, volume = P.vertices, P.volume
        nn, cc = P.normals, P.offsets
    else:
        vertices = enumerate_vertices(normals, offsets)
        volume = polygon_area(vertices)
        ln = np.linalg.norm(normals, axis=1)
        nn, cc = normals / ln[:, None], offsets / ln
    r_cov = float(np.max(np.linalg.norm(vertices, axis=1)))
    r_pack = 0.5 * float(np.min(np.linalg.norm(relevant, axis=1)))
    return VoronoiCellSummary(
        classify_cell(S, eps_conorm), relevant, vertices, r_pack, r_cov, float(volume),
        dict(S.conorms), nn, cc,
    )


def ball_volume(n: int, r: float) -> float:
    return math.pi ** (n / 2) / math.gamma(n / 2 + 1) * r**n


def minimum_distance(B: LatticeBasis) -> float:
    if B.n <= 3:
        if B.n == 1:
            return abs(float(B.matrix[0, 0]))
        S = obtuse_superbase(B)
        return float(min(np.linalg.norm(S.subset_sum(T)) for T in _strict_subsets(B.n + 1)))
    return shortest_vector(B)[1]


def packing_density(B: LatticeBasis) -> float:
    """``vol S(0, d_min/2) / |det V|``."""
    return ball_volume(B.n, minimum_distance(B) / 2) / B.det


def covering_radius(B: LatticeBasis) -> float:
    if B.n == 1:
        return abs(float(B.matrix[0, 0])) / 2
    if B.n > 3:
        raise UnsupportedDimension("covering radius is only computed for n <= 3; use the catalog")
    return voronoi_cell(B).r_cov
