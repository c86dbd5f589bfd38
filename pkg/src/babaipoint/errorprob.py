"""Probability that the Babai point is not the nearest lattice point.

For a source uniform over a Babai cell the success probability is
``vol(V(0) ∩ B(0)) / vol(B(0))``. It is computed in closed form in 2-D,
by exact polyhedron intersection in 3-D and by Monte Carlo in any
dimension. The Gaussian estimator compares Babai and exact decoding of
noisy lattice points.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from .babai import BatchDecoder
from .basis import LatticeBasis
from .errors import DensityOutOfRange, PreconditionViolation, SingularMatrix, UnsupportedDimension
from .lattice import classify_cell, obtuse_superbase, packing_density, voronoi_cell
from .polytope import Polyhedron3, enumerate_vertices, intersect, polygon_area

HEX_DENSITY = math.pi / (2 * math.sqrt(3))
_CHUNK = 50000


@dataclass
class ErrorProbabilityReport:
    """``P_e`` with the method that produced it.

    For bound methods ``P_c`` is an upper bound on the success probability
    (so ``P_e`` is a lower bound on the error probability).
    """

    P_e: float
    method: str
    uncertainty: float = 0.0
    permutation: Optional[tuple] = None
    per_permutation: list = field(default_factory=list)
    packing_density: Optional[float] = None
    samples: Optional[int] = None
    extra: dict = field(default_factory=dict)

    @property
    def P_c(self) -> float:
        return 1.0 - self.P_e

    @property
    def is_bound(self) -> bool:
        return self.method.endswith("bound")

    def to_json(self) -> dict:
        d = {"method": self.method, "P_e": self.P_e, "P_c": self.P_c, "uncertainty": self.uncertainty}
        if self.is_bound:
            d["bounds"] = "P_c"
        if self.permutation is not None:
            d["permutation"] = list(self.permutation)
        if self.per_permutation:
            d["per_permutation"] = [{"permutation": list(p), "P_e": v} for p, v in self.per_permutation]
        if self.packing_density is not None:
            d["packing_density"] = self.packing_density
        if self.samples is not None:
            d["samples"] = self.samples
        for k, v in self.extra.items():
            d[k] = _jsonable(v)
        return d


def _jsonable(v):
    if isinstance(v, np.ndarray):
        return v.tolist()
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    return v


# ---------------------------------------------------------------- 2-D


def closed_form_2d(a: float, b: float) -> float:
    """``(-a - a^2) / (4 b^2)`` for the basis ``(1, 0), (a, b)``."""
    return (-a - a * a) / (4 * b * b)


def closed_form_2d_exact(a, b_squared) -> Fraction:
    """Exact ``(-a - a^2) / (4 b^2)`` from rational ``a`` and ``b^2``."""
    a, b2 = Fraction(a), Fraction(b_squared)
    if b2 <= 0:
        raise PreconditionViolation("b^2 must be positive")
    return (-a - a * a) / (4 * b2)


def voronoi_vertices_2d(a: float, b: float) -> np.ndarray:
    """Voronoi vertices of the lattice with basis ``(1, 0), (a, b)``, ``-1/2 <= a <= 0``."""
    y1 = (a * a + b * b + a) / (2 * b)
    y2 = (b * b - a * a - a) / (2 * b)
    p = np.array([[0.5, y1], [-0.5, y1], [a + 0.5, y2]])
    return np.vstack([p, -p])


def perr_2d_closed_form(a: float, b: float, tol: float = 1e-12) -> ErrorProbabilityReport:
    """Closed-form error probability for a reduced 2-D basis ``(1, 0), (a, b)``."""
    bad = []
    if b <= 0:
        bad.append("b > 0")
    if a > tol:
        bad.append("a <= 0")
    if a < -0.5 - tol:
        bad.append("a >= -1/2 (2|a12| <= a11)")
    if a * a + b * b < 1 - tol:
        bad.append("a^2 + b^2 >= 1 (a11 <= a22)")
    if bad:
        raise PreconditionViolation(f"(a, b) = ({a}, {b}) violates: " + "; ".join(bad))
    P = closed_form_2d(a, b) + 0.0  # no negative zero at a = 0
    return ErrorProbabilityReport(
        max(P, 0.0), "closed-form", packing_density=math.pi / (4 * b),
        extra={"vertices": voronoi_vertices_2d(a, b)},
    )


def _polygon_perr(R) -> float:
    cell = voronoi_cell(LatticeBasis.from_matrix(R))
    box_n = np.vstack([np.eye(2), -np.eye(2)])
    box_c = np.concatenate([np.diag(R), np.diag(R)]) / 2
    N = np.vstack([cell.normals, box_n])
    c = np.concatenate([cell.offsets, box_c])
    V = enumerate_vertices(N, c)
    return 1.0 - polygon_area(V) / float(np.prod(np.diag(R)))


def perr_2d_from_basis(B: LatticeBasis) -> ErrorProbabilityReport:
    """2-D error probability by exact polygon intersection for any basis.

    When the normalised triangular basis ``(1, 0), (a, b)`` is reduced the
    closed form is also evaluated (reflection makes ``P_e`` even in ``a``).
    """
    if B.n != 2:
        raise UnsupportedDimension("perr_2d_from_basis needs n = 2")
    R = B.R
    a, b = R[0, 1] / R[0, 0], R[1, 1] / R[0, 0]
    P = _polygon_perr(R)
    extra = {"a": a, "b": b}
    if abs(a) <= 0.5 + 1e-12 and a * a + b * b >= 1 - 1e-12:
        extra["closed_form"] = closed_form_2d(-abs(a), b)
    return ErrorProbabilityReport(max(P, 0.0), "polyhedral", packing_density=packing_density(B), extra=extra)


def min_perr_given_density_2d(density: float):
    """``(a*, P_e)``: the smallest 2-D error probability at packing density ``density``."""
    if not 0 < density <= HEX_DENSITY * (1 + 1e-12):
        raise DensityOutOfRange(f"density must lie in (0, {HEX_DENSITY:.6f}], got {density}")
    b = math.pi / (4 * density)
    if density <= math.pi / 4:
        a = 0.0
    else:
        a = -math.sqrt(max(1 - b * b, 0.0))
    a = max(a, -0.5)
    return a, perr_2d_closed_form(a, b, tol=1e-9).P_e


# ---------------------------------------------------------------- 3-D


def perr_polyhedral_fixed(B: LatticeBasis):
    """``(P_e, cell)`` for the basis order as given (``n = 3``)."""
    T = B.triangular()
    cell = voronoi_cell(T)
    box = Polyhedron3.box(T.babai_sizes)
    inter = intersect(cell.polyhedron(), box)
    P_c = inter.volume / box.volume
    return min(max(1.0 - P_c, 0.0), 1.0), cell, inter.volume


def perr_3d_polyhedral(B: LatticeBasis, search_permutations: bool = True) -> ErrorProbabilityReport:
    """Error probability of the 3-D uniform case by exact volume computation.

    With ``search_permutations`` every ordering of the basis vectors is tried
    and the smallest ``P_e`` is reported together with the full list.
    """
    if B.n != 3:
        raise UnsupportedDimension("perr_3d_polyhedral needs n = 3")
    perms = list(itertools.permutations(range(3))) if search_permutations else [tuple(range(3))]
    results = []
    cell = None
    for p in perms:
        P, c, _ = perr_polyhedral_fixed(B.permuted(p))
        cell = cell or c
        results.append((tuple(p), float(P)))
    best = min(results, key=lambda t: t[1])
    return ErrorProbabilityReport(
        best[1], "polyhedral", permutation=best[0], per_permutation=results,
        packing_density=packing_density(B), extra={"cell_type": cell.cell_type},
    )


# ---------------------------------------------------------------- Monte Carlo


def _spawn(seed, workers):
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(workers)]


def _split(total, parts):
    base, rem = divmod(total, parts)
    return [base + (i < rem) for i in range(parts)]


def _run_workers(fn, seed, samples, workers):
    rngs = _spawn(seed, workers)
    counts = _split(samples, workers)
    if workers == 1:
        return [fn(rngs[0], counts[0])]
    with ThreadPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, rngs, counts))


def perr_mc_uniform(B: LatticeBasis, samples: int, seed: int, workers: int = 1) -> ErrorProbabilityReport:
    """Monte Carlo ``P_e`` for a source uniform over the Babai cell.

    Success means the exact closest point of ``x`` is the origin. Results are
    deterministic for a fixed ``(seed, workers)``.
    """
    R = B.triangular().R
    dec = BatchDecoder(R)
    half = np.diag(R) / 2

    def work(rng, N):
        ok = 0
        for start in range(0, N, _CHUNK):
            k = min(_CHUNK, N - start)
            X = rng.uniform(-half, half, size=(k, len(half)))
            U = dec.closest(X)
            ok += int(np.sum(~U.any(axis=1)))
        return ok

    ok = sum(_run_workers(work, seed, samples, workers))
    p = 1.0 - ok / samples
    return ErrorProbabilityReport(
        p, "monte-carlo", math.sqrt(p * (1 - p) / samples), samples=samples,
        extra={"seed": seed, "workers": workers},
    )


def perr_mc_gaussian(B: LatticeBasis, sigma: float, samples: int, seed: int, workers: int = 1) -> ErrorProbabilityReport:
    """Monte Carlo ``P_e`` when a lattice point is observed in isotropic Gaussian noise.

    The full estimate counts ``babai(z) == closest(z)``; ``T`` counts the
    dominant term where both decoders return the transmitted point.
    """
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    R = B.triangular().R
    dec = BatchDecoder(R)
    n = R.shape[0]

    def work(rng, N):
        ok = t = 0
        for start in range(0, N, _CHUNK):
            k = min(_CHUNK, N - start)
            Z = sigma * rng.standard_normal((k, n))
            Ub = dec.babai(Z)
            Uc = dec.closest(Z, Ub)
            same = np.all(Ub == Uc, axis=1)
            ok += int(same.sum())
            t += int(np.sum(same & ~Ub.any(axis=1)))
        return ok, t

    res = _run_workers(work, seed, samples, workers)
    ok = sum(r[0] for r in res)
    t = sum(r[1] for r in res)
    p = 1.0 - ok / samples
    T = t / samples
    return ErrorProbabilityReport(
        p, "monte-carlo", math.sqrt(p * (1 - p) / samples), samples=samples,
        extra={"sigma": sigma, "T": T, "T_se": math.sqrt(T * (1 - T) / samples), "seed": seed, "workers": workers},
    )


# ---------------------------------------------------------------- sweeps


def wellrounded_sweep(betas):
    """Rows ``(beta, density, P_e, cell_type, prism closed form or None)``."""
    from .catalog import wellrounded_basis

    rows = []
    for beta in betas:
        B = wellrounded_basis(beta)
        rep = perr_3d_polyhedral(B)
        prism = None
        if beta <= math.pi / 6 + 1e-12:
            prism = closed_form_2d(-math.sin(beta), math.cos(beta))
        rows.append({
            "beta": float(beta),
            "density": math.pi / (6 * math.cos(beta)),
            "density_computed": rep.packing_density,
            "P_e": rep.P_e,
            "cell_type": rep.extra["cell_type"],
            "P_e_prism_closed_form": prism,
        })
    return rows


def is_obtuse_basis(V, tol=1e-12) -> bool:
    """True when the columns of ``V`` and ``-sum`` are pairwise non-acute."""
    vs = [V[:, j] for j in range(V.shape[1])]
    vs.append(-np.sum(vs, axis=0))
    return all(vs[i] @ vs[j] <= tol for i, j in itertools.combinations(range(len(vs)), 2))


def random_superbase_scatter(count: int, seed: int, min_density: float = 0.4, max_attempts: Optional[int] = None):
    """Random bases ``(1,0,0), (a,b,0), (c,d,e)`` that form obtuse superbases
    with packing density above ``min_density``, with their ``P_e``."""
    if count < 1:
        raise ValueError("count must be >= 1")
    rng = np.random.default_rng(seed)
    max_attempts = max_attempts or 2000 * count
    rows = []
    attempts = 0
    while len(rows) < count and attempts < max_attempts:
        attempts += 1
        a, c = rng.uniform(-0.5, 0.0, size=2)
        b, d, e = rng.uniform(-2.0, 2.0, size=3)
        V = np.array([[1, 0, 0], [a, b, 0], [c, d, e]], dtype=float).T
        if not is_obtuse_basis(V) or abs(np.linalg.det(V)) < 1e-6:
            continue
        try:
            B = LatticeBasis.from_matrix(V)
            dens = packing_density(B)
            if dens <= min_density:
                continue
            rep = perr_3d_polyhedral(B)
        except SingularMatrix:
            continue
        rows.append({
            "density": dens, "P_e": rep.P_e, "cell_type": rep.extra["cell_type"],
            "a": a, "b": b, "c": c, "d": d, "e": e,
        })
    return rows
