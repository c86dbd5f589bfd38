"""Upper bounds on the success probability in higher dimensions, and the
Gaussian-noise variance threshold.

The source is uniform over a Babai cell with sizes ``a_1 >= ... >= a_n``.
The Chebyshev bound uses the second moment of ``|X|^2``; the exclusion
bound uses that the Voronoi cell fits in a cube of side ``2 r_cov``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np
from scipy.special import gammainc

from .basis import LatticeBasis
from .errorprob import ErrorProbabilityReport
from .errors import ConditionFailed, HypothesisFailed

CHEBYSHEV_CONDITION = "sum(a_i^2)/12 > r_cov^2"


@dataclass(frozen=True)
class BoundInputs:
    sizes: tuple
    r_cov: float

    def __post_init__(self):
        a = tuple(sorted((float(x) for x in self.sizes), reverse=True))
        if not a or min(a) <= 0:
            raise ValueError("Babai sizes must be positive")
        object.__setattr__(self, "sizes", a)

    @property
    def n(self) -> int:
        return len(self.sizes)

    @property
    def delta(self) -> float:
        a = np.array(self.sizes)
        return (np.sum(a**2) / 12 - self.r_cov**2) / self.n

    @property
    def m(self) -> int:
        """Number of sizes exceeding ``2 r_cov``."""
        return int(sum(x > 2 * self.r_cov for x in self.sizes))

    @property
    def delta1(self) -> float:
        a = np.array(self.sizes[self.m:])
        return float(np.sum(a**2) / 12 - self.r_cov**2 * (1 - self.m / 3))

    @classmethod
    def from_catalog(cls, entry) -> "BoundInputs":
        if entry.covering_radius is None:
            raise ValueError(f"{entry.name}: no covering radius available")
        return cls(tuple(entry.sizes()), entry.covering_radius)


def _bound_report(value: float, method: str, **extra) -> ErrorProbabilityReport:
    P_c = min(value, 1.0)
    return ErrorProbabilityReport(1.0 - P_c, method, extra={"P_c_bound": P_c, "raw_bound": value, **extra})


def chebyshev_bound(inp: BoundInputs) -> ErrorProbabilityReport:
    """``P_c <= sum a_i^4 / (180 n^2 delta^2)`` when ``sum a_i^2 / 12 > r_cov^2``."""
    a = np.array(inp.sizes)
    if not np.sum(a**2) / 12 > inp.r_cov**2:
        raise ConditionFailed(
            f"Chebyshev bound needs {CHEBYSHEV_CONDITION}: {np.sum(a**2) / 12:.6g} <= {inp.r_cov**2:.6g}",
            condition=CHEBYSHEV_CONDITION,
        )
    value = float(np.sum(a**4) / (180 * inp.n**2 * inp.delta**2))
    return _bound_report(value, "chebyshev-bound", delta=inp.delta)


def exclusion_bound(inp: BoundInputs) -> ErrorProbabilityReport:
    """``P_c <= (2 r_cov)^m / prod_{i<=m} a_i``; equals 1 when ``m = 0``."""
    m = inp.m
    value = float(np.prod([2 * inp.r_cov / x for x in inp.sizes[:m]])) if m else 1.0
    return _bound_report(value, "exclusion-bound", m=m)


def combined_bound(inp: BoundInputs) -> ErrorProbabilityReport:
    """Exclusion on the ``m`` long sides times Chebyshev on the rest.

    ``P_c <= (2r)^m / prod a_i * (m (2r)^4 + sum_{i>m} a_i^4) / (180 delta_1^2)``;
    for ``m = 0`` this is the Chebyshev bound.
    """
    m = inp.m
    d1 = inp.delta1
    if not d1 > 0:
        raise ConditionFailed(f"combined bound needs delta_1 > 0, got {d1:.6g}", condition="delta_1 > 0")
    two_r = 2 * inp.r_cov
    excl = float(np.prod([two_r / x for x in inp.sizes[:m]])) if m else 1.0
    rest = np.array(inp.sizes[m:])
    cheb = (m * two_r**4 + float(np.sum(rest**4))) / (180 * d1**2)
    return _bound_report(excl * cheb, "combined-bound", m=m, delta1=d1)


@dataclass(frozen=True)
class ANConditionReport:
    n: int
    lhs: Fraction
    r_cov2: Fraction

    @property
    def holds(self) -> bool:
        return self.lhs > self.r_cov2

    def to_json(self) -> dict:
        return {"n": self.n, "sum_a2_over_12": float(self.lhs), "r_cov2": float(self.r_cov2), "holds": self.holds}


def an_condition_check(n: int) -> ANConditionReport:
    """Both sides of the Chebyshev condition for ``A_n``, in exact rationals.

    ``a_k^2 = (k+1)/k`` and ``r_cov^2 = h (n+1-h)/(n+1)``, ``h = floor((n+1)/2)``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    lhs = sum((Fraction(k + 1, k) for k in range(1, n + 1)), Fraction(0)) / 12
    h = (n + 1) // 2
    return ANConditionReport(n, lhs, Fraction(h * (n + 1 - h), n + 1))


def chi2_cdf(x, n) -> float:
    """Chi-square CDF with ``n`` degrees of freedom (regularised lower gamma)."""
    return float(gammainc(n / 2, np.asarray(x, dtype=float) / 2))


@dataclass
class GaussianThresholdReport:
    n: int
    r_pack: float
    sizes: tuple
    volume: float
    sharp: float
    relaxed: float
    sigma: Optional[float] = None
    chi2: Optional[float] = None

    def to_json(self) -> dict:
        return {
            "n": self.n, "r_pack": self.r_pack, "sizes": list(self.sizes), "volume": self.volume,
            "sigma2_threshold_sharp": self.sharp, "sigma2_threshold_relaxed": self.relaxed,
            "sigma": self.sigma, "chi2_cdf": self.chi2,
        }


def gaussian_threshold(B: Optional[LatticeBasis] = None, sigma: Optional[float] = None, *,
                       sizes=None, r_pack: Optional[float] = None, volume: Optional[float] = None,
                       tol: float = 1e-12) -> GaussianThresholdReport:
    """Noise-variance thresholds below which Babai decoding becomes exact as ``n`` grows.

    ``sharp = r_pack^2 / n`` and ``relaxed = vol^(2/n) / 4``. Requires
    ``r_pack <= a_i / 2`` for every Babai size. Sizes, packing radius and
    volume may be given directly (large ``n`` without enumeration).
    """
    if sizes is None:
        sizes = tuple(float(x) for x in B.babai_sizes)
    sizes = tuple(float(x) for x in sizes)
    n = len(sizes)
    if r_pack is None:
        from .lattice import minimum_distance

        r_pack = minimum_distance(B) / 2
    if volume is None:
        volume = B.det if B is not None else float(np.prod(sizes))
    bad = [i + 1 for i, a in enumerate(sizes) if r_pack > a / 2 * (1 + tol)]
    if bad:
        raise HypothesisFailed(f"r_pack = {r_pack:.6g} exceeds a_i/2 for i = {bad}", offending=bad)
    rep = GaussianThresholdReport(n, r_pack, sizes, volume, r_pack**2 / n, volume ** (2 / n) / 4)
    if sigma is not None:
        rep.sigma = sigma
        rep.chi2 = chi2_cdf(r_pack**2 / sigma**2, n)
    return rep
