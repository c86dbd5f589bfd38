"""Exact scalars: rationals and rational multiples of square roots.

Rationals are plain :class:`fractions.Fraction` values. :class:`ScalarExpr`
covers the ``r*sqrt(s)`` entries that appear in the classical bases (BCC,
FCC, hexagonal prism, ...), which keeps ratios such as
``(-sqrt(2)/3) / (2*sqrt(2)/3) = -1/2`` exact.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Union

from .errors import NoRationalWithinTolerance

Rational = Fraction

_RAT = r"[+-]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?(?:\s*/\s*\d+)?"
_SCALAR_RE = re.compile(
    rf"^\s*(?P<sign>[+-])?\s*(?:(?P<r>{_RAT})\s*\*?\s*)?"
    rf"(?:sqrt\s*\(\s*(?P<s>{_RAT})\s*\))?\s*(?:/\s*(?P<den>\d+))?\s*$"
)


def _as_fraction(text: str) -> Fraction:
    text = text.replace(" ", "")
    if "/" in text:
        num, den = text.split("/")
        return Fraction(num) / Fraction(den)
    return Fraction(text)


def _is_square(q: Fraction) -> bool:
    if q < 0:
        return False
    n, d = q.numerator, q.denominator
    return math.isqrt(n) ** 2 == n and math.isqrt(d) ** 2 == d


def _sqrt_exact(q: Fraction) -> Fraction:
    return Fraction(math.isqrt(q.numerator), math.isqrt(q.denominator))


@dataclass(frozen=True)
class ScalarExpr:
    """The real number ``r * sqrt(s)`` (``s is None`` means a plain rational)."""

    r: Fraction
    s: Optional[Fraction] = None

    def __post_init__(self):
        r = Fraction(self.r)
        s = None if self.s is None else Fraction(self.s)
        if s is not None:
            if s <= 0:
                raise ValueError("radicand must be positive")
            if _is_square(s):
                r, s = r * _sqrt_exact(s), None
        if r == 0:
            s = None
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "s", s)

    @property
    def value(self) -> float:
        if self.s is None:
            return float(self.r)
        return float(self.r) * math.sqrt(float(self.s))

    def __float__(self) -> float:
        return self.value

    @property
    def is_zero(self) -> bool:
        return self.r == 0

    @property
    def is_rational(self) -> bool:
        return self.s is None

    def __neg__(self) -> "ScalarExpr":
        return ScalarExpr(-self.r, self.s)

    def ratio(self, other: "ScalarExpr") -> Optional[Fraction]:
        """Exact ``self / other`` when it is rational, else ``None``."""
        if other.is_zero:
            raise ZeroDivisionError("ratio by zero scalar")
        if self.is_zero:
            return Fraction(0)
        s1 = self.s if self.s is not None else Fraction(1)
        s2 = other.s if other.s is not None else Fraction(1)
        q = s1 / s2
        if not _is_square(q):
            return None
        return self.r / other.r * _sqrt_exact(q)

    def __str__(self) -> str:
        if self.s is None:
            return str(self.r)
        if self.r == 1:
            return f"sqrt({self.s})"
        if self.r == -1:
            return f"-sqrt({self.s})"
        return f"{self.r}*sqrt({self.s})"


Scalar = Union[ScalarExpr, Fraction, int, float, str]


def parse_scalar(entry: Scalar) -> ScalarExpr:
    """Parse an integer, ``p/q``, decimal or ``r*sqrt(s)`` entry exactly.

    Floats are read through their shortest decimal repr, so ``0.311``
    becomes ``311/1000``.
    """
    if isinstance(entry, ScalarExpr):
        return entry
    if isinstance(entry, bool):
        raise ValueError(f"not a scalar: {entry!r}")
    if isinstance(entry, (int, Fraction)):
        return ScalarExpr(Fraction(entry))
    if isinstance(entry, float):
        if not math.isfinite(entry):
            raise ValueError(f"non-finite entry {entry!r}")
        return ScalarExpr(Fraction(repr(entry)))
    if not isinstance(entry, str):
        raise ValueError(f"not a scalar: {entry!r}")
    m = _SCALAR_RE.match(entry)
    if not m or (m.group("r") is None and m.group("s") is None):
        raise ValueError(f"cannot parse scalar {entry!r}")
    r = _as_fraction(m.group("r")) if m.group("r") is not None else Fraction(1)
    if m.group("sign") == "-":
        r = -r
    if m.group("den") is not None:
        if m.group("s") is None:
            raise ValueError(f"cannot parse scalar {entry!r}")
        r /= int(m.group("den"))
    s = _as_fraction(m.group("s")) if m.group("s") is not None else None
    return ScalarExpr(r, s)


def rational_reconstruct(x: float, max_den: int = 10**6, tol: float = 1e-9) -> Fraction:
    """Best rational ``p/q`` with ``q <= max_den`` for the float ``x``.

    Raises :class:`NoRationalWithinTolerance` if even the best candidate is
    farther than ``tol`` from ``x``.
    """
    if max_den < 1 or tol <= 0:
        raise ValueError("need max_den >= 1 and tol > 0")
    if not math.isfinite(x):
        raise NoRationalWithinTolerance(f"{x!r} is not finite")
    best = Fraction(x).limit_denominator(max_den)
    err = abs(x - float(best))
    if err > tol:
        raise NoRationalWithinTolerance(
            f"{x!r}: best p/q with q <= {max_den} is {best} (error {err:.3g} > {tol:g})"
        )
    return best
