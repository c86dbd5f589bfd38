"""Named lattices.

Each entry carries an exact basis when one is known and, where only published
data is available (Barnes-Wall, Leech), the Babai-cell sizes and covering
radius. Names are matched case-insensitively; ``Z^n``/``Zn`` and ``A_n`` take
a dimension suffix (``Z^3``, ``A_5``).
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from .basis import LatticeBasis
from .errors import UnknownLattice


@dataclass(frozen=True, eq=False)
class CatalogEntry:
    name: str
    basis: Optional[LatticeBasis] = None
    covering_radius: Optional[float] = None
    babai_sizes: Optional[tuple] = None
    note: str = ""

    @property
    def n(self) -> int:
        if self.basis is not None:
            return self.basis.n
        return len(self.babai_sizes)

    def sizes(self) -> np.ndarray:
        if self.babai_sizes is not None:
            return np.array(self.babai_sizes, dtype=float)
        return self.basis.babai_sizes


def an_sizes(n: int) -> np.ndarray:
    """Babai sizes ``sqrt((k+1)/k)`` of the standard ``A_n`` basis."""
    k = np.arange(1, n + 1, dtype=float)
    return np.sqrt((k + 1) / k)


def an_covering_radius(n: int) -> float:
    """``r_cov^2 = h (n + 1 - h) / (n + 1)`` with ``h = floor((n + 1)/2)``."""
    h = (n + 1) // 2
    return math.sqrt(h * (n + 1 - h) / (n + 1))


def an_basis(n: int) -> LatticeBasis:
    """``A_n`` embedded in ``R^n`` with Gram matrix ``I + J``.

    ``V = I + c J`` with ``c = (sqrt(n+1) - 1)/n`` gives
    ``V^T V = I + (2c + n c^2) J = I + J``.
    """
    c = (math.sqrt(n + 1) - 1) / n
    return LatticeBasis.from_matrix(np.eye(n) + c * np.ones((n, n)), name=f"A_{n}")


def _e8() -> LatticeBasis:
    rows = [["2"] + ["0"] * 7]
    for i in range(6):
        r = ["0"] * 8
        r[i], r[i + 1] = "-1", "1"
        rows.append(r)
    rows.append(["1/2"] * 8)
    return LatticeBasis.from_vectors(rows, name="E8")


_FIXED = {
    "hexagonal": (
        [["1", "0"], ["1/2", "sqrt(3)/2"]],
        "two-dimensional hexagonal lattice (A2)",
    ),
    "bcc": (
        [["1", "0", "0"], ["-1/3", "2/3*sqrt(2)", "0"], ["-1/3", "-1/3*sqrt(2)", "sqrt(2/3)"]],
        "body-centered cubic",
    ),
    "fcc": (
        [["1", "0", "0"], ["-1/2", "-1/2", "sqrt(1/2)"], ["0", "1", "0"]],
        "face-centered cubic",
    ),
    "hp": (
        [["1", "0", "0"], ["-1/2", "-1/2*sqrt(3)", "0"], ["0", "0", "1"]],
        "regular hexagonal prism lattice",
    ),
    "hrd": (
        [["1", "0", "0"], ["-sqrt(1/5)", "2*sqrt(1/5)", "0"], ["0", "-1/2", "1/2*sqrt(5)"]],
        "lattice with a hexa-rhombic dodecahedral Voronoi cell",
    ),
    "example3": (
        [["1", "0"], ["311/1000", "101/100"]],
        "two-dimensional lattice with a large ratio denominator",
    ),
    "bcc-alt": (
        [["1", "0", "0"], ["0", "1", "0"], ["-sqrt(17/108)", "-1/2", "sqrt(16/27)"]],
        "well-rounded lattice with the BCC packing density and a smaller error probability",
    ),
}

_ALIASES = {
    "a2": "hexagonal",
    "hex": "hexagonal",
    "lambda_hp": "hp",
    "lambda_hrd": "hrd",
    "bw16": "bw16",
    "barnes-wall": "bw16",
    "leech": "leech",
    "lambda24": "leech",
    "e8": "e8",
    "comparison": "bcc-alt",
}


def catalog_names():
    return ["Z^n", "A_n", "hexagonal", "BCC", "FCC", "hp", "hrd", "E8", "BW16", "Leech", "example3", "bcc-alt"]


def catalog_lookup(name: str) -> CatalogEntry:
    key = name.strip().lower()
    key = _ALIASES.get(key, key)
    m = re.fullmatch(r"z\^?(\d+)", key)
    if m:
        n = int(m.group(1))
        if n < 1:
            raise UnknownLattice(name)
        B = LatticeBasis.from_vectors(np.eye(n, dtype=int).tolist(), name=f"Z^{n}")
        return CatalogEntry(f"Z^{n}", B, math.sqrt(n) / 2, tuple([1.0] * n), "integer lattice")
    m = re.fullmatch(r"a_?(\d+)", key)
    if m and key != "a2":
        n = int(m.group(1))
        if n < 1:
            raise UnknownLattice(name)
        return CatalogEntry(
            f"A_{n}", an_basis(n), an_covering_radius(n), tuple(an_sizes(n)), "root lattice A_n, Gram I + J"
        )
    if key in _FIXED:
        vecs, note = _FIXED[key]
        return CatalogEntry(key if key not in ("bcc", "fcc") else key.upper(),
                            LatticeBasis.from_vectors(vecs, name=key), note=note)
    if key == "e8":
        return CatalogEntry("E8", _e8(), 1.0, None, "Gosset lattice, norm-2 minimal vectors")
    if key == "bw16":
        sizes = (4.0,) + (2.0,) * 10 + (1.0,) * 5
        return CatalogEntry("BW16", None, math.sqrt(3), sizes, "Barnes-Wall lattice, published data")
    if key == "leech":
        sizes = (8.0,) + (4.0,) * 11 + (2.0,) * 11 + (1.0,)
        return CatalogEntry("Leech", None, math.sqrt(2), sizes, "Leech lattice, published data")
    raise UnknownLattice(f"unknown lattice name {name!r}; known: {', '.join(catalog_names())}")


# Table I rows, in order
TABLE1_LATTICES = ("Z^3", "hp", "FCC", "hrd", "BCC")


def wellrounded_basis(beta: float) -> LatticeBasis:
    """Member of the one-parameter well-rounded family, ``0 <= beta <= pi/4``.

    Below ``pi/6`` the third vector tilts in the first coordinate plane
    (hexagonal-prism branch); above it the tilt also enters the second
    coordinate so that all three basis vectors keep unit length.
    """
    if not 0 <= beta <= math.pi / 4 + 1e-12:
        raise ValueError("beta must lie in [0, pi/4]")
    sb, cb = math.sin(beta), math.cos(beta)
    if beta < math.pi / 6:
        V = [[1, 0, 0], [0, 1, 0], [-sb, 0, cb]]
    else:
        V = [[1, 0, 0], [0, 1, 0], [-math.sqrt(max(sb * sb - 0.25, 0.0)), -0.5, cb]]
    return LatticeBasis.from_matrix(np.array(V, dtype=float).T, name=f"wellrounded({beta:.6g})")


def exact_fraction_basis(vectors) -> LatticeBasis:
    return LatticeBasis.from_vectors([[Fraction(e) for e in v] for v in vectors])
