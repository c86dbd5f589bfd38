"""Lattice bases.

A basis is stored column-wise: ``matrix[:, j]`` is the basis vector ``v_j``.
When it was built from exact entries the :class:`~babaipoint.exact.ScalarExpr`
columns are kept alongside the float matrix.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .exact import Scalar, ScalarExpr, parse_scalar
from .linalg import qr_decompose


@dataclass(frozen=True, eq=False)
class LatticeBasis:
    matrix: np.ndarray
    exact: Optional[tuple] = None
    permutation: tuple = ()
    name: Optional[str] = None
    Q: np.ndarray = field(init=False, repr=False)
    R: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        V = np.array(self.matrix, dtype=float)
        if V.ndim != 2 or V.shape[0] != V.shape[1] or V.shape[0] < 1:
            raise ValueError(f"basis matrix must be n x n with n >= 1, got {V.shape}")
        V.setflags(write=False)
        object.__setattr__(self, "matrix", V)
        if not self.permutation:
            object.__setattr__(self, "permutation", tuple(range(V.shape[0])))
        Q, R = qr_decompose(V)
        Q.setflags(write=False)
        R.setflags(write=False)
        object.__setattr__(self, "Q", Q)
        object.__setattr__(self, "R", R)

    @classmethod
    def from_vectors(cls, vectors: Sequence[Sequence[Scalar]], name=None) -> "LatticeBasis":
        """Build from a list of basis vectors with exact or float entries."""
        cols = tuple(tuple(parse_scalar(e) for e in v) for v in vectors)
        n = len(cols)
        if any(len(c) != n for c in cols):
            raise ValueError("basis must have n vectors of length n")
        V = np.array([[e.value for e in c] for c in cols]).T
        return cls(V, exact=cols, name=name)

    @classmethod
    def from_matrix(cls, V, name=None) -> "LatticeBasis":
        """Build from a float generator matrix whose columns are the basis vectors."""
        return cls(np.asarray(V, dtype=float), name=name)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @property
    def vectors(self) -> np.ndarray:
        """Basis vectors as rows."""
        return self.matrix.T

    @property
    def det(self) -> float:
        """``|det V|``, the lattice volume."""
        return float(np.prod(np.diag(self.R)))

    @property
    def babai_sizes(self) -> np.ndarray:
        return np.diag(self.R).copy()

    def permuted(self, perm: Sequence[int]) -> "LatticeBasis":
        perm = tuple(int(p) for p in perm)
        if sorted(perm) != list(range(self.n)):
            raise ValueError(f"not a permutation of 0..{self.n - 1}: {perm}")
        exact = None if self.exact is None else tuple(self.exact[p] for p in perm)
        composed = tuple(self.permutation[p] for p in perm)
        return LatticeBasis(self.matrix[:, perm], exact=exact, permutation=composed, name=self.name)

    def scaled(self, c: float) -> "LatticeBasis":
        return LatticeBasis(self.matrix * c, permutation=self.permutation, name=self.name)

    def rotated(self, Q) -> "LatticeBasis":
        return LatticeBasis(np.asarray(Q) @ self.matrix, permutation=self.permutation, name=self.name)

    def triangular(self) -> "LatticeBasis":
        """The same lattice generated by ``R`` (rotated into triangular form)."""
        exact = self.exact if self.exact_upper_triangular() else None
        if exact is not None:
            # rows of R differ from the exact rows at most by a sign
            signs = np.sign(np.diag(self.matrix))
            exact = tuple(
                tuple(e if signs[i] > 0 else -e for i, e in enumerate(col)) for col in exact
            )
        return LatticeBasis(self.R, exact=exact, permutation=self.permutation, name=self.name)

    def exact_upper_triangular(self) -> bool:
        if self.exact is None:
            return False
        return all(self.exact[j][i].is_zero for j in range(self.n) for i in range(j + 1, self.n))

    def exact_entry(self, i: int, j: int) -> Optional[ScalarExpr]:
        """Exact ``V[i, j]`` (coordinate ``i`` of vector ``j``) if known."""
        if self.exact is None:
            return None
        return self.exact[j][i]

    def to_json(self) -> dict:
        if self.exact is not None:
            basis = [[str(e) for e in col] for col in self.exact]
        else:
            basis = [[float(x) for x in col] for col in self.vectors]
        return {"n": self.n, "basis": basis}
