"""Lattice files.

JSON of the form ``{"n": 3, "basis": [[...], [...], [...]]}`` where each
inner list is one basis vector. Entries are integers, ``"p/q"``, decimals or
``"r*sqrt(s)"`` strings and are kept exact. An optional ``"name"`` is carried
through.
"""

from __future__ import annotations

import json
import os

from .basis import LatticeBasis
from .catalog import catalog_lookup
from .errors import DimensionMismatch, ParseError, UnknownLattice
from .exact import parse_scalar


def parse_lattice_data(data, source="<data>") -> LatticeBasis:
    if not isinstance(data, dict):
        raise ParseError(f"{source}: top level must be an object with 'n' and 'basis'")
    n = data.get("n")
    basis = data.get("basis")
    if isinstance(n, bool) or not isinstance(n, int) or n < 1:
        raise ParseError(f"{source}: 'n' must be a positive integer")
    if not isinstance(basis, list):
        raise ParseError(f"{source}: 'basis' must be a list of vectors")
    if len(basis) != n:
        raise DimensionMismatch(f"{source}: expected {n} basis vectors, found {len(basis)}")
    vectors = []
    for i, vec in enumerate(basis, start=1):
        if not isinstance(vec, list):
            raise ParseError(f"{source}: basis vector must be a list", row=i)
        if len(vec) != n:
            raise DimensionMismatch(f"{source}: expected {n} entries, found {len(vec)}", row=i)
        row = []
        for j, entry in enumerate(vec, start=1):
            try:
                row.append(parse_scalar(entry))
            except (ValueError, ZeroDivisionError) as e:
                raise ParseError(f"{source}: bad entry {entry!r}: {e}", row=i, col=j) from None
        vectors.append(row)
    return LatticeBasis.from_vectors(vectors, name=data.get("name"))


def parse_lattice_file(path) -> LatticeBasis:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except json.JSONDecodeError as e:
        raise ParseError(f"{path}: invalid JSON at line {e.lineno}, column {e.colno}: {e.msg}") from None
    return parse_lattice_data(data, str(path))


def resolve_lattice(name_or_path: str) -> LatticeBasis:
    """A lattice file path, or a catalog name with an explicit basis."""
    if os.path.exists(name_or_path):
        return parse_lattice_file(name_or_path)
    entry = catalog_lookup(name_or_path)
    if entry.basis is None:
        raise UnknownLattice(f"{name_or_path!r} has no basis in the catalog (published data only)")
    return entry.basis
