"""Molecular input: atoms with radii, file parsing, bounding boxes.

Supported formats are XYZR (one ``x y z r`` line per atom, ``#`` comments)
and the whitespace-delimited PQR subset (ATOM/HETATM records whose last two
numeric fields are charge and radius; the charge is discarded). Lengths are
in Angstrom throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, ParseError, UnknownElementError, ValidationError

__all__ = [
    "Atom",
    "Molecule",
    "RadiusTable",
    "parse_xyzr",
    "parse_pqr",
    "assign_radii",
    "bounding_box",
    "write_xyzr",
    "default_margin",
]


@dataclass(frozen=True)
class Atom:
    """A sphere: center (Angstrom), radius (Angstrom), optional element label."""

    center: tuple[float, float, float]
    radius: float
    element: str | None = None

    def __post_init__(self):
        if not all(math.isfinite(c) for c in self.center):
            raise ValidationError(f"non-finite atom center {self.center}")
        if not (math.isfinite(self.radius) and self.radius > 0):
            raise ValidationError(f"atom radius must be > 0, got {self.radius}")


@dataclass(frozen=True)
class Molecule:
    """An ordered collection of atoms. May be empty."""

    atoms: tuple[Atom, ...]
    name: str = ""

    def __len__(self):
        return len(self.atoms)

    def centers(self) -> np.ndarray:
        """(n, 3) array of atom centers."""
        if not self.atoms:
            return np.zeros((0, 3))
        return np.array([a.center for a in self.atoms], dtype=np.float64)

    def radii(self) -> np.ndarray:
        if not self.atoms:
            return np.zeros(0)
        return np.array([a.radius for a in self.atoms], dtype=np.float64)


class RadiusTable:
    """Case-insensitive element -> radius lookup."""

    def __init__(self, radii: dict[str, float]):
        self._radii = {}
        for symbol, r in radii.items():
            if not (math.isfinite(r) and r > 0):
                raise ValidationError(f"radius for {symbol!r} must be > 0, got {r}")
            self._radii[symbol.strip().lower()] = float(r)

    def __getitem__(self, symbol: str) -> float:
        try:
            return self._radii[symbol.strip().lower()]
        except KeyError:
            raise UnknownElementError(symbol) from None

    def __contains__(self, symbol: str) -> bool:
        return symbol.strip().lower() in self._radii


def parse_xyzr(text: str, name: str = "") -> Molecule:
    """Parse XYZR text: four whitespace-separated numbers per data line.

    Blank lines and lines starting with ``#`` are skipped. Atoms keep file
    order. Raises ParseError/ValidationError with the offending line number.
    """
    atoms = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        if len(fields) != 4:
            raise ParseError(
                f"expected 4 fields 'x y z r', got {len(fields)}", line=lineno
            )
        try:
            x, y, z, r = (float(v) for v in fields)
        except ValueError:
            raise ParseError(f"malformed number in {line!r}", line=lineno) from None
        if not all(math.isfinite(v) for v in (x, y, z, r)):
            raise ValidationError("non-finite coordinate or radius", line=lineno)
        if r <= 0:
            raise ValidationError(f"radius must be > 0, got {r}", line=lineno)
        atoms.append(Atom((x, y, z), r))
    return Molecule(tuple(atoms), name=name)


def parse_pqr(text: str, name: str = "") -> Molecule:
    """Parse the whitespace-delimited PQR subset.

    Only ATOM/HETATM records contribute atoms; every other record type is
    ignored. Fields are whitespace-tokenized (not column-fixed); the last
    two tokens of a record are charge and radius, and the three tokens
    before them are x, y, z.
    """
    atoms = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        rec = raw.split()
        if not rec or rec[0] not in ("ATOM", "HETATM"):
            continue
        if len(rec) < 9:
            raise ParseError(
                f"{rec[0]} record has {len(rec)} fields, expected >= 9", line=lineno
            )
        try:
            x, y, z = (float(v) for v in rec[-5:-2])
            r = float(rec[-1])
            float(rec[-2])  # charge: parsed to validate, then discarded
        except ValueError:
            raise ParseError(
                "malformed coordinate/charge/radius field", line=lineno
            ) from None
        if not all(math.isfinite(v) for v in (x, y, z, r)):
            raise ValidationError("non-finite coordinate or radius", line=lineno)
        if r <= 0:
            raise ValidationError(f"radius must be > 0, got {r}", line=lineno)
        element = rec[2] if len(rec) > 2 else None
        atoms.append(Atom((x, y, z), r, element=element))
    return Molecule(tuple(atoms), name=name)


def assign_radii(symbols: list[str], table: RadiusTable) -> list[float]:
    """Radii for element symbols, in input order. Unknown symbol raises."""
    return [table[s] for s in symbols]


def bounding_box(molecule: Molecule, margin: float = 0.0) -> np.ndarray:
    """Axis-aligned box [lo, hi] enclosing all atom spheres plus a margin.

    Returns a (2, 3) array. Raises DomainError for an empty molecule.
    """
    if len(molecule) == 0:
        raise DomainError("bounding_box of an empty molecule")
    if margin < 0:
        raise DomainError(f"margin must be >= 0, got {margin}")
    c = molecule.centers()
    r = molecule.radii()[:, None]
    lo = (c - r).min(axis=0) - margin
    hi = (c + r).max(axis=0) + margin
    return np.array([lo, hi])


def write_xyzr(molecule: Molecule) -> str:
    """Serialize as XYZR with full round-trip precision."""
    lines = [
        f"{a.center[0]!r} {a.center[1]!r} {a.center[2]!r} {a.radius!r}"
        for a in molecule.atoms
    ]
    return "\n".join(lines) + ("\n" if lines else "")


def default_margin(probe_radius: float, diffusion: float, time: float,
                   sigma: float = 0.0) -> float:
    """Default domain margin beyond the atom spheres.

    probe_radius covers the SAS inflation; 4*sigma_t covers the diffusion
    support that develops by ``time`` (sigma_t^2 = sigma^2 + 2 D t); the
    flat 2 A keeps the clamped domain boundary clear of the surface band.
    """
    sigma_t = math.sqrt(sigma * sigma + 2.0 * diffusion * time)
    return probe_radius + 4.0 * sigma_t + 2.0
