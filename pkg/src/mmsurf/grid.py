"""Uniform Cartesian grids, sphere-union voxel masks, initial density fields.

Node (i, j, k) sits at ``origin + (i hx, j hy, k hz)``. Field values are
stored as float64 with shape (nx, ny, nz) in Fortran order, i.e. x varies
fastest in memory, which is also the on-disk order of the raw dump format.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from . import backends
from .errors import DomainError, ParseError, ShapeError
from .molecule import Molecule

__all__ = [
    "GridSpec",
    "ScalarGrid3",
    "VoxelMask",
    "build_grid",
    "rasterize_spheres",
    "rasterize_spheres_naive",
    "init_density",
    "clamp_excluded",
    "dump_grid",
    "load_grid",
]

_MAGIC = "MMSGRID1"


@dataclass(frozen=True)
class GridSpec:
    """Geometry of a uniform grid: origin, per-axis spacing, node counts."""

    origin: tuple[float, float, float]
    spacing: tuple[float, float, float]
    counts: tuple[int, int, int]

    def __post_init__(self):
        object.__setattr__(self, "origin", tuple(float(v) for v in self.origin))
        object.__setattr__(self, "spacing", tuple(float(v) for v in self.spacing))
        object.__setattr__(self, "counts", tuple(int(v) for v in self.counts))
        if any(h <= 0 or not np.isfinite(h) for h in self.spacing):
            raise DomainError(f"spacing must be positive, got {self.spacing}")
        if any(n < 2 for n in self.counts):
            raise DomainError(f"counts must be >= 2 per axis, got {self.counts}")

    @property
    def node_count(self) -> int:
        nx, ny, nz = self.counts
        return nx * ny * nz

    def axis(self, d: int) -> np.ndarray:
        """Node coordinates along axis d."""
        return self.origin[d] + self.spacing[d] * np.arange(self.counts[d])

    def axes(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return self.axis(0), self.axis(1), self.axis(2)

    def extent(self) -> np.ndarray:
        """(2, 3) array of [lo, hi] node coordinates."""
        lo = np.array(self.origin)
        hi = lo + np.array(self.spacing) * (np.array(self.counts) - 1)
        return np.array([lo, hi])


def _check_match(a: GridSpec, b: GridSpec, what: str):
    if a != b:
        raise ShapeError(f"{what}: grid specs differ ({a} vs {b})")


@dataclass
class ScalarGrid3:
    """A dense scalar field over a grid."""

    spec: GridSpec
    values: np.ndarray

    def __post_init__(self):
        if tuple(self.values.shape) != tuple(self.spec.counts):
            raise ShapeError(
                f"value shape {self.values.shape} != grid counts {self.spec.counts}"
            )
        if self.values.dtype != np.float64:
            self.values = self.values.astype(np.float64)

    def copy(self) -> "ScalarGrid3":
        return ScalarGrid3(self.spec, self.values.copy(order="K"))


@dataclass
class VoxelMask:
    """One boolean per node; True marks the inside of a sphere union."""

    spec: GridSpec
    bits: np.ndarray

    def __post_init__(self):
        if tuple(self.bits.shape) != tuple(self.spec.counts):
            raise ShapeError(
                f"mask shape {self.bits.shape} != grid counts {self.spec.counts}"
            )
        if self.bits.dtype != np.bool_:
            self.bits = self.bits.astype(np.bool_)

    @property
    def inside_count(self) -> int:
        return int(self.bits.sum())


def build_grid(box: np.ndarray, counts=None, spacing=None) -> GridSpec:
    """Grid covering ``box`` ([lo, hi] per axis) inclusively.

    Exactly one of ``counts`` (int or per-axis triple; spacing becomes
    extent/(count-1)) or ``spacing`` (float or triple; counts become the
    smallest node number covering the box) must be given.
    """
    box = np.asarray(box, dtype=np.float64)
    if box.shape != (2, 3):
        raise DomainError(f"box must be (2, 3) [lo, hi], got shape {box.shape}")
    ext = box[1] - box[0]
    if np.any(ext <= 0) or not np.all(np.isfinite(ext)):
        raise DomainError(f"box must have positive extent, got {ext}")
    if (counts is None) == (spacing is None):
        raise DomainError("give exactly one of counts or spacing")
    if counts is not None:
        n = np.broadcast_to(np.asarray(counts, dtype=int), (3,)).copy()
        if np.any(n < 2):
            raise DomainError(f"counts must be >= 2, got {n}")
        h = ext / (n - 1)
    else:
        h = np.broadcast_to(np.asarray(spacing, dtype=np.float64), (3,)).copy()
        if np.any(h <= 0):
            raise DomainError(f"spacing must be positive, got {h}")
        n = np.maximum(np.ceil(ext / h - 1e-9).astype(int) + 1, 2)
    return GridSpec(tuple(box[0]), tuple(h), tuple(int(v) for v in n))


def rasterize_spheres(molecule: Molecule, radius_offset: float,
                      spec: GridSpec) -> VoxelMask:
    """Mark nodes inside the union of closed balls radius r_i + offset.

    Bit-identical to rasterize_spheres_naive: both evaluate the same
    ``|node - c|^2 <= r^2`` float64 predicate, the fast path just restricts
    each atom to its bounding window of nodes.
    """
    if radius_offset < 0:
        raise DomainError(f"radius_offset must be >= 0, got {radius_offset}")
    kern = backends.get_backend()
    bits = kern.rasterize(
        molecule.centers(),
        molecule.radii() + radius_offset,
        np.asarray(spec.origin),
        np.asarray(spec.spacing),
        np.asarray(spec.counts),
    )
    return VoxelMask(spec, np.asfortranarray(bits))


def rasterize_spheres_naive(molecule: Molecule, radius_offset: float,
                            spec: GridSpec) -> VoxelMask:
    """Reference O(atoms x nodes) rasterization; the equivalence oracle."""
    if radius_offset < 0:
        raise DomainError(f"radius_offset must be >= 0, got {radius_offset}")
    ax, ay, az = spec.axes()
    bits = np.zeros(spec.counts, dtype=np.bool_, order="F")
    for atom in molecule.atoms:
        r = atom.radius + radius_offset
        dx = ax - atom.center[0]
        dy = ay - atom.center[1]
        dz = az - atom.center[2]
        d2 = (dx * dx)[:, None, None] + (dy * dy)[None, :, None] \
            + (dz * dz)[None, None, :]
        bits |= d2 <= r * r
    return VoxelMask(spec, bits)


def init_density(spec: GridSpec, sas_mask: VoxelMask, rho0: float) -> ScalarGrid3:
    """Initial solvent density: 0 inside the mask, rho0 outside."""
    if rho0 <= 0 or not np.isfinite(rho0):
        raise DomainError(f"rho0 must be positive, got {rho0}")
    _check_match(spec, sas_mask.spec, "init_density")
    values = np.where(sas_mask.bits, 0.0, float(rho0))
    return ScalarGrid3(spec, np.asfortranarray(values))


def clamp_excluded(density: ScalarGrid3, vdw_mask: VoxelMask) -> ScalarGrid3:
    """Zero the field inside the van der Waals mask; idempotent."""
    _check_match(density.spec, vdw_mask.spec, "clamp_excluded")
    values = density.values.copy(order="K")
    values[vdw_mask.bits] = 0.0
    return ScalarGrid3(density.spec, values)


def dump_grid(density: ScalarGrid3, stream) -> None:
    """Raw dump: one text header line, then float64-LE values x-fastest."""
    spec = density.spec
    nums = list(spec.counts) + list(spec.origin) + list(spec.spacing)
    header = " ".join([_MAGIC] + [repr(v) for v in nums]) + "\n"
    stream.write(header.encode("ascii"))
    stream.write(density.values.ravel(order="F").astype("<f8").tobytes())


def load_grid(stream) -> ScalarGrid3:
    """Read the raw dump format written by dump_grid."""
    header = bytearray()
    while True:
        b = stream.read(1)
        if not b:
            raise ParseError("truncated grid dump header")
        if b == b"\n":
            break
        header.extend(b)
    fields = header.decode("ascii").split()
    if len(fields) != 10 or fields[0] != _MAGIC:
        raise ParseError(f"not a {_MAGIC} dump (header {fields[:1]})")
    counts = tuple(int(v) for v in fields[1:4])
    origin = tuple(float(v) for v in fields[4:7])
    spacing = tuple(float(v) for v in fields[7:10])
    spec = GridSpec(origin, spacing, counts)
    raw = stream.read(spec.node_count * 8)
    if len(raw) != spec.node_count * 8:
        raise ParseError("truncated grid dump payload")
    flat = np.frombuffer(raw, dtype="<f8")
    values = flat.reshape(counts, order="F")
    return ScalarGrid3(spec, np.asfortranarray(values.astype(np.float64)))


def dump_grid_bytes(density: ScalarGrid3) -> bytes:
    buf = io.BytesIO()
    dump_grid(density, buf)
    return buf.getvalue()
