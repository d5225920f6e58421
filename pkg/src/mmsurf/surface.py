"""Isosurface extraction, slice contours, level calibration, mesh metrics."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._mc_tables import (
    CORNER_OFFSETS,
    EDGE_AXIS,
    EDGE_ORIGIN,
    EDGE_TABLE,
    TRI_TABLE,
)
from .errors import ConfigError, DomainError
from .fd import RadialProfile
from .grid import ScalarGrid3

__all__ = [
    "TriangleMesh",
    "ContourSet",
    "SurfaceRequest",
    "LevelContext",
    "marching_cubes",
    "slice_contours",
    "resolve_level",
    "mesh_area",
    "mesh_volume",
    "mesh_is_closed",
    "mesh_distance",
    "write_obj",
    "contours_to_csv",
    "trilinear",
]

_AXIS_NAMES = {"x": 0, "y": 1, "z": 2, 0: 0, 1: 1, 2: 2}
_DEGENERATE_AREA = 1e-12


@dataclass
class TriangleMesh:
    """Vertices (n, 3) in Angstrom and triangles (m, 3) as vertex indices.

    Triangles are oriented with normals pointing toward higher field
    values, i.e. outward for a density that increases away from the
    molecule.
    """

    vertices: np.ndarray
    triangles: np.ndarray

    def __post_init__(self):
        self.vertices = np.asarray(self.vertices, dtype=np.float64).reshape(-1, 3)
        self.triangles = np.asarray(self.triangles, dtype=np.int64).reshape(-1, 3)
        if len(self.triangles) and self.triangles.max() >= len(self.vertices):
            raise DomainError("triangle index out of range")

    @property
    def is_empty(self) -> bool:
        return len(self.triangles) == 0


@dataclass
class ContourSet:
    """Polylines of a planar slice, in the slice plane's (u, v) coords."""

    axis: int
    coordinate: float
    polylines: list[np.ndarray]
    closed: list[bool] = field(default_factory=list)


@dataclass(frozen=True)
class SurfaceRequest:
    """Which named surface to extract.

    kind: one of vdw, sas, ses, midway, custom.
    level: required for custom, optional override for ses.
    epsilon: small positive density for vdw/sas (defaults to 1e-3 rho0).
    """

    kind: str
    level: float | None = None
    epsilon: float | None = None

    def __post_init__(self):
        if self.kind not in ("vdw", "sas", "ses", "midway", "custom"):
            raise ConfigError(f"unknown surface kind {self.kind!r}")
        if self.kind == "custom" and self.level is None:
            raise ConfigError("custom surface requires an explicit level")
        if self.epsilon is not None and self.epsilon <= 0:
            raise ConfigError(f"epsilon must be > 0, got {self.epsilon}")


@dataclass(frozen=True)
class LevelContext:
    """Pipeline quantities needed to resolve named surface levels."""

    rho0: float
    probe_radius: float
    time: float
    atom_radius: float | None = None
    radial_profile: RadialProfile | None = None


def resolve_level(request: SurfaceRequest, context: LevelContext) -> float:
    """Density isovalue for a requested surface kind.

    vdw/sas sit at a small epsilon above zero (the exact surfaces are the
    rho -> 0 limit, unreachable in floating point). The ses default 0.04
    is the worked calibration for rho0=100, t=12; other configurations
    must supply an explicit level. midway interpolates the radial oracle
    at atom_radius + probe_radius/2.
    """
    if request.kind in ("vdw", "sas"):
        if request.epsilon is not None:
            return request.epsilon
        return 1e-3 * context.rho0
    if request.kind == "ses":
        if request.level is not None:
            return request.level
        if context.rho0 == 100.0:
            return 0.04
        raise ConfigError(
            "ses default level 0.04 is calibrated for rho0=100; pass an "
            "explicit level (or use kind=custom) for other configurations"
        )
    if request.kind == "midway":
        if context.atom_radius is None:
            raise DomainError("midway surface requires a representative atom")
        if context.radial_profile is None:
            raise DomainError("midway surface requires the radial oracle profile")
        r_mid = context.atom_radius + 0.5 * context.probe_radius
        return float(context.radial_profile.value_at(r_mid))
    return float(request.level)


def marching_cubes(density: ScalarGrid3, level: float) -> TriangleMesh:
    """Extract the level isosurface as a triangle mesh.

    Classic 256-case table lookup with linear interpolation along grid
    edges. Each cut grid edge carries exactly one vertex, shared by every
    incident cell, so adjacent cells meet edge-to-edge and gridline
    crossings are positioned identically no matter which cell asks.
    Triangles with area below 1e-12 A^2 (level crossings pinned to grid
    nodes) are dropped. An empty mesh is a valid result.
    """
    if not math.isfinite(level):
        raise DomainError(f"level must be finite, got {level}")
    vals = density.values
    nx, ny, nz = density.spec.counts
    inside = vals < level
    ncx, ncy, ncz = nx - 1, ny - 1, nz - 1
    case = np.zeros((ncx, ncy, ncz), dtype=np.uint8)
    for c in range(8):
        di, dj, dk = CORNER_OFFSETS[c]
        case |= inside[di:di + ncx, dj:dj + ncy, dk:dk + ncz].astype(np.uint8) << c
    edge_bits = EDGE_TABLE[case]
    ii, jj, kk = np.nonzero(edge_bits)
    if len(ii) == 0:
        return TriangleMesh(np.zeros((0, 3)), np.zeros((0, 3), dtype=np.int64))
    order = np.lexsort((ii, jj, kk))  # cells in x-fastest order
    ii, jj, kk = ii[order], jj[order], kk[order]
    cell_case = case[ii, jj, kk]
    cell_bits = edge_bits[ii, jj, kk]
    n_active = len(ii)

    # one global key per cut grid edge: 3 * node_id + axis, node x-fastest
    vert_of_edge = np.full((n_active, 12), -1, dtype=np.int64)
    keys = np.full((n_active, 12), -1, dtype=np.int64)
    for e in range(12):
        need = (cell_bits >> e) & 1 > 0
        if not np.any(need):
            continue
        oi = ii[need] + EDGE_ORIGIN[e, 0]
        oj = jj[need] + EDGE_ORIGIN[e, 1]
        ok = kk[need] + EDGE_ORIGIN[e, 2]
        node = oi + nx * (oj + ny * ok)
        keys[need, e] = 3 * node + EDGE_AXIS[e]
    used = keys >= 0
    uniq, inverse = np.unique(keys[used], return_inverse=True)
    vert_of_edge[used] = inverse

    # interpolate one vertex per unique edge, from the low corner along +axis
    node = uniq // 3
    axis = uniq % 3
    i0 = node % nx
    j0 = (node // nx) % ny
    k0 = node // (nx * ny)
    ia = i0 + (axis == 0)
    ja = j0 + (axis == 1)
    ka = k0 + (axis == 2)
    va = vals[i0, j0, k0]
    vb = vals[ia, ja, ka]
    frac = (level - va) / (vb - va)
    origin = np.asarray(density.spec.origin)
    spacing = np.asarray(density.spec.spacing)
    verts = origin + spacing * np.column_stack([i0, j0, k0]).astype(np.float64)
    verts[np.arange(len(uniq)), axis] += frac * spacing[axis]

    tri_rows = TRI_TABLE[cell_case, :15].reshape(n_active, 5, 3)
    valid = tri_rows[:, :, 0] >= 0
    cell_of_tri = np.repeat(np.arange(n_active), 5)[valid.ravel()]
    local = tri_rows[valid]
    tris = vert_of_edge[cell_of_tri[:, None], local]
    # table winding gives inward normals for inside = below level; flip
    tris = tris[:, ::-1]

    p = verts[tris]
    cross = np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0])
    area2 = np.einsum("ij,ij->i", cross, cross)
    keep = area2 > (2.0 * _DEGENERATE_AREA) ** 2
    return TriangleMesh(verts, tris[keep])


def mesh_area(mesh: TriangleMesh) -> float:
    """Total surface area (A^2)."""
    if mesh.is_empty:
        return 0.0
    p = mesh.vertices[mesh.triangles]
    cross = np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0])
    return float(0.5 * np.linalg.norm(cross, axis=1).sum())


def _edge_counts(mesh: TriangleMesh):
    t = mesh.triangles
    edges = np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]])
    edges = np.sort(edges, axis=1)
    _, counts = np.unique(edges, axis=0, return_counts=True)
    return counts


def mesh_is_closed(mesh: TriangleMesh) -> bool:
    """True when every undirected edge borders exactly two triangles."""
    if mesh.is_empty:
        return False
    return bool(np.all(_edge_counts(mesh) == 2))


def mesh_volume(mesh: TriangleMesh) -> float:
    """Enclosed volume (A^3) of a closed, consistently oriented mesh."""
    if mesh.is_empty or not mesh_is_closed(mesh):
        raise DomainError("mesh_volume requires a closed mesh")
    p = mesh.vertices[mesh.triangles] - mesh.vertices.mean(axis=0)
    signed = np.einsum("ij,ij->i", p[:, 0], np.cross(p[:, 1], p[:, 2])).sum() / 6.0
    return float(abs(signed))


def _surface_samples(mesh: TriangleMesh) -> np.ndarray:
    """Sample points of a mesh: vertices, edge midpoints, centroids."""
    p = mesh.vertices[mesh.triangles]
    mids = np.concatenate([
        0.5 * (p[:, 0] + p[:, 1]),
        0.5 * (p[:, 1] + p[:, 2]),
        0.5 * (p[:, 2] + p[:, 0]),
    ])
    cents = p.mean(axis=1)
    return np.concatenate([mesh.vertices, mids, cents])


def _point_triangle_distance(points: np.ndarray, tri: np.ndarray) -> np.ndarray:
    """Exact distance from points[i] to triangle tri[i] (both (n, ...))."""
    a, b, c = tri[:, 0], tri[:, 1], tri[:, 2]
    ab = b - a
    ac = c - a
    ap = points - a
    d1 = np.einsum("ij,ij->i", ab, ap)
    d2 = np.einsum("ij,ij->i", ac, ap)
    bp = points - b
    d3 = np.einsum("ij,ij->i", ab, bp)
    d4 = np.einsum("ij,ij->i", ac, bp)
    cp = points - c
    d5 = np.einsum("ij,ij->i", ab, cp)
    d6 = np.einsum("ij,ij->i", ac, cp)
    va = d3 * d6 - d5 * d4
    vb = d5 * d2 - d1 * d6
    vc = d1 * d4 - d3 * d2
    denom = va + vb + vc
    with np.errstate(divide="ignore", invalid="ignore"):
        v = np.where(denom != 0, vb / denom, 0.0)
        w = np.where(denom != 0, vc / denom, 0.0)
        t_ab = np.where(d1 - d3 != 0, d1 / (d1 - d3), 0.0)
        t_ac = np.where(d2 - d6 != 0, d2 / (d2 - d6), 0.0)
        t_bc = np.where((d4 - d3) + (d5 - d6) != 0,
                        (d4 - d3) / ((d4 - d3) + (d5 - d6)), 0.0)
    closest = a + v[:, None] * ab + w[:, None] * ac
    # vertex regions
    closest = np.where(((d1 <= 0) & (d2 <= 0))[:, None], a, closest)
    closest = np.where(((d3 >= 0) & (d4 <= d3))[:, None], b, closest)
    closest = np.where(((d6 >= 0) & (d5 <= d6))[:, None], c, closest)
    # edge regions
    on_ab = (d1 >= 0) & (d3 <= 0) & (vc <= 0)
    closest = np.where(on_ab[:, None], a + np.clip(t_ab, 0, 1)[:, None] * ab,
                       closest)
    on_ac = (d2 >= 0) & (d6 <= 0) & (vb <= 0)
    closest = np.where(on_ac[:, None], a + np.clip(t_ac, 0, 1)[:, None] * ac,
                       closest)
    on_bc = ((d4 - d3) >= 0) & ((d5 - d6) >= 0) & (va <= 0)
    closest = np.where(on_bc[:, None],
                       b + np.clip(t_bc, 0, 1)[:, None] * (c - b), closest)
    return np.linalg.norm(points - closest, axis=1)


def _directed_distance(src: TriangleMesh, dst: TriangleMesh,
                       k_candidates: int = 8) -> float:
    from scipy.spatial import cKDTree

    pts = _surface_samples(src)
    tree = cKDTree(dst.vertices)
    _, nearest = tree.query(pts, k=min(k_candidates, len(dst.vertices)))
    nearest = np.atleast_2d(nearest.T).T
    # triangles incident to each destination vertex
    nv = len(dst.vertices)
    t = dst.triangles
    incidence = [[] for _ in range(nv)]
    for tid, (a, b, c) in enumerate(t):
        incidence[a].append(tid)
        incidence[b].append(tid)
        incidence[c].append(tid)
    best = np.full(len(pts), np.inf)
    for col in range(nearest.shape[1]):
        cand_lists = [incidence[v] for v in nearest[:, col]]
        lens = np.array([len(c) for c in cand_lists])
        if lens.max(initial=0) == 0:
            continue
        rep = np.repeat(np.arange(len(pts)), lens)
        tri_ids = np.concatenate([np.asarray(c, dtype=np.int64)
                                  for c in cand_lists if c])
        d = _point_triangle_distance(pts[rep], dst.vertices[t[tri_ids]])
        np.minimum.at(best, rep, d)
    return float(best.max())


def mesh_distance(a: TriangleMesh, b: TriangleMesh) -> float:
    """Symmetric Hausdorff estimate between two meshes (Angstrom).

    Each mesh is sampled at vertices, edge midpoints, and triangle
    centroids; every sample is measured against the exact nearest triangle
    among those incident to its 8 nearest opposing vertices. The estimate
    is exact for meshes whose triangles are small against their separation.
    """
    if a.is_empty or b.is_empty:
        raise DomainError("mesh_distance requires non-empty meshes")
    return max(_directed_distance(a, b), _directed_distance(b, a))


def trilinear(density: ScalarGrid3, points: np.ndarray) -> np.ndarray:
    """Trilinear interpolation of the field at (n, 3) points (inside grid)."""
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    origin = np.asarray(density.spec.origin)
    spacing = np.asarray(density.spec.spacing)
    counts = np.asarray(density.spec.counts)
    w = (pts - origin) / spacing
    if np.any(w < -1e-9) or np.any(w > counts - 1 + 1e-9):
        raise DomainError("point outside grid extent")
    i0 = np.clip(np.floor(w).astype(np.int64), 0, counts - 2)
    f = w - i0
    vals = density.values
    out = np.zeros(len(pts))
    for c in range(8):
        di, dj, dk = CORNER_OFFSETS[c]
        wgt = (np.where(di, f[:, 0], 1 - f[:, 0])
               * np.where(dj, f[:, 1], 1 - f[:, 1])
               * np.where(dk, f[:, 2], 1 - f[:, 2]))
        out += wgt * vals[i0[:, 0] + di, i0[:, 1] + dj, i0[:, 2] + dk]
    return out


# ---------------------------------------------------------------------------
# slice contours (marching squares)

_MS_SEGMENTS = {
    # case -> list of (edge, edge) cut segments; edges 0=bottom 1=right
    # 2=top 3=left of the cell; corner bit i set when below level, corners
    # 0=(0,0) 1=(1,0) 2=(1,1) 3=(0,1) in (u, v)
    0: [], 15: [],
    1: [(3, 0)], 14: [(3, 0)],
    2: [(0, 1)], 13: [(0, 1)],
    4: [(1, 2)], 11: [(1, 2)],
    8: [(2, 3)], 7: [(2, 3)],
    3: [(3, 1)], 12: [(3, 1)],
    6: [(0, 2)], 9: [(0, 2)],
}
_MS_AMBIG = {
    5: ([(3, 0), (1, 2)], [(3, 2), (1, 0)]),
    10: ([(0, 1), (2, 3)], [(0, 3), (2, 1)]),
}


def slice_contours(density: ScalarGrid3, axis, coordinate: float,
                   level: float) -> ContourSet:
    """Isocontours of the field on an axis-aligned plane.

    The field is interpolated linearly onto the plane between its two
    bracketing node layers, then contoured by marching squares. Saddle
    cells are split by the sign of the cell-center average. Segments are
    chained into polylines; a polyline is closed when it returns to its
    start, open when it ends on the slice boundary.
    """
    d = _AXIS_NAMES.get(axis)
    if d is None:
        raise DomainError(f"axis must be x, y, z or 0..2, got {axis!r}")
    lo, hi = density.spec.extent()[:, d]
    if not (lo <= coordinate <= hi):
        raise DomainError(
            f"coordinate {coordinate} outside grid extent [{lo}, {hi}]"
        )
    n = density.spec.counts[d]
    w = (coordinate - density.spec.origin[d]) / density.spec.spacing[d]
    i0 = int(np.clip(np.floor(w), 0, n - 2))
    f = w - i0
    sl = [slice(None)] * 3
    sl[d] = i0
    plane_a = density.values[tuple(sl)]
    sl[d] = i0 + 1
    plane_b = density.values[tuple(sl)]
    plane = (1.0 - f) * plane_a + f * plane_b

    axes = [0, 1, 2]
    axes.remove(d)
    ua, va = axes
    u0, v0 = density.spec.origin[ua], density.spec.origin[va]
    hu, hv = density.spec.spacing[ua], density.spec.spacing[va]

    segments = _marching_squares(plane, level)
    polylines, closed = _chain_segments(segments, plane.shape)
    scaled = []
    for poly in polylines:
        pts = np.asarray(poly, dtype=np.float64)
        pts[:, 0] = u0 + hu * pts[:, 0]
        pts[:, 1] = v0 + hv * pts[:, 1]
        scaled.append(pts)
    return ContourSet(axis=d, coordinate=float(coordinate),
                      polylines=scaled, closed=closed)


def _marching_squares(plane: np.ndarray, level: float):
    """Cut segments per cell, endpoints keyed by global 2D edge ids."""
    nu, nv = plane.shape
    inside = plane < level
    segments = []
    for i in range(nu - 1):
        for j in range(nv - 1):
            c0 = inside[i, j]
            c1 = inside[i + 1, j]
            c2 = inside[i + 1, j + 1]
            c3 = inside[i, j + 1]
            case = c0 | c1 << 1 | c2 << 2 | c3 << 3
            if case == 0 or case == 15:
                continue
            if case in _MS_AMBIG:
                # saddle cell: connect the below-level corners through the
                # center iff the bilinear center is itself below level
                center = 0.25 * (plane[i, j] + plane[i + 1, j]
                                 + plane[i + 1, j + 1] + plane[i, j + 1])
                pairs = _MS_AMBIG[case][1 if center < level else 0]
            else:
                pairs = _MS_SEGMENTS[case]
            for e1, e2 in pairs:
                segments.append((
                    _ms_point(plane, level, i, j, e1),
                    _ms_point(plane, level, i, j, e2),
                ))
    return segments


def _ms_point(plane, level, i, j, edge):
    """Edge key and interpolated (u, v) point for a cell edge cut."""
    nu, nv = plane.shape
    if edge == 0:      # bottom: (i,j)-(i+1,j), along u
        a, b = plane[i, j], plane[i + 1, j]
        t = (level - a) / (b - a)
        return ("u", i, j), (i + t, float(j))
    if edge == 2:      # top: (i,j+1)-(i+1,j+1)
        a, b = plane[i, j + 1], plane[i + 1, j + 1]
        t = (level - a) / (b - a)
        return ("u", i, j + 1), (i + t, float(j + 1))
    if edge == 3:      # left: (i,j)-(i,j+1), along v
        a, b = plane[i, j], plane[i, j + 1]
        t = (level - a) / (b - a)
        return ("v", i, j), (float(i), j + t)
    a, b = plane[i + 1, j], plane[i + 1, j + 1]  # right
    t = (level - a) / (b - a)
    return ("v", i + 1, j), (float(i + 1), j + t)


def _chain_segments(segments, shape):
    """Join edge-keyed segments into polylines; detect closed loops.

    Every cut grid edge carries one crossing point and borders at most two
    active cells, so adjacency degree is at most 2 and chains are simple
    paths or simple loops.
    """
    points: dict = {}
    adj: dict = {}
    for (ka, pa), (kb, pb) in segments:
        points[ka] = pa
        points[kb] = pb
        adj.setdefault(ka, []).append(kb)
        adj.setdefault(kb, []).append(ka)
    visited = set()
    polylines = []
    closed_flags = []
    # open chains first (endpoints of degree 1), then remaining loops
    starts = sorted(k for k, ns in adj.items() if len(ns) == 1)
    starts += sorted(k for k, ns in adj.items() if len(ns) != 1)
    for start in starts:
        if start in visited:
            continue
        chain = [start]
        visited.add(start)
        prev, cur = None, start
        is_closed = False
        while True:
            nxt = None
            for nb in adj[cur]:
                if nb == start and prev is not None and len(chain) > 2:
                    is_closed = True
                    break
                if nb != prev and nb not in visited:
                    nxt = nb
                    break
            if is_closed or nxt is None:
                break
            chain.append(nxt)
            visited.add(nxt)
            prev, cur = cur, nxt
        if len(chain) < 2:
            continue
        pts = [points[k] for k in chain]
        if is_closed:
            pts.append(points[start])
        polylines.append(np.asarray(pts, dtype=np.float64))
        closed_flags.append(is_closed)
    return polylines, closed_flags


def write_obj(mesh: TriangleMesh, stream) -> None:
    """Wavefront OBJ: v/f records, 1-based indices, LF line endings."""
    for v in mesh.vertices:
        stream.write(f"v {float(v[0])!r} {float(v[1])!r} {float(v[2])!r}\n")
    for t in mesh.triangles:
        stream.write(f"f {t[0] + 1} {t[1] + 1} {t[2] + 1}\n")


def contours_to_csv(contours: ContourSet) -> str:
    """CSV ``polyline_id,u,v`` of all slice polylines."""
    lines = ["polyline_id,u,v"]
    for pid, poly in enumerate(contours.polylines):
        for u, v in poly:
            lines.append(f"{pid},{float(u)!r},{float(v)!r}")
    return "\n".join(lines) + "\n"
