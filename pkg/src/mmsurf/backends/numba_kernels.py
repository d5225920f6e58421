"""Numba-jitted implementations of the hot kernels.

Floating-point operation order matches backends.numpy_kernels exactly
(no fastmath), so the two backends agree bitwise. Lines/nodes are
distributed over threads with prange; every output element depends only
on the previous buffer, so results do not depend on the thread count.
"""

import numpy as np
from numba import njit, prange

NAME = "numba"

_OPTS = dict(cache=True, nogil=True)


@njit(parallel=True, **_OPTS)
def _evolve_lines(lines, weights, pad_value):
    nlines, n = lines.shape
    m = (weights.shape[0] - 1) // 2
    out = np.empty_like(lines)
    for r in prange(nlines):
        padded = np.empty(n + 2 * m)
        padded[:m] = pad_value
        padded[m:m + n] = lines[r]
        padded[m + n:] = pad_value
        for i in range(n):
            acc = 0.0
            # out_i = sum_l w_l in_{i-l}; in_{i-l} sits at padded[i - l + m]
            for idx in range(2 * m + 1):
                l = idx - m
                acc += weights[idx] * padded[i - l + m]
            out[r, i] = acc
    return out


def evolve_axis(values: np.ndarray, weights: np.ndarray, axis: int,
                pad_value: float) -> np.ndarray:
    """Apply the 1D stencil along ``axis``: out_i = sum_l w_l in_{i-l}."""
    arr = np.moveaxis(values, axis, -1)
    shape = arr.shape
    lines = np.ascontiguousarray(arr).reshape(-1, shape[-1])
    out = _evolve_lines(lines, np.ascontiguousarray(weights), pad_value)
    return np.ascontiguousarray(np.moveaxis(out.reshape(shape), -1, axis))


@njit(inline="always", **_OPTS)
def _face(da, db):
    if da == 0.0 or db == 0.0:
        return 0.0
    return 2.0 * da * db / (da + db)


@njit(parallel=True, **_OPTS)
def _fd_steps(rho, dvals, inv_h2, dt_list, boundary_value):
    nx, ny, nz = rho.shape
    ih0, ih1, ih2 = inv_h2[0], inv_h2[1], inv_h2[2]
    cur = rho.copy()
    new = np.empty_like(cur)
    for s in range(dt_list.shape[0]):
        dt = dt_list[s]
        for i in prange(nx):
            if i == 0 or i == nx - 1:
                for j in range(ny):
                    for k in range(nz):
                        new[i, j, k] = boundary_value
                continue
            for j in range(ny):
                for k in range(nz):
                    if j == 0 or j == ny - 1 or k == 0 or k == nz - 1:
                        new[i, j, k] = boundary_value
                        continue
                    c = cur[i, j, k]
                    d = dvals[i, j, k]
                    gxp = _face(dvals[i + 1, j, k], d) * (cur[i + 1, j, k] - c)
                    gxm = _face(d, dvals[i - 1, j, k]) * (c - cur[i - 1, j, k])
                    gyp = _face(dvals[i, j + 1, k], d) * (cur[i, j + 1, k] - c)
                    gym = _face(d, dvals[i, j - 1, k]) * (c - cur[i, j - 1, k])
                    gzp = _face(dvals[i, j, k + 1], d) * (cur[i, j, k + 1] - c)
                    gzm = _face(d, dvals[i, j, k - 1]) * (c - cur[i, j, k - 1])
                    acc = c + (dt * ih0) * (gxp - gxm)
                    acc = acc + (dt * ih1) * (gyp - gym)
                    acc = acc + (dt * ih2) * (gzp - gzm)
                    new[i, j, k] = acc
        cur, new = new, cur
    return cur


def fd_sweep(rho: np.ndarray, dvals: np.ndarray, inv_h2: np.ndarray,
             dt_list: np.ndarray, boundary_value: float) -> np.ndarray:
    out = _fd_steps(
        np.ascontiguousarray(rho),
        np.ascontiguousarray(dvals),
        np.ascontiguousarray(inv_h2, dtype=np.float64),
        np.ascontiguousarray(dt_list, dtype=np.float64),
        boundary_value,
    )
    return np.asfortranarray(out) if rho.flags.f_contiguous else out


@njit(**_OPTS)
def _rasterize(centers, radii, origin, spacing, counts, mask):
    natoms = centers.shape[0]
    for a in range(natoms):
        r = radii[a]
        r2 = r * r
        lo0 = max(0, int(np.ceil((centers[a, 0] - r - origin[0]) / spacing[0])) - 1)
        lo1 = max(0, int(np.ceil((centers[a, 1] - r - origin[1]) / spacing[1])) - 1)
        lo2 = max(0, int(np.ceil((centers[a, 2] - r - origin[2]) / spacing[2])) - 1)
        hi0 = min(counts[0] - 1,
                  int(np.floor((centers[a, 0] + r - origin[0]) / spacing[0])) + 1)
        hi1 = min(counts[1] - 1,
                  int(np.floor((centers[a, 1] + r - origin[1]) / spacing[1])) + 1)
        hi2 = min(counts[2] - 1,
                  int(np.floor((centers[a, 2] + r - origin[2]) / spacing[2])) + 1)
        for i in range(lo0, hi0 + 1):
            dx = origin[0] + spacing[0] * i - centers[a, 0]
            for j in range(lo1, hi1 + 1):
                dy = origin[1] + spacing[1] * j - centers[a, 1]
                for k in range(lo2, hi2 + 1):
                    dz = origin[2] + spacing[2] * k - centers[a, 2]
                    if dx * dx + dy * dy + dz * dz <= r2:
                        mask[i, j, k] = True
    return mask


def rasterize(centers: np.ndarray, radii: np.ndarray, origin: np.ndarray,
              spacing: np.ndarray, counts: np.ndarray) -> np.ndarray:
    """Inside mask of a union of closed balls, one window pass per atom."""
    nx, ny, nz = (int(c) for c in counts)
    mask = np.zeros((nx, ny, nz), dtype=np.bool_, order="F")
    if len(radii) == 0:
        return mask
    return _rasterize(
        np.ascontiguousarray(centers, dtype=np.float64),
        np.ascontiguousarray(radii, dtype=np.float64),
        np.ascontiguousarray(origin, dtype=np.float64),
        np.ascontiguousarray(spacing, dtype=np.float64),
        np.ascontiguousarray(counts, dtype=np.int64),
        mask,
    )
