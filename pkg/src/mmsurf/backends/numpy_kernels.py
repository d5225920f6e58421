"""Pure-numpy implementations of the hot kernels.

Reference semantics for the numba backend: identical operation order, so
results are bit-identical between the two.
"""

import numpy as np

NAME = "numpy"


def evolve_axis(values: np.ndarray, weights: np.ndarray, axis: int,
                pad_value: float) -> np.ndarray:
    """Apply the 1D stencil along ``axis``: out_i = sum_l w_l in_{i-l}.

    Out-of-range samples read ``pad_value``. Accumulation runs over l from
    -M to M, matching the numba inner loop order exactly.
    """
    arr = np.moveaxis(values, axis, -1)
    n = arr.shape[-1]
    m = (len(weights) - 1) // 2
    padded = np.empty(arr.shape[:-1] + (n + 2 * m,), dtype=np.float64)
    padded[..., :m] = pad_value
    padded[..., m:m + n] = arr
    padded[..., m + n:] = pad_value
    out = np.zeros_like(arr)
    for idx, l in enumerate(range(-m, m + 1)):
        # in_{i-l} sits at padded offset i - l + m
        out += weights[idx] * padded[..., m - l:m - l + n]
    return np.ascontiguousarray(np.moveaxis(out, -1, axis))


def fd_sweep(rho: np.ndarray, dvals: np.ndarray, inv_h2: np.ndarray,
             dt_list: np.ndarray, boundary_value: float) -> np.ndarray:
    """Run explicit conservative diffusion steps (one per dt in dt_list).

    Face diffusivity between two nodes is zero when either node carries
    D = 0, else the harmonic mean (equal to the common value on a binary
    field). Boundary nodes are held at ``boundary_value``.
    """
    fx = _face(dvals[1:, :, :], dvals[:-1, :, :])
    fy = _face(dvals[:, 1:, :], dvals[:, :-1, :])
    fz = _face(dvals[:, :, 1:], dvals[:, :, :-1])
    rho = rho.copy()
    for dt in dt_list:
        gx = fx * (rho[1:, :, :] - rho[:-1, :, :])
        gy = fy * (rho[:, 1:, :] - rho[:, :-1, :])
        gz = fz * (rho[:, :, 1:] - rho[:, :, :-1])
        new = rho.copy()
        new[1:-1, :, :] += (dt * inv_h2[0]) * (gx[1:, :, :] - gx[:-1, :, :])
        new[:, 1:-1, :] += (dt * inv_h2[1]) * (gy[:, 1:, :] - gy[:, :-1, :])
        new[:, :, 1:-1] += (dt * inv_h2[2]) * (gz[:, :, 1:] - gz[:, :, :-1])
        new[0, :, :] = boundary_value
        new[-1, :, :] = boundary_value
        new[:, 0, :] = boundary_value
        new[:, -1, :] = boundary_value
        new[:, :, 0] = boundary_value
        new[:, :, -1] = boundary_value
        rho = new
    return rho


def _face(da, db):
    num = 2.0 * da * db
    den = da + db
    out = np.zeros_like(da)
    ok = (da != 0.0) & (db != 0.0)
    out[ok] = num[ok] / den[ok]
    return out


def rasterize(centers: np.ndarray, radii: np.ndarray, origin: np.ndarray,
              spacing: np.ndarray, counts: np.ndarray) -> np.ndarray:
    """Inside mask of a union of closed balls, one window pass per atom."""
    nx, ny, nz = (int(c) for c in counts)
    mask = np.zeros((nx, ny, nz), dtype=bool, order="F")
    ax = [origin[d] + spacing[d] * np.arange(counts[d]) for d in range(3)]
    for a in range(len(radii)):
        r = radii[a]
        # windows padded by one node so fp rounding of the bounds can never
        # drop a node that passes the exact inside test
        lo = [max(0, int(np.ceil((centers[a, d] - r - origin[d]) / spacing[d])) - 1)
              for d in range(3)]
        hi = [min(int(counts[d]) - 1,
                  int(np.floor((centers[a, d] + r - origin[d]) / spacing[d])) + 1)
              for d in range(3)]
        if any(lo[d] > hi[d] for d in range(3)):
            continue
        dx = ax[0][lo[0]:hi[0] + 1] - centers[a, 0]
        dy = ax[1][lo[1]:hi[1] + 1] - centers[a, 1]
        dz = ax[2][lo[2]:hi[2] + 1] - centers[a, 2]
        d2 = (dx * dx)[:, None, None] + (dy * dy)[None, :, None] \
            + (dz * dz)[None, None, :]
        win = mask[lo[0]:hi[0] + 1, lo[1]:hi[1] + 1, lo[2]:hi[2] + 1]
        win |= d2 <= r * r
    return mask
