"""Explicit finite-difference diffusion solver, the reference path.

Solves d rho/dt = div(D(r) grad rho) with node-wise diffusivities and
Dirichlet boundaries. A face between two nodes transmits nothing if either
node carries D = 0 (the atomic interior is exactly insulating), else the
harmonic mean of the two values, which reduces to the bulk value on the
piecewise-constant fields used here. Forward Euler in time under the CFL
bound dt <= min(h)^2 / (6 max D). Deliberately plain: this path exists to
check the single-step spectral solver, not to win benchmarks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import backends
from .errors import ConfigError, DomainError, ShapeError, StabilityError
from .grid import GridSpec, ScalarGrid3, VoxelMask

__all__ = [
    "DiffusionField",
    "FdParams",
    "cfl_limit",
    "fd_step",
    "fd_solve",
    "radial_solve",
    "RadialProfile",
]

DEFAULT_CFL_SAFETY = 0.9


@dataclass
class DiffusionField:
    """Per-node diffusion rates; 0 inside atoms, D_bulk elsewhere."""

    spec: GridSpec
    values: np.ndarray

    def __post_init__(self):
        if tuple(self.values.shape) != tuple(self.spec.counts):
            raise ShapeError(
                f"diffusion shape {self.values.shape} != counts {self.spec.counts}"
            )
        if self.values.dtype != np.float64:
            self.values = self.values.astype(np.float64)
        if np.any(self.values < 0) or not np.all(np.isfinite(self.values)):
            raise DomainError("diffusion rates must be finite and >= 0")

    @classmethod
    def from_mask(cls, excluded: VoxelMask, d_bulk: float = 1.0) -> "DiffusionField":
        """D = 0 inside the mask, d_bulk outside."""
        values = np.where(excluded.bits, 0.0, float(d_bulk))
        return cls(excluded.spec, np.asfortranarray(values))

    @property
    def max_rate(self) -> float:
        return float(self.values.max(initial=0.0))


@dataclass(frozen=True)
class FdParams:
    """Time stepping schedule: ``steps`` steps of length ``dt``."""

    dt: float
    steps: int

    def __post_init__(self):
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise ConfigError(f"dt must be > 0, got {self.dt}")
        if self.steps < 0:
            raise ConfigError(f"steps must be >= 0, got {self.steps}")

    @classmethod
    def for_duration(cls, t: float, dt: float) -> "FdParams":
        """Schedule covering duration t (the final step may be shorter)."""
        if t < 0:
            raise ConfigError(f"t must be >= 0, got {t}")
        return cls(dt, int(math.ceil(t / dt - 1e-12)) if t > 0 else 0)


def cfl_limit(spec: GridSpec, dfield: DiffusionField) -> float:
    """Largest stable explicit step: min(h)^2 / (6 max D)."""
    dmax = dfield.max_rate
    if dmax == 0.0:
        return math.inf
    return min(spec.spacing) ** 2 / (6.0 * dmax)


def _check_cfl(dt, spec, dfield):
    bound = cfl_limit(spec, dfield)
    if dt > bound * (1.0 + 1e-12):
        raise StabilityError(dt, bound)


def _sweep(density: ScalarGrid3, dfield: DiffusionField, dt_list,
           boundary_value: float) -> ScalarGrid3:
    kern = backends.get_backend()
    inv_h2 = 1.0 / np.asarray(density.spec.spacing) ** 2
    out = kern.fd_sweep(density.values, dfield.values, inv_h2,
                        np.asarray(dt_list, dtype=np.float64),
                        float(boundary_value))
    return ScalarGrid3(density.spec, np.asfortranarray(out))


def fd_step(density: ScalarGrid3, dfield: DiffusionField, dt: float,
            boundary_value: float) -> ScalarGrid3:
    """One forward-Euler step; boundary nodes held at boundary_value."""
    if density.spec != dfield.spec:
        raise ShapeError("fd_step: density and diffusion grids differ")
    _check_cfl(dt, density.spec, dfield)
    return _sweep(density, dfield, [dt], boundary_value)


def fd_solve(density0: ScalarGrid3, dfield: DiffusionField, t: float,
             params: FdParams | None = None,
             boundary_value: float = 0.0) -> ScalarGrid3:
    """Evolve to time t by repeated steps; exact arrival at t.

    Without explicit params the step is DEFAULT_CFL_SAFETY times the CFL
    bound. A params schedule must cover t; the last step is shortened so
    the steps sum to t exactly.
    """
    if t < 0:
        raise DomainError(f"t must be >= 0, got {t}")
    if density0.spec != dfield.spec:
        raise ShapeError("fd_solve: density and diffusion grids differ")
    if t == 0:
        return density0.copy()
    if params is None:
        bound = cfl_limit(density0.spec, dfield)
        if not math.isfinite(bound):
            return density0.copy()
        params = FdParams.for_duration(t, DEFAULT_CFL_SAFETY * bound)
    _check_cfl(params.dt, density0.spec, dfield)
    if params.steps * params.dt < t * (1.0 - 1e-12):
        raise ConfigError(
            f"schedule {params.steps} x dt={params.dt:g} does not cover t={t:g}"
        )
    n_full = min(params.steps, int(t / params.dt + 1e-12))
    dt_list = [params.dt] * n_full
    rest = t - n_full * params.dt
    if rest > 1e-12 * t:
        dt_list.append(rest)
    return _sweep(density0, dfield, dt_list, boundary_value)


@dataclass(frozen=True)
class RadialProfile:
    """Spherically symmetric density profile rho(r)."""

    r: np.ndarray
    rho: np.ndarray

    def value_at(self, radius) -> float | np.ndarray:
        """Linear interpolation; constant extrapolation at the ends."""
        return np.interp(radius, self.r, self.rho)


def radial_solve(atom_radius: float, probe_radius: float, rho0: float,
                 t: float, dr: float, r_max: float,
                 diffusion: float = 1.0, dt: float | None = None) -> RadialProfile:
    """Diffusion around one insulating sphere, reduced to the radius axis.

    Solves d rho/dt = (1/r^2) d_r (r^2 D d_r rho) on [atom_radius, r_max]
    with zero flux at the atom surface, rho(r_max) = rho0, and the probe
    step initial state (0 out to atom_radius + probe_radius, rho0 beyond).
    The profile is monotone non-decreasing in r at all times. Used to
    calibrate isovalues for named surfaces, so r_max must exceed
    atom_radius + probe_radius + 4 sqrt(2 D t) to keep the outer boundary
    out of play.
    """
    if dr <= 0:
        raise DomainError(f"dr must be > 0, got {dr}")
    need = atom_radius + probe_radius + 4.0 * math.sqrt(2.0 * diffusion * t)
    if r_max <= need:
        raise DomainError(
            f"r_max={r_max:g} too small; need > {need:g} for this t"
        )
    n = int(round((r_max - atom_radius) / dr)) + 1
    r = atom_radius + dr * np.arange(n)
    rho = np.where(r <= atom_radius + probe_radius, 0.0, float(rho0))
    rho[-1] = rho0
    if t == 0 or diffusion == 0:
        return RadialProfile(r, rho)
    bound = dr * dr / (2.0 * diffusion)
    if dt is None:
        dt = DEFAULT_CFL_SAFETY * bound / (1.0 + dr / atom_radius)
    elif dt > bound * (1.0 + 1e-12):
        raise StabilityError(dt, bound)
    steps = int(math.ceil(t / dt))
    faces = diffusion * (r[:-1] + 0.5 * dr) ** 2 / dr  # D r^2 d_r at i+1/2
    inv_vol = 1.0 / (dr * r ** 2)
    remaining = t
    for _ in range(steps):
        step = min(dt, remaining)
        g = faces * (rho[1:] - rho[:-1])
        rho[1:-1] += step * inv_vol[1:-1] * (g[1:] - g[:-1])
        rho[0] += step * inv_vol[0] * g[0]  # inner wall: no inward face
        rho[-1] = rho0
        remaining -= step
    return RadialProfile(r, rho)
