"""Finite-difference oracle for the radial wave equation.

Leapfrog time stepping of u_tt = u_rr + (d-1)/r u_r + F on [0, rmax] with a
symmetry condition at the axis and a far outer boundary. Deliberately plain
second-order machinery: it exists to cross-check the exact evaluators, not
to be fast.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fields import GridField

__all__ = ["FdGrid", "fd_solve", "convergence_order", "discrete_energy"]


@dataclass(frozen=True)
class FdGrid:
    """Uniform space-time grid for the oracle solver."""

    rmax: float
    nr: int
    dt: float
    nt: int
    d: int

    def __post_init__(self):
        if self.d % 2 == 0 or self.d < 3:
            raise ValueError("dimension must be odd and >= 3")
        if self.nr < 64:
            raise ValueError("nr must be at least 64")
        if self.dt > 0.5 * self.dr:
            raise ValueError(
                f"CFL violation: dt={self.dt} exceeds 0.5*dr={0.5 * self.dr}")

    @property
    def dr(self) -> float:
        return self.rmax / self.nr

    @property
    def rgrid(self) -> np.ndarray:
        return self.dr * np.arange(self.nr + 1)

    @property
    def tgrid(self) -> np.ndarray:
        return self.dt * np.arange(self.nt + 1)


def _laplacian(u: np.ndarray, grid: FdGrid) -> np.ndarray:
    """Conservative discretization of r^{1-d} d/dr (r^{d-1} du/dr).

    The axis cell uses the regularity limit d * u''(0) with u'(0) = 0; the
    outer node is pinned to zero (domain chosen large enough that nothing
    reaches it).
    """
    d, dr = grid.d, grid.dr
    r = grid.rgrid
    out = np.zeros_like(u)
    r_plus = (r[1:-1] + 0.5 * dr) ** (d - 1)
    r_minus = (r[1:-1] - 0.5 * dr) ** (d - 1)
    out[1:-1] = (r_plus * (u[2:] - u[1:-1]) - r_minus * (u[1:-1] - u[:-2])) \
        / (r[1:-1] ** (d - 1) * dr * dr)
    out[0] = 2.0 * d * (u[1] - u[0]) / (dr * dr)
    out[-1] = 0.0
    return out


def fd_solve(u0, u1, forcing, grid: FdGrid) -> GridField:
    """Leapfrog solve; ``forcing`` is None or a field with eval(r, t).

    Returns the full space-time solution as a grid-backed field.
    """
    r = grid.rgrid
    u_prev = np.array(u0, dtype=float)
    if u_prev.shape != r.shape:
        raise ValueError("u0 must be sampled on the solver r-grid")
    v0 = np.array(u1, dtype=float)
    dt = grid.dt
    out = np.zeros((grid.nt + 1, grid.nr + 1))
    out[0] = u_prev

    def force(n):
        if forcing is None:
            return 0.0
        f = forcing.eval(r, grid.tgrid[n])
        return np.asarray(f, dtype=float)

    u_cur = u_prev + dt * v0 + 0.5 * dt * dt * (_laplacian(u_prev, grid) + force(0))
    u_cur[-1] = 0.0
    out[1] = u_cur
    for n in range(1, grid.nt):
        u_next = 2.0 * u_cur - u_prev + dt * dt * (_laplacian(u_cur, grid) + force(n))
        u_next[-1] = 0.0
        u_prev, u_cur = u_cur, u_next
        out[n + 1] = u_cur
    return GridField(out, r0=0.0, dr=grid.dr, t0=0.0, dt=dt)


def discrete_energy(field: GridField, d: int) -> np.ndarray:
    """Radial wave energy at interior time levels (centered differences)."""
    vals = field.values
    r = field.rgrid
    ut = (vals[2:] - vals[:-2]) / (2.0 * field.dt)
    ur = np.gradient(vals[1:-1], field.dr, axis=1)
    density = 0.5 * (ut**2 + ur**2) * r ** (d - 1)
    return np.trapezoid(density, dx=field.dr, axis=1)


def convergence_order(errors) -> float:
    """Richardson order estimate from errors on successively halved grids.

    Non-monotone error sequences are flagged as NaN rather than averaged
    into a meaningless number.
    """
    errors = np.asarray(errors, dtype=float)
    if errors.size < 2:
        raise ValueError("need at least two errors")
    if np.any(np.diff(errors) >= 0):
        return float("nan")
    rates = np.log2(errors[:-1] / errors[1:])
    return float(np.mean(rates))
