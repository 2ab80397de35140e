"""Space-time fields evaluable at arbitrary (r, t) points.

A field is anything with ``eval(r, t)`` accepting broadcastable arrays.
Grid-backed fields interpolate bilinearly; combinators form sums and scalar
multiples without materializing anything.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["GridField", "FuncField", "SumField", "ScaledField", "save_field_csv"]


@dataclass(frozen=True)
class GridField:
    """Samples on a uniform (r, t) grid, bilinearly interpolated, zero outside."""

    values: np.ndarray          # shape (nt, nr)
    r0: float
    dr: float
    t0: float
    dt: float

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        if values.ndim != 2:
            raise ValueError("grid values must be 2-d (time, radius)")

    @property
    def rgrid(self) -> np.ndarray:
        return self.r0 + self.dr * np.arange(self.values.shape[1])

    @property
    def tgrid(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.values.shape[0])

    def eval(self, r, t):
        r = np.asarray(r, dtype=float)
        t = np.asarray(t, dtype=float)
        r, t = np.broadcast_arrays(r, t)
        nt, nr = self.values.shape
        x = (r - self.r0) / self.dr
        y = (t - self.t0) / self.dt
        inside = (x >= 0) & (x <= nr - 1) & (y >= 0) & (y <= nt - 1)
        xc = np.clip(x, 0, nr - 1)
        yc = np.clip(y, 0, nt - 1)
        i = np.clip(xc.astype(int), 0, nr - 2)
        j = np.clip(yc.astype(int), 0, nt - 2)
        fx = xc - i
        fy = yc - j
        v = (self.values[j, i] * (1 - fx) * (1 - fy)
             + self.values[j, i + 1] * fx * (1 - fy)
             + self.values[j + 1, i] * (1 - fx) * fy
             + self.values[j + 1, i + 1] * fx * fy)
        out = np.where(inside, v, 0.0)
        return out if out.ndim else float(out)


@dataclass(frozen=True)
class FuncField:
    """Field defined by a vectorized callable of (r, t)."""

    fn: object

    def eval(self, r, t):
        return self.fn(r, t)


@dataclass(frozen=True)
class SumField:
    parts: tuple

    def eval(self, r, t):
        out = self.parts[0].eval(r, t)
        for p in self.parts[1:]:
            out = out + p.eval(r, t)
        return out


@dataclass(frozen=True)
class ScaledField:
    field: object
    factor: float

    def eval(self, r, t):
        return self.factor * self.field.eval(r, t)


def save_field_csv(field: GridField, path) -> None:
    """Rows r,t,value over the backing grid."""
    rg, tg = field.rgrid, field.tgrid
    rows = np.column_stack([
        np.tile(rg, tg.size),
        np.repeat(tg, rg.size),
        field.values.ravel(),
    ])
    np.savetxt(path, rows, delimiter=",", header="r,t,value", comments="")
