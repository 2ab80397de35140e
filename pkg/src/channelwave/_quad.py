"""Quadrature building blocks shared across the package.

Two recurring patterns live here:

* integrals of a linearly interpolated sample vector over windows whose
  endpoints fall between grid nodes (sub-cell clipping, never smearing), and
* Gauss-Legendre panel rules whose node construction commutes exactly with
  doubling of the interval, so that dyadic rescaling identities hold to
  round-off rather than to quadrature error.
"""

from __future__ import annotations

from math import comb

import numpy as np

# Reference Gauss-Legendre rules, cached per node count.
_GL_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _gl_reference(n: int) -> tuple[np.ndarray, np.ndarray]:
    if n not in _GL_CACHE:
        x, w = np.polynomial.legendre.leggauss(n)
        # shift to [0, 1]
        _GL_CACHE[n] = (0.5 * (x + 1.0), 0.5 * w)
    return _GL_CACHE[n]


def gauss_panel_rule(edges: np.ndarray, nodes_per_panel: int = 8):
    """Composite Gauss-Legendre rule on the panels defined by ``edges``.

    Nodes are built as ``a + (b-a)*ref`` per panel, which doubles exactly
    when all edges double (IEEE multiplication by 2 is exact).
    """
    edges = np.asarray(edges, dtype=float)
    ref_x, ref_w = _gl_reference(nodes_per_panel)
    a = edges[:-1, None]
    width = (edges[1:] - edges[:-1])[:, None]
    nodes = (a + width * ref_x).ravel()
    weights = (width * ref_w).ravel()
    return nodes, weights


def geometric_edges(t_min: float, t_max: float, per_octave: int = 1) -> np.ndarray:
    """Panel edges [0, t_min, ..., t_max] refined geometrically toward 0.

    Edges are ``t_max * 2**(-i/per_octave)``; the construction commutes with
    doubling of (t_min, t_max).
    """
    if t_max <= 0:
        raise ValueError("t_max must be positive")
    t_min = min(t_min, t_max)
    n = max(1, int(np.ceil(per_octave * np.log2(t_max / t_min))))
    edges = t_max * np.exp2(-np.arange(n, -1, -1, dtype=float) / per_octave)
    return np.concatenate([[0.0], edges])


def clipped_trapezoid(values, spacing: float, origin: float, lo, hi):
    """Integrate the linear interpolant of ``values`` over windows [lo, hi].

    ``values`` has shape (..., n); ``lo`` and ``hi`` broadcast against the
    leading shape. Windows are clipped to the sample range and an empty
    window integrates to zero. Interior cells contribute the ordinary
    trapezoid amount; boundary cells are clipped sub-cell.
    """
    values = np.asarray(values, dtype=float)
    n = values.shape[-1]
    if n < 2:
        raise ValueError("need at least two samples")
    smax = origin + spacing * (n - 1)
    lo = np.clip(np.asarray(lo, dtype=float), origin, smax)
    hi = np.clip(np.asarray(hi, dtype=float), origin, smax)
    lo, hi, _ = np.broadcast_arrays(lo, hi, values[..., 0])

    csum = np.zeros(values.shape[:-1] + (n,))
    np.cumsum(0.5 * spacing * (values[..., 1:] + values[..., :-1]),
              axis=-1, out=csum[..., 1:])

    def antideriv(x):
        j = np.clip(((x - origin) // spacing).astype(int), 0, n - 2)
        delta = x - (origin + spacing * j)
        vj = np.take_along_axis(
            np.broadcast_to(values, delta.shape + (n,)), j[..., None], -1
        )[..., 0]
        vj1 = np.take_along_axis(
            np.broadcast_to(values, delta.shape + (n,)), j[..., None] + 1, -1
        )[..., 0]
        base = np.take_along_axis(
            np.broadcast_to(csum, delta.shape + (n,)), j[..., None], -1
        )[..., 0]
        return base + delta * vj + delta * delta * (vj1 - vj) / (2.0 * spacing)

    out = antideriv(hi) - antideriv(lo)
    return np.where(hi > lo, out, 0.0)


class MomentTable:
    """Window integrals of interp1(f)(s) * s^l for l = 0..max_degree.

    Precomputes, per grid cell, the exact polynomial antiderivative of the
    linear interpolant of ``f`` multiplied by s^l, so that
    ``window_integrals(lo, hi)`` costs O(1) per window afterwards. This is
    the workhorse behind point evaluation of wave formulas whose kernels
    are polynomials in s.
    """

    def __init__(self, samples, spacing: float, origin: float, max_degree: int):
        f = np.asarray(samples, dtype=float)
        self.n = f.size
        self.spacing = float(spacing)
        self.origin = float(origin)
        self.max_degree = int(max_degree)
        h = self.spacing
        ncell = self.n - 1
        sj = self.origin + h * np.arange(ncell)
        fj = f[:-1]
        dfj = f[1:] - f[:-1]

        L = self.max_degree
        # poly[l] has shape (ncell, l+3): coefficients in sigma = (s-sj)/h of
        # h * int_0^sigma (fj + dfj*u) (sj + h*u)^l du, ascending powers.
        self._poly = np.zeros((L + 1, ncell, L + 3))
        for l in range(L + 1):
            for i in range(l + 1):
                c = comb(l, i) * sj ** (l - i) * h**i
                self._poly[l, :, i + 1] += h * c * fj / (i + 1)
                self._poly[l, :, i + 2] += h * c * dfj / (i + 2)
        # cumulative full-cell integrals, per degree
        full = self._poly.sum(axis=-1)
        self._cum = np.zeros((L + 1, self.n))
        np.cumsum(full, axis=-1, out=self._cum[:, 1:])

    def _eval(self, x):
        """Antiderivative values, shape (max_degree+1,) + x.shape."""
        h = self.spacing
        j = np.clip(((x - self.origin) // h).astype(int), 0, self.n - 2)
        sigma = (x - (self.origin + h * j)) / h
        coeffs = self._poly[:, j, :]          # (L+1, *x.shape, D)
        out = coeffs[..., -1]
        for k in range(coeffs.shape[-1] - 2, -1, -1):
            out = out * sigma + coeffs[..., k]
        return self._cum[:, j] + out

    def window_integrals(self, lo, hi):
        """int_{lo}^{hi} interp1(f)(s) s^l ds for each l, clipped to the grid.

        Returns shape (max_degree+1,) + broadcast(lo, hi).shape.
        """
        smax = self.origin + self.spacing * (self.n - 1)
        lo = np.clip(np.asarray(lo, dtype=float), self.origin, smax)
        hi = np.clip(np.asarray(hi, dtype=float), self.origin, smax)
        lo, hi = np.broadcast_arrays(lo, hi)
        out = self._eval(hi) - self._eval(lo)
        return np.where(hi > lo, out, 0.0)


def polynomial_window_integral(moments: MomentTable, coeffs, shift, scale, lo, hi):
    """int_{lo}^{hi} interp1(f)(s) * p((s - shift)/scale) ds.

    ``coeffs`` are ascending monomial coefficients of p. Expands the shifted
    argument through the binomial theorem onto the precomputed moments; the
    expansion is stable whenever |shift|/scale stays O(1) on the windows
    used (true for light-cone windows, where |s - shift| <= scale).
    """
    coeffs = np.asarray(coeffs, dtype=float)
    deg = coeffs.size - 1
    if deg > moments.max_degree:
        raise ValueError("moment table too shallow for this kernel")
    mom = moments.window_integrals(lo, hi)     # (L+1, ...)
    shift = np.asarray(shift, dtype=float)
    scale = np.asarray(scale, dtype=float)
    total = np.zeros(np.broadcast(shift, scale, mom[0]).shape)
    for m in range(deg + 1):
        if coeffs[m] == 0.0:
            continue
        term = np.zeros_like(total)
        for l in range(m + 1):
            term = term + comb(m, l) * (-shift) ** (m - l) * mom[l]
        total = total + coeffs[m] * term / scale**m
    return total
