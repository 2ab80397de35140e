"""Channel geometry, channel-localized space-time norms, and aggregates.

The exterior of the light cone is tiled by the moving shells

    Omega_j = {(x, t): |t| + 2^j <= |x| < |t| + 2^{j+1}},

and the norms here are L^p in time of L^q in space, restricted to one shell.
Quadrature nodes are built so that doubling every length (window, channel
index shift j -> j+1) maps node sets onto node sets exactly in floating
point; the dyadic rescaling identities then hold to round-off.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ._quad import _gl_reference
from .freewave import sphere_area

__all__ = [
    "ExponentSet",
    "ChannelRegion",
    "ChannelNormVector",
    "validate_exponents",
    "solve_q",
    "coupling_weights",
    "channel_norm",
    "channel_vector",
    "exterior_norms",
    "y_norm",
    "z_norm",
    "critical_pair",
    "save_channel_vector",
]

_IDENTITY_TOL = 1e-12


def solve_q(d: int, beta: float, p: float) -> float:
    """The space exponent forced by the scaling identity for given (d, beta, p)."""
    rhs = d / 2.0 - beta - 1.0 / p
    if rhs <= 0:
        raise ValueError("no admissible q: d/2 - beta - 1/p must be positive")
    return d / rhs


def critical_pair(d: int) -> tuple[float, float]:
    """The energy-critical exponents ((d+2)/(d-2), 2(d+2)/(d-2))."""
    return ((d + 2.0) / (d - 2.0), 2.0 * (d + 2.0) / (d - 2.0))


@dataclass(frozen=True)
class ExponentSet:
    """Exponents (d, beta, p, q, p_tilde, q_tilde) tied by the two scaling
    identities 1/p + d/q = d/2 - beta and 1/pt + d/qt = d/2 - beta + 2."""

    d: int
    beta: float
    p: float
    q: float
    p_tilde: float = 1.0
    q_tilde: float = 2.0

    @classmethod
    def for_beta(cls, d: int, beta: float, q: float,
                 p_tilde: float = 1.0) -> "ExponentSet":
        """Solve both identities for (p, q_tilde) given (d, beta, q, p_tilde)."""
        inv_p = d / 2.0 - beta - d / q
        if inv_p <= 0 or inv_p > 1:
            raise ValueError(f"q={q} leaves 1/p={inv_p} outside (0, 1]")
        inv_qt = (d / 2.0 - beta + 2.0 - 1.0 / p_tilde) / d
        if inv_qt <= 0 or inv_qt > 1:
            raise ValueError(f"p_tilde={p_tilde} leaves q_tilde inadmissible")
        return cls(d, beta, 1.0 / inv_p, q, p_tilde, 1.0 / inv_qt)


def validate_exponents(e: ExponentSet) -> bool:
    """True iff all ranges hold and both identities hold to 1e-12."""
    if e.d % 2 == 0 or e.d < 3:
        return False
    if not 0.5 < e.beta < 1.5:
        return False
    for expo in (e.p, e.q, e.p_tilde, e.q_tilde):
        if not (1.0 <= expo < np.inf):
            return False
    lhs = 1.0 / e.p + e.d / e.q - (e.d / 2.0 - e.beta)
    rhs = 1.0 / e.p_tilde + e.d / e.q_tilde - (e.d / 2.0 - e.beta + 2.0)
    return abs(lhs) < _IDENTITY_TOL and abs(rhs) < _IDENTITY_TOL


def coupling_weights(n, e: ExponentSet):
    """The summable weight sequence governing how strongly a source at
    dyadic scale k feeds channel k + n: 2^{(1/2-beta) n} outward (n >= -1)
    and 2^{n/q} inward (n <= -2)."""
    n = np.asarray(n, dtype=float)
    out = np.where(n >= -1.0, np.exp2((0.5 - e.beta) * n), np.exp2(n / e.q))
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class ChannelRegion:
    """The moving shell with dyadic index j."""

    j: int

    @property
    def inner(self) -> float:
        return 2.0**self.j

    @property
    def outer(self) -> float:
        return 2.0 ** (self.j + 1)

    def contains(self, r, t):
        gap = np.asarray(r) - np.abs(t)
        return (gap >= self.inner) & (gap < self.outer)


# ---------------------------------------------------------------------------
# quadrature rules


def _time_rule(window, j: int, per_octave: int = 3, nodes: int = 6):
    """Geometric-toward-zero panel rule on the window, split at t = 0.

    Panels refine down to a scale tied to the channel width 2^j so the
    moving-shell transitions are resolved; all constructions are affine in
    the window bounds and so commute exactly with dyadic rescaling.
    """
    t_lo, t_hi = window
    if t_hi <= t_lo:
        return np.array([]), np.array([])
    ref_x, ref_w = _gl_reference(nodes)
    pieces = []
    for sign, inner, extent in ((1.0, max(t_lo, 0.0), t_hi),
                                (-1.0, max(-t_hi, 0.0), -t_lo)):
        if extent <= 0 or extent <= inner:
            continue
        n_oct = max(3, int(np.ceil(np.log2(max(extent / 2.0**j, 2.0)))) + 2)
        steps = np.arange(n_oct * per_octave, -1, -1, dtype=float) / per_octave
        edges = extent * np.exp2(-steps)
        edges = np.concatenate([[0.0], edges])
        if inner > 0.0:
            keep = edges > inner
            edges = np.concatenate([[inner], edges[keep]])
        a = edges[:-1, None]
        width = (edges[1:] - edges[:-1])[:, None]
        x = sign * (a + width * ref_x)
        w = width * ref_w
        pieces.append((x.ravel(), w.ravel()))
    if not pieces:
        return np.array([]), np.array([])
    t_nodes = np.concatenate([p[0] for p in pieces])
    t_weights = np.concatenate([p[1] for p in pieces])
    return t_nodes, t_weights


def _shell_rule(t_nodes, j: int, d: int, R: float = 0.0,
                panels: int = 4, nodes: int = 8):
    """Radial nodes/weights on the shell [|t| + max(2^j, R), |t| + 2^{j+1}).

    Returns (r, w) with shape (nt, panels*nodes); w already carries the
    surface measure r^{d-1} and the sphere area.
    """
    ref_x, ref_w = _gl_reference(nodes)
    abs_t = np.abs(np.asarray(t_nodes, dtype=float))[:, None]
    lo_off = max(2.0**j, R)
    hi_off = 2.0 ** (j + 1)
    if lo_off >= hi_off:
        raise ValueError("exterior radius covers the whole channel")
    offsets = lo_off + (hi_off - lo_off) * np.arange(panels + 1) / panels
    rs, ws = [], []
    for i in range(panels):
        a = abs_t + offsets[i]
        width = offsets[i + 1] - offsets[i]
        rs.append(a + width * ref_x)
        ws.append(np.broadcast_to(width * ref_w, a.shape[:1] + ref_w.shape))
    r = np.concatenate(rs, axis=1)
    w = np.concatenate(ws, axis=1)
    return r, sphere_area(d) * w * r ** (d - 1)


def _inner_q_integrals(u, j, q, d, t_nodes, R=0.0, panels=4, nodes=8):
    r, w = _shell_rule(t_nodes, j, d, R=R, panels=panels, nodes=nodes)
    t = np.broadcast_to(np.asarray(t_nodes, dtype=float)[:, None], r.shape)
    vals = np.asarray(u.eval(r.ravel(), t.ravel()), dtype=float).reshape(r.shape)
    return np.sum(w * np.abs(vals) ** q, axis=1)


def _is_void(u, j: int, window) -> bool:
    """Support arithmetic: True when u provably vanishes on the channel."""
    exact = getattr(u, "exact_channel", None)
    if exact is not None and j != exact:
        return True
    kmax = getattr(u, "max_channel", None)
    if kmax is not None and j > kmax:
        return True
    supp = getattr(u, "s_support", None)
    if supp is not None:
        big = max(abs(window[0]), abs(window[1])) + 2.0 ** (j + 1)
        if supp[0] > big or supp[1] < -big:
            return True
    return False


def channel_norm(u, j: int, p: float, q: float, d: int, window,
                 R: float = 0.0, t_rule=None, panels: int = 4,
                 r_nodes: int = 8, per_octave: int = 3,
                 t_nodes: int = 6) -> float:
    """L^p-in-time, L^q-in-space norm of the field over channel j.

    ``window`` is the time interval; ``R`` restricts further to the exterior
    region {r > R + |t|} (channels fully swallowed by R give 0). Quadrature
    is tensor-product Gauss-Legendre: mapped panels across the moving shell,
    geometric panels toward t = 0 in time.
    """
    if not (1.0 <= p < np.inf and 1.0 <= q < np.inf):
        raise ValueError("exponents with p or q infinite are not supported")
    if window[1] <= window[0]:
        return 0.0
    if R >= 2.0 ** (j + 1):
        return 0.0
    if _is_void(u, j, window):
        return 0.0
    if t_rule is None:
        t_rule = _time_rule(window, j, per_octave=per_octave, nodes=t_nodes)
    tq, tw = t_rule
    if tq.size == 0:
        return 0.0
    inner = _inner_q_integrals(u, j, q, d, tq, R=R, panels=panels, nodes=r_nodes)
    return float(np.sum(tw * inner ** (p / q)) ** (1.0 / p))


@dataclass(frozen=True)
class ChannelNormVector:
    """Per-channel norms over a finite index window plus their l2 total."""

    jmin: int
    jmax: int
    values: np.ndarray
    aggregate: float
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        if values.size != self.jmax - self.jmin + 1:
            raise ValueError("values length must match the index window")

    @property
    def jgrid(self) -> np.ndarray:
        return np.arange(self.jmin, self.jmax + 1)


def channel_vector(u, e: ExponentSet, jmin: int, jmax: int, window,
                   R: float = 0.0, **quad) -> ChannelNormVector:
    """Channel norms for j in [jmin, jmax] and their l2 aggregate.

    Channels that support arithmetic proves empty are reported as exact
    zeros without quadrature.
    """
    if jmin > jmax:
        raise ValueError("jmin must not exceed jmax")
    values = np.zeros(jmax - jmin + 1)
    for idx, j in enumerate(range(jmin, jmax + 1)):
        values[idx] = channel_norm(u, j, e.p, e.q, e.d, window, R=R, **quad)
    agg = float(np.sqrt(np.sum(values**2)))
    meta = {"p": e.p, "q": e.q, "d": e.d, "beta": e.beta,
            "window": [float(window[0]), float(window[1])], "R": R}
    return ChannelNormVector(jmin, jmax, values, agg, meta)


def exterior_norms(u, p: float, q: float, d: int, window,
                   jmin: int, jmax: int, R: float = 0.0,
                   panels: int = 4, r_nodes: int = 8,
                   t_nodes: int = 6):
    """Global norm over the union of channels and the per-channel norms.

    Both are computed on one shared time rule so that the l^p sandwich
    between the aggregate and the global norm is a theorem about the very
    same quadrature sums. Returns (global_norm, per_channel_array).
    """
    t_rule = _time_rule(window, jmin, nodes=t_nodes)
    tq, tw = t_rule
    inners = np.zeros((jmax - jmin + 1, tq.size))
    for idx, j in enumerate(range(jmin, jmax + 1)):
        if R >= 2.0 ** (j + 1) or _is_void(u, j, window):
            continue
        inners[idx] = _inner_q_integrals(u, j, q, d, tq, R=R,
                                         panels=panels, nodes=r_nodes)
    total = np.sum(inners, axis=0)
    global_norm = float(np.sum(tw * total ** (p / q)) ** (1.0 / p))
    per_channel = np.array([
        float(np.sum(tw * row ** (p / q)) ** (1.0 / p)) for row in inners])
    return global_norm, per_channel


def y_norm(u, d: int, window, jmin: int, jmax: int, R: float = 0.0,
           **quad) -> float:
    """l2-over-channels aggregate at the energy-critical pair."""
    p, q = critical_pair(d)
    e = ExponentSet(d, 1.0, p, q)
    return channel_vector(u, e, jmin, jmax, window, R=R, **quad).aggregate


def z_norm(F, d: int, window, jmin: int, jmax: int, R: float = 0.0,
           **quad) -> float:
    """l2-over-channels aggregate of L^1-in-time L^2-in-space norms."""
    values = [channel_norm(F, j, 1.0, 2.0, d, window, R=R, **quad)
              for j in range(jmin, jmax + 1)]
    return float(np.sqrt(np.sum(np.square(values))))


def save_channel_vector(vec: ChannelNormVector, path) -> None:
    """CSV j,norm plus a JSON sidecar with the aggregate and exponents."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["j", "norm"])
        for j, v in zip(vec.jgrid, vec.values):
            writer.writerow([int(j), repr(float(v))])
    sidecar = {"aggregate": vec.aggregate, "jmin": vec.jmin,
               "jmax": vec.jmax, "exponents": vec.meta}
    path.with_suffix(".json").write_text(json.dumps(sidecar, indent=2))
