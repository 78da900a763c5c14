"""L_p norms on subintervals of [-1, 1] and step grids for sup-over-h scans.

Integrals use composite Gauss-Legendre panels whose breakpoints follow a
cosine map, so panels shrink like the square root behaviour of phi near the
ends of each subinterval. Known singular points of the integrand are passed
as breakpoints, which puts them at panel ends where the grading is finest.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

H_FLOOR = 1e-5
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


class QuadratureError(ValueError):
    """Raised when an integrand sample is not finite."""

    def __init__(self, x, value):
        super().__init__(f"non-finite integrand value {value!r} at x={x!r}")
        self.x = x
        self.value = value


@dataclass(frozen=True)
class QuadratureRule:
    panels: int = 64
    nodes_per_panel: int = 16
    grading: str = "cosine"
    sup_samples: int = 4096
    tol_estimate: float = 1e-8

    def __post_init__(self):
        if self.panels < 1 or self.nodes_per_panel < 1:
            raise ValueError("panels and nodes_per_panel must be positive")
        if self.panels * self.nodes_per_panel > 10**6:
            raise ValueError("panels * nodes_per_panel must not exceed 1e6")
        if self.grading not in ("uniform", "cosine"):
            raise ValueError(f"unknown grading {self.grading!r}")

    def params(self) -> dict:
        return {"panels": self.panels, "nodes": self.nodes_per_panel,
                "grading": self.grading, "sup_samples": self.sup_samples}

    def refined(self, factor=2) -> "QuadratureRule":
        return QuadratureRule(self.panels * factor, self.nodes_per_panel, self.grading,
                              self.sup_samples * factor, self.tol_estimate)


DEFAULT_RULE = QuadratureRule()


@lru_cache(maxsize=64)
def _gauss(n):
    x, w = np.polynomial.legendre.leggauss(n)
    return x, w


@lru_cache(maxsize=256)
def _unit_breaks(panels, grading):
    j = np.arange(panels + 1)
    if grading == "cosine":
        b = 0.5 * (1.0 - np.cos(np.pi * j / panels))
    else:
        b = j / panels
    b[0], b[-1] = 0.0, 1.0
    return b


def _pieces(a, b, breakpoints):
    cuts = sorted({float(c) for c in breakpoints if a < c < b})
    edges = [a] + cuts + [b]
    return [(lo, hi) for lo, hi in zip(edges[:-1], edges[1:]) if hi > lo]


def nodes_weights(a, b, rule: QuadratureRule = DEFAULT_RULE, breakpoints=()):
    """Composite Gauss nodes and weights on [a, b], split at the breakpoints."""
    pieces = _pieces(a, b, breakpoints)
    if not pieces:
        return np.empty(0), np.empty(0)
    total = b - a
    gx, gw = _gauss(rule.nodes_per_panel)
    xs, ws = [], []
    for lo, hi in pieces:
        share = rule.panels if len(pieces) == 1 else max(4, int(round(rule.panels * (hi - lo) / total)))
        brk = lo + (hi - lo) * _unit_breaks(share, rule.grading)
        left, right = brk[:-1], brk[1:]
        half = 0.5 * (right - left)
        mid = 0.5 * (right + left)
        xs.append((mid[:, None] + half[:, None] * gx[None, :]).ravel())
        ws.append((half[:, None] * gw[None, :]).ravel())
    return np.concatenate(xs), np.concatenate(ws)


_EDGE_FRACTIONS = 2.0 ** -np.arange(12, 41)


@lru_cache(maxsize=256)
def _unit_samples(m):
    theta = np.pi * (np.arange(m) + 0.5) / m
    pts = np.concatenate([_EDGE_FRACTIONS, 0.5 * (1.0 - np.cos(theta)), 1.0 - _EDGE_FRACTIONS])
    pts = np.unique(pts)
    return pts[(pts > 0.0) & (pts < 1.0)]


def sample_points(a, b, count, breakpoints=()):
    """Interior points clustered toward the ends of each piece.

    Chebyshev-type points, plus geometric sequences approaching each end so
    that features at scale ~h^2 next to the edge of D_{kh} are seen.
    """
    pieces = _pieces(a, b, breakpoints)
    total = b - a
    out = []
    for lo, hi in pieces:
        m = count if len(pieces) == 1 else max(16, int(round(count * (hi - lo) / total)))
        pts = lo + (hi - lo) * _unit_samples(m)
        out.append(pts[(pts > lo) & (pts < hi)])
    return np.concatenate(out) if out else np.empty(0)


def _check_finite(x, y):
    bad = ~np.isfinite(y)
    if np.any(bad):
        i = int(np.argmax(bad))
        raise QuadratureError(float(x[i]), float(y[i]))


def _golden_max(g, lo, hi, iters=80):
    """Maximise |g| on [lo, hi] by golden-section search; returns (x, |g(x)|)."""
    a, b = lo, hi
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = abs(float(g(np.array([c]))[0])), abs(float(g(np.array([d]))[0]))
    for _ in range(iters):
        if b - a <= 1e-15 * max(1.0, abs(a)):
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = abs(float(g(np.array([c]))[0]))
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = abs(float(g(np.array([d]))[0]))
    return (c, fc) if fc >= fd else (d, fd)


def sup_norm(g_eval, a, b, rule: QuadratureRule = DEFAULT_RULE, breakpoints=(), refine=True):
    """Numerical sup of |g| on [a, b]: dense graded sample plus local refinement."""
    if b < a:
        return 0.0
    if b == a:
        y = np.abs(g_eval(np.array([a])))
        return float(y[0]) if np.isfinite(y[0]) else 0.0
    x = sample_points(a, b, rule.sup_samples, breakpoints)
    y = np.abs(np.asarray(g_eval(x), dtype=float))
    _check_finite(x, y)
    ends = np.array([a, b] + [c for c in breakpoints if a < c < b], dtype=float)
    ye = np.abs(np.asarray(g_eval(ends), dtype=float))
    ye = np.where(np.isfinite(ye), ye, 0.0)
    i = int(np.argmax(y))
    best = max(float(y[i]), float(ye.max()))
    if refine and y[i] > 0:
        lo = x[i - 1] if i > 0 else a
        hi = x[i + 1] if i + 1 < x.size else b
        # a breakpoint between the neighbours bounds the bracket
        for c in breakpoints:
            if x[i] < c < hi:
                hi = c
            if lo < c < x[i]:
                lo = c

        def absg(z):
            v = np.asarray(g_eval(z), dtype=float)
            return np.where(np.isfinite(v), v, 0.0)

        _, val = _golden_max(absg, lo, hi)
        best = max(best, val)
    return best


def lp_norm(g_eval, p, interval=(-1.0, 1.0), rule: QuadratureRule = DEFAULT_RULE,
            breakpoints=(), refine=True):
    """||g||_{L_p(interval)} for p in [1, inf]."""
    a, b = float(interval[0]), float(interval[1])
    if a < -1.0 or b > 1.0:
        raise ValueError("interval must lie inside [-1, 1]")
    p = float(p)
    if p < 1:
        raise ValueError("p must be in [1, inf]")
    if math.isinf(p):
        return sup_norm(g_eval, a, b, rule, breakpoints, refine)
    if b <= a:
        return 0.0
    x, w = nodes_weights(a, b, rule, breakpoints)
    y = np.abs(np.asarray(g_eval(x), dtype=float))
    _check_finite(x, y)
    return float(np.dot(w, y ** p) ** (1.0 / p)) if p != 1.0 else float(np.dot(w, y))


def integral(g_eval, interval, rule: QuadratureRule = DEFAULT_RULE, breakpoints=()):
    x, w = nodes_weights(float(interval[0]), float(interval[1]), rule, breakpoints)
    y = np.asarray(g_eval(x), dtype=float)
    _check_finite(x, y)
    return float(np.dot(w, y))


@dataclass(frozen=True)
class HGrid:
    """Steps h for the discretised sup over 0 < h <= min(t, 2/k)."""

    t: float
    count: int
    spacing: str
    floor: float
    values: tuple = field(default=(), repr=False)
    degenerate: bool = False

    @property
    def hmax(self):
        return self.values[-1]

    def as_array(self):
        return np.asarray(self.values, dtype=float)

    @classmethod
    def from_values(cls, t, values, floor=H_FLOOR):
        vals = tuple(sorted(set(float(v) for v in values)))
        return cls(t=t, count=len(vals), spacing="explicit", floor=floor, values=vals)

    def params(self) -> dict:
        return {"count": self.count, "spacing": self.spacing, "floor": self.floor,
                "values": [repr(v) for v in self.values]}


def build_hgrid(t: float, k: int, count: int = 40, floor: float = H_FLOOR,
                spacing: str = "log") -> HGrid:
    """Log grid on [max(floor, t_eff/1e3), t_eff] with t_eff = min(t, 2/k), endpoint exact."""
    if t <= 0:
        raise ValueError("t must be positive")
    top = min(float(t), 2.0 / k)
    if top <= floor:
        return HGrid(t=t, count=1, spacing=spacing, floor=floor, values=(floor,), degenerate=True)
    lo = max(floor, top / 1e3)
    if count == 1:
        vals = np.array([top])
    elif spacing == "log":
        vals = np.geomspace(lo, top, count)
    else:
        vals = np.linspace(lo, top, count)
    vals[-1] = top
    return HGrid(t=t, count=count, spacing=spacing, floor=floor, values=tuple(float(v) for v in vals))
