"""Weighted moduli of smoothness of f^(r) with phi-adapted steps.

omega          sup over 0 < h <= t of || w_{kh}^r Delta^k_{h phi}(f^(r)) ||_{L_p(D_{kh})}
omega_star     L_p average over the step instead of the sup (p < inf)
omega_dt       weighted Ditzian-Totik modulus: main part plus forward and
               backward differences near the endpoints
omega_mainpart main part only, on [-1 + 2k^2h^2, 1 - 2k^2h^2]

The sup over h is taken on an HGrid (log spaced, right end included) and,
unless disabled, refined once on a linear sub-grid around the discrete argmax.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import differences as dif
from .funcspace import FunctionSpec
from .geometry import _phi_unchecked, _weight_unchecked, mu
from .quadrature import DEFAULT_RULE, HGrid, QuadratureRule, build_hgrid, lp_norm, nodes_weights

DT_A = 12.0
MAX_K_PLUS_R = 8
KINDS = ("omega", "omega_star", "omega_dt", "omega_mainpart")


@dataclass(frozen=True)
class ModulusQuery:
    f: FunctionSpec
    k: int
    r: int
    p: float
    t: float
    hgrid: Optional[HGrid] = None
    rule: QuadratureRule = DEFAULT_RULE
    refine: bool = True
    hcount: int = 40

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be a positive integer")
        if self.r < 0:
            raise ValueError("r must be nonnegative")
        if self.f.max_order < self.r:
            raise ValueError(f"{self.f.name}: max_order {self.f.max_order} < r={self.r}")
        if self.k + self.r > MAX_K_PLUS_R:
            raise ValueError(f"k + r must not exceed {MAX_K_PLUS_R}")
        if not float(self.p) >= 1:
            raise ValueError("p must be in [1, inf]")
        if not self.t > 0:
            raise ValueError("t must be positive")
        object.__setattr__(self, "p", float(self.p))
        if self.hgrid is None:
            object.__setattr__(self, "hgrid", build_hgrid(self.t, self.k, self.hcount))

    def key(self) -> dict:
        return {"f": self.f.name, "k": self.k, "r": self.r, "p": repr(self.p), "t": repr(float(self.t)),
                "hgrid": self.hgrid.params(), "rule": self.rule.params(), "refine": self.refine}


@dataclass(frozen=True)
class ModulusResult:
    value: float
    argmax_h: float
    kind: str
    resolution_note: str = ""
    terms: tuple = field(default=(), compare=False)


# ------------------------------------------------------------ integrands

def _stencil_breaks(f, offsets, lo, hi):
    """Points x in (lo, hi) where x + c*phi(x) hits an interior singular point."""
    out = []
    for s in f.singular_points:
        if not -1.0 < s < 1.0:
            continue
        for c in offsets:
            if c == 0:
                x = s
            else:
                root = abs(c) * math.sqrt(max(1.0 + c * c - s * s, 0.0))
                x = (s - root) / (1.0 + c * c) if c > 0 else (s + root) / (1.0 + c * c)
            if lo < x < hi:
                out.append(x)
    return tuple(sorted(set(out)))


def _directed_breaks(f, offsets, lo, hi):
    out = [s - c for s in f.singular_points if -1.0 < s < 1.0 for c in offsets]
    return tuple(sorted({x for x in out if lo < x < hi}))


def weighted_phi_difference(f, k, r, h, weight="w"):
    """x -> weight(x)^r * Delta^k_{h phi(x)}(f^(r), x) as a vectorised callable."""
    fr = lambda z: f.eval(z, r)  # noqa: E731

    def g(x):
        d = dif.sym_diff_phi_step(fr, k, h, x)
        if r == 0:
            return d
        wt = _weight_unchecked(k * h, x) if weight == "w" else _phi_unchecked(x)
        with np.errstate(invalid="ignore"):
            return wt ** r * d

    return g


def phi_step_norm(f, k, r, p, h, rule=DEFAULT_RULE, interval=None, weight="w", refine=True):
    """|| weight^r Delta^k_{h phi} f^(r) || on D_{kh} (optionally intersected with interval)."""
    delta = k * h
    if delta > 2:
        return 0.0
    m = mu(delta)
    lo, hi = -1.0 + m, 1.0 - m
    if interval is not None:
        lo, hi = max(lo, interval[0]), min(hi, interval[1])
    if hi < lo:
        return 0.0
    offsets = [(i - k / 2) * h for i in range(k + 1)]
    brk = _stencil_breaks(f, offsets, lo, hi)
    return lp_norm(weighted_phi_difference(f, k, r, h, weight), p, (lo, hi), rule, brk, refine)


def _inner_power_integral(f, k, r, p, tau, rule):
    """int_{D_{k tau}} |w^r Delta^k_{tau phi} f^(r)|^p dx for finite p."""
    delta = k * tau
    if delta > 2:
        return 0.0
    m = mu(delta)
    lo, hi = -1.0 + m, 1.0 - m
    if hi < lo:
        return 0.0
    offsets = [(i - k / 2) * tau for i in range(k + 1)]
    x, w = nodes_weights(lo, hi, rule, _stencil_breaks(f, offsets, lo, hi))
    y = np.abs(weighted_phi_difference(f, k, r, tau)(x))
    return float(np.dot(w, y ** p))


def _sup_over_grid(norm_of_h, grid, refine, polish=3):
    """Max of norm_of_h(h, refine_x) over the grid.

    The scan runs with refine_x=False; only the `polish` best steps are
    re-evaluated with local refinement in x (which matters for p = inf).
    """
    hs = [float(h) for h in grid.values]
    vals = [norm_of_h(h, False) for h in hs]
    i = int(np.argmax(vals))
    note = f"hgrid={grid.count}:{grid.spacing}"
    if grid.degenerate:
        note += ";degenerate-grid"
    if refine and len(hs) > 1 and vals[i] > 0:
        lo = hs[i - 1] if i > 0 else hs[0]
        hi = hs[i + 1] if i + 1 < len(hs) else hs[-1]
        for h in np.linspace(lo, hi, 10)[1:-1]:
            hs.append(float(h))
            vals.append(norm_of_h(float(h), False))
        note += ";refined"
    order = sorted(range(len(hs)), key=lambda j: (-vals[j], hs[j]))
    best_v, best_h = vals[order[0]], hs[order[0]]
    if polish:
        for j in order[:polish]:
            v = norm_of_h(hs[j], True)
            if v > best_v:
                best_v, best_h = v, hs[j]
    return float(best_v), float(best_h), note


# ------------------------------------------------------------ moduli

def omega(q: ModulusQuery) -> ModulusResult:
    def norm_of_h(h, rx):
        return phi_step_norm(q.f, q.k, q.r, q.p, h, q.rule, refine=rx)

    v, h, note = _sup_over_grid(norm_of_h, q.hgrid, q.refine)
    return ModulusResult(v, h, "omega", note)


def _tau_rule(T, panels=4, nodes=8):
    """32 Gauss points on [0, T], panels shrinking geometrically toward 0."""
    edges = [0.0] + [T * 4.0 ** (-j) for j in range(panels - 1, -1, -1)]
    gx, gw = np.polynomial.legendre.leggauss(nodes)
    xs, ws = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        xs.append(0.5 * (a + b) + 0.5 * (b - a) * gx)
        ws.append(0.5 * (b - a) * gw)
    return np.concatenate(xs), np.concatenate(ws)


def omega_star(q: ModulusQuery) -> ModulusResult:
    """Averaged modulus; equals omega for p = inf."""
    if math.isinf(q.p):
        res = omega(q)
        return ModulusResult(res.value, res.argmax_h, "omega_star", res.resolution_note + ";p=inf->omega")
    T = min(q.t, 2.0 / q.k)
    taus, wts = _tau_rule(T)
    inner = np.array([_inner_power_integral(q.f, q.k, q.r, q.p, tau, q.rule) for tau in taus])
    value = (float(np.dot(wts, inner)) / q.t) ** (1.0 / q.p)
    i = int(np.argmax(inner))
    # the largest step norm seen is also a valid lower estimate of omega
    return ModulusResult(value, float(taus[i]), "omega_star", "tau-gauss=4x8",
                         terms=(float(inner[i]) ** (1.0 / q.p),))


def dt_t_star(k, t):
    return 2.0 * k * k * t * t


def dt_small_t(k):
    """Range of t on which the DT comparison is made: t <= 1/(2k sqrt(A + k/2))."""
    return 1.0 / (2.0 * k * math.sqrt(DT_A + k / 2.0))


def _directed_norm(f, k, r, p, h, flavor, interval, rule, refine=True):
    lo, hi = interval
    if hi <= lo:
        return 0.0
    fr = lambda z: f.eval(z, r)  # noqa: E731

    def g(x):
        d = dif.directed_diff(fr, k, h, x, flavor)
        if r == 0:
            return d
        with np.errstate(invalid="ignore"):
            return _phi_unchecked(x) ** r * d

    sign = 1 if flavor == "forward" else -1
    brk = _directed_breaks(f, [sign * i * h for i in range(k + 1)], lo, hi)
    return lp_norm(g, p, (lo, hi), rule, brk, refine)


def omega_dt_weighted(q: ModulusQuery) -> ModulusResult:
    ts = dt_t_star(q.k, q.t)
    mid = (-1.0 + ts, 1.0 - ts)

    def main(h, rx):
        if mid[1] < mid[0]:
            return 0.0
        return phi_step_norm(q.f, q.k, q.r, q.p, h, q.rule, interval=mid, weight="phi", refine=rx)

    main_v, main_h, note = _sup_over_grid(main, q.hgrid, q.refine)
    edge_grid = build_hgrid(ts, q.k, q.hgrid.count)
    left_iv = (-1.0, min(-1.0 + DT_A * ts, 1.0))
    right_iv = (max(1.0 - DT_A * ts, -1.0), 1.0)
    fwd, _, _ = _sup_over_grid(lambda h, rx: _directed_norm(q.f, q.k, q.r, q.p, h, "forward", left_iv, q.rule, rx),
                               edge_grid, q.refine)
    bwd, _, _ = _sup_over_grid(lambda h, rx: _directed_norm(q.f, q.k, q.r, q.p, h, "backward", right_iv, q.rule, rx),
                               edge_grid, q.refine)
    note += f";A={DT_A:g};t*={ts!r}"
    return ModulusResult(main_v + fwd + bwd, main_h, "omega_dt", note, terms=(main_v, fwd, bwd))


def omega_mainpart(q: ModulusQuery) -> ModulusResult:
    def norm_of_h(h, rx):
        e = 2.0 * q.k * q.k * h * h
        if 1.0 - e < -1.0 + e:
            return 0.0
        return phi_step_norm(q.f, q.k, q.r, q.p, h, q.rule, interval=(-1.0 + e, 1.0 - e),
                             weight="phi", refine=rx)

    v, h, note = _sup_over_grid(norm_of_h, q.hgrid, q.refine)
    return ModulusResult(v, h, "omega_mainpart", note)


_DISPATCH = {"omega": omega, "omega_star": omega_star, "omega_dt": omega_dt_weighted,
             "omega_mainpart": omega_mainpart}
KIND_ALIASES = {"omega": "omega", "star": "omega_star", "dt": "omega_dt", "mainpart": "omega_mainpart",
                "omega_star": "omega_star", "omega_dt": "omega_dt", "omega_mainpart": "omega_mainpart"}


def compute(kind: str, q: ModulusQuery) -> ModulusResult:
    kind = KIND_ALIASES[kind]
    if q.f.degree is not None and q.f.degree - q.r < q.k:
        # k-th differences annihilate f^(r) exactly
        return ModulusResult(0.0, float(q.hgrid.values[-1]), kind, "annihilated")
    return _DISPATCH[kind](q)


def modulus_value(f, k, r, p, t, kind="omega", **kw) -> float:
    return compute(kind, ModulusQuery(f, k, r, p, t, **kw)).value
