"""Finite differences with the truncation convention on an interval J.

A difference whose stencil leaves J is identically zero. The phi-step
difference decides membership of x in D_{kh} through the closed form of mu,
so truncation is reproducible bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product

import numpy as np

from .geometry import _phi_unchecked, mu

MAX_ORDER = 20
# binom(k, i) * (-1)^(k - i) as exact integers
_WEIGHTS = tuple(tuple(math.comb(k, i) * (-1) ** (k - i) for i in range(k + 1))
                 for k in range(MAX_ORDER + 1))


def stencil_weights(k: int):
    if not 0 <= k <= MAX_ORDER:
        raise ValueError(f"difference order must be in [0, {MAX_ORDER}]")
    return _WEIGHTS[k]


@dataclass(frozen=True)
class DifferenceQuery:
    k: int
    h: float
    x: float
    flavor: str = "symmetric"
    interval: tuple = (-1.0, 1.0)

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.h < 0:
            raise ValueError("h must be >= 0")
        if not self.interval[0] < self.interval[1]:
            raise ValueError("interval must have lo < hi")
        if self.flavor not in ("symmetric", "forward", "backward"):
            raise ValueError(f"unknown flavor {self.flavor!r}")


def _combine(f_eval, k, points):
    w = stencil_weights(k)
    total = 0.0
    with np.errstate(invalid="ignore", over="ignore"):
        for i, pt in enumerate(points):
            total = total + w[i] * f_eval(pt)
    return total


def sym_diff(f_eval, q: DifferenceQuery):
    """k-th symmetric difference at x, zero when x +- kh/2 leaves the interval."""
    k, h, x = q.k, q.h, np.asarray(q.x, dtype=float)
    lo, hi = q.interval
    inside = (x - k * h / 2 >= lo) & (x + k * h / 2 <= hi)
    pts = [x + (i - k / 2) * h for i in range(k + 1)]
    if np.ndim(x) == 0:
        return float(_combine(f_eval, k, pts)) if inside else 0.0
    xs = np.where(inside, x, 0.0)
    pts = [xs + (i - k / 2) * h for i in range(k + 1)]
    return np.where(inside, _combine(f_eval, k, pts), 0.0)


def in_domain(k: int, h: float, x):
    """x in D_{kh}, decided by |x| <= 1 - mu(kh)."""
    delta = k * h
    if delta > 2:
        return np.zeros(np.shape(x), dtype=bool) if np.ndim(x) else False
    return np.abs(x) <= 1.0 - mu(delta)


def sym_diff_phi_step(f_eval, k: int, h: float, x):
    """Symmetric k-th difference with step h*phi(x), zero off D_{kh}."""
    x = np.asarray(x, dtype=float)
    inside = in_domain(k, h, x)
    if np.ndim(x) == 0:
        if not inside:
            return 0.0
        step = h * float(_phi_unchecked(x))
        pts = [np.clip(x + (i - k / 2) * step, -1.0, 1.0) for i in range(k + 1)]
        return float(_combine(f_eval, k, pts))
    xs = x[inside]
    out = np.zeros_like(x)
    if xs.size:
        step = h * _phi_unchecked(xs)
        pts = [np.clip(xs + (i - k / 2) * step, -1.0, 1.0) for i in range(k + 1)]
        out[inside] = _combine(f_eval, k, pts)
    return out


def directed_diff(f_eval, k: int, h: float, x, flavor: str, interval=(-1.0, 1.0)):
    """Forward (x, x+h, ..., x+kh) or backward (x, x-h, ..., x-kh) difference.

    Backward uses sum_i binom(k,i) (-1)^(k-i) f(x - (k-i) h), the mirror image
    of the forward stencil; both vanish when a stencil point leaves the interval.
    """
    if flavor not in ("forward", "backward"):
        raise ValueError("flavor must be 'forward' or 'backward'")
    lo, hi = interval
    x = np.asarray(x, dtype=float)
    if flavor == "forward":
        inside = (x >= lo) & (x + k * h <= hi)
        offsets = [i * h for i in range(k + 1)]
    else:
        inside = (x - k * h >= lo) & (x <= hi)
        offsets = [-(k - i) * h for i in range(k + 1)]
    if np.ndim(x) == 0:
        return float(_combine(f_eval, k, [x + o for o in offsets])) if inside else 0.0
    out = np.zeros_like(x)
    xs = x[inside]
    if xs.size:
        out[inside] = _combine(f_eval, k, [xs + o for o in offsets])
    return out


def iterated_integral_identity_check(g, k: int, h: float, x: float, nodes: int = 20):
    """(Delta_h^k g(x), k-fold integral of g^(k)(x + u_1 + ... + u_k) over [-h/2, h/2]^k).

    The nested integral uses a tensor Gauss-Legendre rule; polynomial
    integrands of degree < 2*nodes are integrated exactly.
    """
    if g.max_order < k:
        raise ValueError(f"{g.name} has no derivative of order {k}")
    if not (-1.0 < x - k * h / 2 and x + k * h / 2 < 1.0):
        raise ValueError("stencil must stay inside (-1, 1)")
    diff = sym_diff(g, DifferenceQuery(k, h, x))
    t, w = np.polynomial.legendre.leggauss(nodes)
    u = 0.5 * h * t
    wu = 0.5 * h * w
    if k <= 3:
        grids = np.meshgrid(*([u] * k), indexing="ij")
        weights = np.ones_like(grids[0])
        for ax, wk in enumerate(np.meshgrid(*([wu] * k), indexing="ij")):
            weights = weights * wk
        integral = float(np.sum(weights * g.eval(x + sum(grids), k)))
    else:
        integral = 0.0
        for idx in product(range(nodes), repeat=k):
            integral += np.prod(wu[list(idx)]) * g.eval(x + u[list(idx)].sum(), k)
    return float(diff), integral
