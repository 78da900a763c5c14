"""The weight phi, the step weight w_delta and the domains D_delta on [-1, 1]."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class DomainInterval:
    delta: float
    lo: float
    hi: float
    empty: bool

    def contains(self, x):
        if self.empty:
            return np.zeros(np.shape(x), dtype=bool) if np.ndim(x) else False
        return (self.lo <= x) & (x <= self.hi)


def phi(x):
    """sqrt(1 - x^2); raises for |x| > 1."""
    xa = np.asarray(x, dtype=float)
    if np.any(np.abs(xa) > 1):
        raise ValueError("phi is defined on [-1, 1] only")
    out = np.sqrt((1.0 - xa) * (1.0 + xa))
    return float(out) if np.ndim(out) == 0 else out


def _phi_unchecked(x):
    x = np.asarray(x, dtype=float)
    return np.sqrt(np.clip((1.0 - x) * (1.0 + x), 0.0, None))


def mu(delta):
    """Distance from +-1 to the edge of D_delta: 2 delta^2 / (4 + delta^2)."""
    d = np.asarray(delta, dtype=float)
    out = 2.0 * d * d / (4.0 + d * d)
    return float(out) if np.ndim(out) == 0 else out


def domain(delta: float) -> DomainInterval:
    if delta <= 0:
        raise ValueError("delta must be positive")
    if delta > 2:
        return DomainInterval(delta, np.nan, np.nan, True)
    m = mu(delta)
    return DomainInterval(delta, -1.0 + m, 1.0 - m, False)


def _in_weight_domain(delta, x):
    dom = domain(delta)
    x = np.asarray(x, dtype=float)
    return dom.contains(x) | (np.abs(x) == 1.0)


def weight_w(delta: float, x):
    """Step weight sqrt((1 - x - delta phi/2)(1 + x - delta phi/2)).

    Defined on D_delta together with the points +-1. Tiny negative products
    produced by roundoff at the edge of D_delta are clamped to zero.
    """
    x = np.asarray(x, dtype=float)
    if not np.all(_in_weight_domain(delta, x)):
        raise ValueError(f"x outside the domain of w_{delta}")
    return _weight_unchecked(delta, x)


def _weight_unchecked(delta, x):
    x = np.asarray(x, dtype=float)
    half = 0.5 * delta * _phi_unchecked(x)
    prod = (1.0 - x - half) * (1.0 + x - half)
    out = np.sqrt(np.clip(prod, 0.0, None))
    return float(out) if np.ndim(out) == 0 else out


def endpoint_map(delta_signed: float, x):
    """y(x) = x + delta_signed * phi(x) / 2 for x in D_|delta_signed|."""
    if abs(delta_signed) > 2:
        raise ValueError("|delta_signed| must not exceed 2")
    x = np.asarray(x, dtype=float)
    if delta_signed != 0:
        dom = domain(abs(delta_signed))
        if not np.all(dom.contains(x)):
            raise ValueError("x outside D_|delta_signed|")
    elif np.any(np.abs(x) > 1):
        raise ValueError("x outside [-1, 1]")
    out = np.clip(x + 0.5 * delta_signed * _phi_unchecked(x), -1.0, 1.0)
    return float(out) if np.ndim(out) == 0 else out


# Properties of w_delta and D_delta, as vectorised predicates.

def prop_weight_below_phi_u(delta, x, u):
    """w_delta(x) <= phi(u) for u in [-|x| - delta phi(x)/2, |x| + delta phi(x)/2]."""
    return _weight_unchecked(delta, x) <= _phi_unchecked(u)


def prop_weight_below_phi(delta, x):
    return _weight_unchecked(delta, x) <= _phi_unchecked(x)


def prop_phi_below_twice_weight(delta, x):
    """phi(x) <= 2 w_delta(x), meaningful for x in D_{2 delta}."""
    return _phi_unchecked(x) <= 2.0 * _weight_unchecked(delta, x)


def prop_scaled_phi_slope(delta, x):
    """delta |phi'(x)| <= 1 using |phi'(x)| = |x| / phi(x)."""
    x = np.asarray(x, dtype=float)
    return delta * np.abs(x) <= _phi_unchecked(x)


def endpoint_map_slope(delta_signed, x, step=1e-7):
    dom = domain(abs(delta_signed)) if delta_signed else None
    x = np.asarray(x, dtype=float)
    lo = x - step
    hi = x + step
    if dom is not None:
        lo = np.maximum(lo, dom.lo)
        hi = np.minimum(hi, dom.hi)
    ylo = lo + 0.5 * delta_signed * _phi_unchecked(lo)
    yhi = hi + 0.5 * delta_signed * _phi_unchecked(hi)
    return (yhi - ylo) / (hi - lo)


def prop_domain_nested(delta1, delta2):
    """delta1 > delta2 implies D_delta1 inside D_delta2."""
    if not delta1 > delta2:
        return True
    d1, d2 = domain(delta1), domain(delta2)
    if d1.empty:
        return True
    if d2.empty:
        return False
    return d2.lo <= d1.lo and d1.hi <= d2.hi
