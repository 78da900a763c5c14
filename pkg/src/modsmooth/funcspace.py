"""Test functions on [-1, 1] with analytic derivatives of every available order.

Each catalog member knows its derivatives in closed form and carries the
smoothness information needed to pick meaningful (r, p) combinations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional

import numpy as np

P_VALUES = (1.0, 2.0, math.inf)


@dataclass(frozen=True)
class SmoothnessMeta:
    """Smoothness facts about a catalog member.

    alpha is the expected exponent in E_n(f)_inf ~ n^-alpha (inf for entire
    functions, None for polynomials). in_Bpr_for lists the (r, p) pairs with
    f^(r-1) locally absolutely continuous and phi^r f^(r) in L_p.
    """

    alpha: Optional[float] = None
    singular_points: tuple = ()
    in_Bpr_for: tuple = ()


@dataclass(frozen=True)
class FunctionSpec:
    name: str
    deriv: Callable = field(repr=False, compare=False)
    max_order: int
    smoothness_meta: SmoothnessMeta = SmoothnessMeta()
    degree: Optional[int] = None
    # orders that stay defined at the singular points
    defined_at_singular: Callable = field(default=lambda order: False, repr=False, compare=False)

    def eval(self, x, order=0):
        """Vectorised f^(order)(x) without domain checks."""
        if order < 0 or order > self.max_order:
            raise ValueError(f"{self.name}: order {order} not in [0, {self.max_order}]")
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            out = self.deriv(x, order)
        return np.broadcast_to(out, x.shape).astype(float, copy=False) if x.ndim else float(out)

    def __call__(self, x):
        return self.eval(x, 0)

    @property
    def singular_points(self):
        return self.smoothness_meta.singular_points

    def in_Bpr(self, r, p) -> bool:
        return (int(r), float(p)) in self.smoothness_meta.in_Bpr_for


class CatalogError(KeyError):
    pass


def eval_deriv(f: FunctionSpec, x: float, order: int) -> float:
    """Checked scalar evaluation of f^(order)(x) for x in (-1, 1)."""
    if not -1.0 < x < 1.0:
        raise ValueError(f"x={x} outside (-1, 1)")
    if order < 0 or order > f.max_order:
        raise ValueError(f"order {order} not in [0, {f.max_order}] for {f.name}")
    if x in f.singular_points and not f.defined_at_singular(order):
        raise ValueError(f"{f.name}: derivative of order {order} undefined at x={x}")
    val = f.eval(x, order)
    if not math.isfinite(val):
        raise ValueError(f"{f.name}: non-finite derivative of order {order} at x={x}")
    return val


def _falling(a, j):
    out = 1.0
    for i in range(j):
        out *= a - i
    return out


def _pairs(orders, good):
    return tuple((r, p) for r in orders for p in P_VALUES if good(r, p))


def _power_ok(e, p):
    """Is a local power |s|^e (near a point) in L_p?"""
    return e >= 0 if math.isinf(p) else e * p > -1


def _monomial(m):
    def deriv(x, order):
        if order > m:
            return np.zeros_like(x)
        return float(math.perm(m, order)) * x ** (m - order)

    return FunctionSpec(f"x^{m}", deriv, max_order=12, degree=m,
                        smoothness_meta=SmoothnessMeta(in_Bpr_for=_pairs(range(13), lambda r, p: True)))


def _abs_power(alpha, max_order=4):
    def deriv(x, order):
        c = _falling(alpha, order)
        e = alpha - order
        sgn = np.sign(x) ** (order % 2)
        if e == 0:
            return c * sgn
        return c * np.abs(x) ** e * sgn

    def good(r, p):
        return r == 0 or _power_ok(alpha - r, p)

    return FunctionSpec(
        f"abs_x_{alpha:g}", deriv, max_order=max_order,
        smoothness_meta=SmoothnessMeta(alpha=alpha, singular_points=(0.0,),
                                       in_Bpr_for=_pairs(range(max_order + 1), good)),
        defined_at_singular=lambda order: alpha - order > 0,
    )


def _one_minus_power(beta, max_order=4):
    def deriv(x, order):
        return _falling(beta, order) * (-1) ** order * (1.0 - x) ** (beta - order)

    def good(r, p):
        # phi^r f^(r) ~ (1 - x)^(beta - r/2) at x = 1
        return r == 0 or _power_ok(beta - r / 2.0, p)

    return FunctionSpec(
        f"one_minus_x_{beta:g}", deriv, max_order=max_order,
        smoothness_meta=SmoothnessMeta(alpha=2.0 * beta, singular_points=(1.0,),
                                       in_Bpr_for=_pairs(range(max_order + 1), good)),
    )


def _phi_inverse_family(r):
    """f_r with f_r^(r) = phi^-r; every order in closed form."""
    if r == 1:
        table = {
            0: lambda x: np.arcsin(x),
            1: lambda x: 1.0 / np.sqrt((1 - x) * (1 + x)),
            2: lambda x: x * ((1 - x) * (1 + x)) ** -1.5,
            3: lambda x: (1 + 2 * x * x) * ((1 - x) * (1 + x)) ** -2.5,
        }
    elif r == 2:
        table = {
            0: lambda x: x * np.arctanh(x) + 0.5 * np.log((1 - x) * (1 + x)),
            1: lambda x: np.arctanh(x),
            2: lambda x: 1.0 / ((1 - x) * (1 + x)),
            3: lambda x: 2 * x / ((1 - x) * (1 + x)) ** 2,
            4: lambda x: (2 + 6 * x * x) / ((1 - x) * (1 + x)) ** 3,
        }
    else:
        raise ValueError("phi_inv family exists for r in {1, 2}")

    def good(s, p):
        # phi^s f_r^(s) ~ (1 -+ x)^((r - s)/2) at the endpoints once s > r
        return s <= r or _power_ok((r - s) / 2.0, p)

    return FunctionSpec(
        f"phi_inv_r{r}", lambda x, order: table[order](x), max_order=max(table),
        smoothness_meta=SmoothnessMeta(singular_points=(-1.0, 1.0),
                                       in_Bpr_for=_pairs(range(max(table) + 1), good)),
    )


def _exp():
    return FunctionSpec("exp", lambda x, order: np.exp(x), max_order=12,
                        smoothness_meta=SmoothnessMeta(alpha=math.inf,
                                                       in_Bpr_for=_pairs(range(13), lambda r, p: True)))


def _truncated_power(knot, k):
    def deriv(x, order):
        if order == k:
            out = np.where(x > knot, float(math.factorial(k)), 0.0)
            return np.where(x == knot, 0.5 * math.factorial(k), out)
        return float(math.perm(k, order)) * np.where(x > knot, x - knot, 0.0) ** (k - order)

    return FunctionSpec(
        f"tpow_{knot:g}_{k}", deriv, max_order=k,
        smoothness_meta=SmoothnessMeta(alpha=float(k), singular_points=(knot,),
                                       in_Bpr_for=_pairs(range(k + 1), lambda r, p: True)),
        defined_at_singular=lambda order: order < k,
    )


@lru_cache(maxsize=None)
def _catalog_tuple():
    members = [_monomial(m) for m in range(0, 7)]
    members += [_abs_power(a) for a in (0.5, 1.0, 1.5, 2.5)]
    members += [_one_minus_power(b) for b in (0.75, 1.5)]
    members += [_phi_inverse_family(r) for r in (1, 2)]
    members.append(_exp())
    members += [_truncated_power(0.3, k) for k in (1, 2, 3)]
    return tuple(members)


def catalog() -> list:
    return list(_catalog_tuple())


def get(name: str) -> FunctionSpec:
    for f in _catalog_tuple():
        if f.name == name:
            return f
    raise CatalogError(f"unknown function {name!r}")


def names() -> list:
    return [f.name for f in _catalog_tuple()]
