"""Diagnostics for the B_p^r membership machinery.

probe_membership watches truncated weighted norms ||phi^gamma f^(r)|| on
[-1 + eps, 1 - eps] as eps shrinks. vanishing_limit_probe tabulates the
modulus at t = 2^-j and, for p = inf, compares its decay with the endpoint
behaviour of phi^r f^(r).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .funcspace import FunctionSpec
from .geometry import _phi_unchecked
from .moduli import ModulusQuery, omega
from .quadrature import QuadratureError, build_hgrid, lp_norm

STABLE_INCREMENT = 1e-4
DECAY_RATIO = 1e-3
DECAY_SLOPE = 0.25
ENDPOINT_RATIO = 1e-3
ENDPOINT_EXPONENT = 0.1
DEFAULT_EPS = tuple(2.0 ** -j for j in range(3, 17))


@dataclass
class MembershipProbe:
    f: FunctionSpec
    r: int
    p: float
    gamma: float
    norm_estimates: list = field(default_factory=list)
    stabilizes: bool = False
    note: str = ""


def _truncated_norm(f, r, p, gamma, eps):
    def g(x):
        return _phi_unchecked(x) ** gamma * f.eval(x, r)

    brk = tuple(c for c in f.singular_points if -1 + eps < c < 1 - eps)
    return lp_norm(g, p, (-1.0 + eps, 1.0 - eps), breakpoints=brk)


def probe_membership(f: FunctionSpec, r: int, p, gamma: float, eps_list=DEFAULT_EPS) -> MembershipProbe:
    if f.max_order < r:
        raise ValueError(f"{f.name}: max_order {f.max_order} < r={r}")
    if gamma < 0:
        raise ValueError("gamma must be nonnegative")
    p = float(p)
    eps_sorted = sorted((float(e) for e in eps_list), reverse=True)
    est = []
    running = 0.0
    for eps in eps_sorted:
        v = _truncated_norm(f, r, p, gamma, eps)
        # nested intervals: the exact norms are monotone, so is the estimate
        running = max(running, v)
        est.append((eps, running))
    vals = [v for _, v in est]
    stable = False
    if len(vals) >= 4 and math.isfinite(vals[-1]):
        tail = vals[-4:]
        incs = [(b - a) / b if b > 0 else 0.0 for a, b in zip(tail[:-1], tail[1:])]
        stable = all(i < STABLE_INCREMENT for i in incs)
    note = f"stable if relative increment < {STABLE_INCREMENT:g} over the last three eps"
    return MembershipProbe(f, r, p, gamma, est, stable, note)


@dataclass
class VanishingProbe:
    rows: list
    decays: bool
    ratio: float
    slope: float
    endpoint_limit_zero: bool = None
    endpoint_ratio: float = None
    agreement: bool = None
    note: str = ""


def _decay_slope(ts, ws, tail=6):
    t = np.log(np.asarray(ts[-tail:]))
    w = np.asarray(ws[-tail:])
    if np.any(w <= 0):
        return math.inf
    return float(np.polyfit(t, np.log(w), 1)[0])


def endpoint_behaviour(f: FunctionSpec, r: int):
    """(tends to zero, ratio) for |phi^r f^(r)| at +-(1 - 2^-40) against eps = 2^-4."""
    def mag(eps):
        x = np.array([-1.0 + eps, 1.0 - eps])
        with np.errstate(all="ignore"):
            v = np.abs(_phi_unchecked(x) ** r * f.eval(x, r))
        return v

    near, mid, ref = mag(2.0 ** -40), mag(2.0 ** -20), mag(2.0 ** -4)
    if not np.all(np.isfinite(near)):
        return False, math.inf
    if r == 0:
        # continuity up to the endpoints is what matters when no weight is present
        return True, 0.0
    scale = np.where(ref > 0, ref, 1.0)
    ratio = float(np.max(near / scale))
    # a slow power law (1 -+ x)^s, s > 0, still tends to zero
    with np.errstate(divide="ignore"):
        expo = np.log(np.where(near > 0, near, 1e-300) / np.where(mid > 0, mid, 1e-300)) / math.log(2.0 ** -20)
    falling = bool(np.all((expo >= ENDPOINT_EXPONENT) | (near == 0)))
    return ratio < ENDPOINT_RATIO or falling, ratio


def interior_continuous(f: FunctionSpec, r: int) -> bool:
    """Whether f^(r) looks continuous at every interior singular point.

    One-sided values at distances 2^-20, 2^-30, 2^-40 must settle and the two
    sides must meet.
    """
    for c in f.singular_points:
        if not -1 < c < 1:
            continue
        side = {}
        for sgn in (-1.0, 1.0):
            with np.errstate(all="ignore"):
                v = f.eval(c + sgn * 2.0 ** -np.array([20.0, 30.0, 40.0]), r)
            if not np.all(np.isfinite(v)):
                return False
            d1, d2 = abs(v[1] - v[0]), abs(v[2] - v[1])
            if d2 > max(0.5 * d1, 1e-12):
                return False
            side[sgn] = (v[2], d2)
        jump = abs(side[1.0][0] - side[-1.0][0])
        if jump > max(1e-9, 4 * (side[1.0][1] + side[-1.0][1])):
            return False
    return True


def vanishing_limit_probe(f: FunctionSpec, k: int, r: int, p, js=range(1, 11)) -> VanishingProbe:
    p = float(p)
    rows = []
    for j in js:
        t = 2.0 ** -j
        try:
            w = omega(ModulusQuery(f, k, r, p, t)).value
        except QuadratureError:
            w = math.inf
        rows.append((t, w))
    ts, ws = [t for t, _ in rows], [w for _, w in rows]
    first, last = ws[0], ws[-1]
    if not all(math.isfinite(w) for w in ws):
        ratio, slope, decays = math.inf, 0.0, False
    elif first == 0:
        ratio, slope, decays = 0.0, math.inf, True
    else:
        ratio = last / first
        slope = _decay_slope(ts, ws)
        decays = ratio < DECAY_RATIO or slope >= DECAY_SLOPE
    note = f"decay if final/initial < {DECAY_RATIO:g} or tail log-log slope >= {DECAY_SLOPE:g}"
    out = VanishingProbe(rows, decays, ratio, slope, note=note)
    if math.isinf(p):
        zero, eratio = endpoint_behaviour(f, r)
        out.endpoint_limit_zero = zero
        out.endpoint_ratio = eratio
        out.note += f"; endpoint limit zero if ratio < {ENDPOINT_RATIO:g}"
        # the endpoint criterion says nothing when f^(r) breaks inside the interval
        if interior_continuous(f, r):
            out.agreement = zero == decays
        else:
            out.note += "; agreement not applicable, f^(r) discontinuous inside"
    return out
