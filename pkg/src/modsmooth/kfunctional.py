"""Upper bounds for the K-functional K_{k,r}(f^(r), t^k)_p.

    K = inf_g || (f^(r) - g^(r)) phi^r ||_p + t^k || g^(k+r) phi^(k+r) ||_p

The infimum is taken over polynomials g of bounded degree. We work with
h = g^(r) in the Chebyshev basis; any such h integrates to an admissible g.
Both objective terms of a candidate are stored separately, so reusing a
candidate at another t costs nothing.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from numpy.polynomial import chebyshev as C
from scipy import fft, optimize

from .bestapprox import PolyApprox
from .funcspace import FunctionSpec
from .geometry import _phi_unchecked
from .quadrature import DEFAULT_RULE, QuadratureRule, lp_norm, nodes_weights, sample_points

log = logging.getLogger(__name__)

DEFAULT_MAX_DEGREE = 32
SCALED_DEGREE_CAP = 192
INTERP_DEGREE_CAP = 2048
INTERP_FACTORS = (0.5, 1.0, 2.0)
_COND_LIMIT = 1e12
LP_METHOD_INF = "highs"
LP_SUP_SAMPLES = 512


@dataclass(frozen=True)
class Candidate:
    """h = g^(r) with its two unscaled objective terms."""

    h: np.ndarray = field(repr=False)
    approx: float
    deriv: float
    label: str = ""

    def objective(self, t, k) -> float:
        if self.deriv == 0.0:
            return self.approx
        return self.approx + t ** k * self.deriv


@dataclass
class KFuncResult:
    value: float
    term_approx: float
    term_deriv: float
    g: PolyApprox
    degree_used: int
    candidate: Optional[Candidate] = field(default=None, repr=False)
    note: str = ""


def _check(f, k, r, p, t, max_degree):
    if k < 1 or r < 0:
        raise ValueError("need k >= 1 and r >= 0")
    if f.max_order < r:
        raise ValueError(f"{f.name}: max_order {f.max_order} < r={r}")
    if max_degree < k + r:
        raise ValueError("max_degree must be at least k + r")
    if not float(p) >= 1:
        raise ValueError("p must be in [1, inf]")
    if not t > 0:
        raise ValueError("t must be positive")


def _terms(f, k, r, p, h, rule=DEFAULT_RULE):
    """(|| (f^(r) - h) phi^r ||_p, || h^(k) phi^(k+r) ||_p) by quadrature."""
    def resid(x):
        with np.errstate(invalid="ignore"):
            return _phi_unchecked(x) ** r * (f.eval(x, r) - C.chebval(x, h))

    a = lp_norm(resid, p, rule=rule, breakpoints=f.singular_points)
    dk = C.chebder(h, k) if h.size > k else np.zeros(1)
    if not np.any(dk):
        return a, 0.0
    b = lp_norm(lambda x: _phi_unchecked(x) ** (k + r) * C.chebval(x, dk), p, rule=rule)
    return a, b


def make_candidate(f, k, r, p, h, label="", rule=DEFAULT_RULE) -> Candidate:
    h = np.atleast_1d(np.asarray(h, dtype=float))
    a, b = _terms(f, k, r, p, h, rule)
    return Candidate(h, a, b, label)


def _design(f, k, r, deg, x):
    ph = _phi_unchecked(x)
    V = C.chebvander(x, deg)
    # k-th derivative of each basis polynomial T_j
    D = np.zeros((x.size, deg + 1))
    for j in range(k, deg + 1):
        e = np.zeros(j + 1)
        e[j] = 1.0
        D[:, j] = C.chebval(x, C.chebder(e, k))
    with np.errstate(invalid="ignore"):
        fr = f.eval(x, r)
    return (ph ** r)[:, None] * V, (ph ** (k + r))[:, None] * D, ph ** r * fr


def _seed_l2(f, k, r, t, deg):
    """Closed-form minimiser of the sum of squared L_2 terms."""
    x, w = nodes_weights(-1.0, 1.0, DEFAULT_RULE, f.singular_points)
    A, B, b = _design(f, k, r, deg, x)
    ok = np.isfinite(b)
    sw = np.sqrt(w[ok])
    A, B, b = A[ok] * sw[:, None], B[ok] * sw[:, None], b[ok] * sw
    M = np.vstack([A, t ** k * B])
    rhs = np.concatenate([b, np.zeros(B.shape[0])])
    scale = np.linalg.norm(M, axis=0)
    scale[scale == 0] = 1.0
    sol, _, rank, sv = np.linalg.lstsq(M / scale, rhs, rcond=None)
    if rank < M.shape[1] or sv[0] / sv[-1] > _COND_LIMIT:
        raise np.linalg.LinAlgError(f"ill-conditioned K-functional seed at degree {deg}")
    return sol / scale


def _lp_grid(f, p):
    if math.isinf(p):
        x = sample_points(-1.0, 1.0, LP_SUP_SAMPLES, f.singular_points)
        return x, np.ones_like(x)
    return nodes_weights(-1.0, 1.0, QuadratureRule(panels=64, nodes_per_panel=12), f.singular_points)


def _solve_lp(f, k, r, p, t, deg):
    """Discretised sum-of-norms problem for p in {1, inf}, solved through its dual.

    Primal (p = 1): min sum w|A c - b| + t^k sum w|B c|. The dual
    max b.y subject to A'y + B'z = 0 with box (p = 1) or l1-ball (p = inf)
    constraints on (y, z) has only deg + 1 equality rows; c is read off the
    equality multipliers.
    """
    x, w = _lp_grid(f, p)
    A, B, b = _design(f, k, r, deg, x)
    ok = np.isfinite(b)
    A, B, b, w = A[ok], B[ok], b[ok], w[ok]
    m, n = A.shape
    tk = t ** k
    if math.isinf(p):
        # primal: variables (c, s1, s2) with |A c - b| <= s1, |B c| <= s2
        one, zero = np.ones((m, 1)), np.zeros((m, 1))
        G = np.vstack([np.hstack([A, -one, zero]), np.hstack([-A, -one, zero]),
                       np.hstack([B, zero, -one]), np.hstack([-B, zero, -one])])
        rhs = np.concatenate([b, -b, np.zeros(2 * m)])
        cost = np.concatenate([np.zeros(n), [1.0, tk]])
        bounds = [(None, None)] * n + [(0, None)] * 2
        res = optimize.linprog(cost, A_ub=G, b_ub=rhs, bounds=bounds, method=LP_METHOD_INF)
        if res.status != 0:
            raise RuntimeError(f"K-functional LP failed: {res.message}")
        return res.x[:n]
    else:
        Aeq = np.hstack([A.T, B.T])
        cost = -np.concatenate([b, np.zeros(m)])
        bounds = np.concatenate([np.stack([-w, w], 1), np.stack([-tk * w, tk * w], 1)])
        res = optimize.linprog(cost, A_eq=Aeq, b_eq=np.zeros(n), bounds=bounds, method="highs")
    if res.status != 0:
        raise RuntimeError(f"K-functional LP failed: {res.message}")
    c = np.asarray(res.eqlin.marginals, dtype=float)

    def disc(cc):
        ra, rb = np.abs(A @ cc - b), np.abs(B @ cc)
        if math.isinf(p):
            return ra.max() + tk * rb.max()
        return w @ ra + tk * (w @ rb)

    return c if disc(c) <= disc(-c) else -c


def _truncation(f, r, deg):
    """Chebyshev interpolant of f^(r) (the g = f seed), when f^(r) is bounded."""
    n = deg + 1
    nodes = np.cos(np.pi * (np.arange(n) + 0.5) / n)
    vals = f.eval(nodes, r)
    if not np.all(np.isfinite(vals)):
        return None
    # interpolation at Chebyshev points of the first kind is a DCT-II
    coeffs = fft.dct(vals, type=2) / n
    coeffs[0] /= 2
    return coeffs


def interpolant_candidates(f, k, r, p, t) -> list:
    """Chebyshev interpolants of f^(r) at degrees near c/t, cheap even where the LP is not.

    Each is scored with a rule fine enough to resolve its oscillations.
    """
    out = []
    for c in INTERP_FACTORS:
        d = min(INTERP_DEGREE_CAP, max(k, math.ceil(c / t)))
        if d <= DEFAULT_MAX_DEGREE:
            continue
        h = _truncation(f, r, d)
        if h is None:
            break
        rule = QuadratureRule(panels=max(DEFAULT_RULE.panels, d // 2))
        out.append(make_candidate(f, k, r, p, h, f"interpolant deg {d}", rule=rule))
    return out


def _to_g(h, r, degree_used, p) -> PolyApprox:
    g = C.chebint(h, r) if r else np.asarray(h, dtype=float)
    return PolyApprox(np.asarray(g, dtype=float), max(degree_used + 1, 1), p, math.nan,
                      note="K-functional candidate")


def candidates_for(f, k, r, p, t, max_degree, lp_degree=None) -> list:
    """Every candidate the optimizer produces for one t; lp_degree caps the LP size."""
    p = float(p)
    deg = max_degree - r
    cands = [make_candidate(f, k, r, p, np.zeros(1), "zero")]
    if f.degree is not None and f.degree <= max_degree:
        mono = np.zeros(f.degree + 1)
        mono[-1] = 1.0
        exact = C.poly2cheb(np.polynomial.polynomial.polyder(mono, r)) if f.degree >= r else np.zeros(1)
        cands.append(make_candidate(f, k, r, p, exact, "exact"))
    trunc = _truncation(f, r, deg)
    if trunc is not None:
        cands.append(make_candidate(f, k, r, p, trunc, "truncation"))
    d = deg
    seed = None
    while d >= k:
        try:
            seed = _seed_l2(f, k, r, t, d)
            break
        except np.linalg.LinAlgError as exc:
            log.info("%s; retrying with degree %d", exc, d - 1)
            d -= 1
    if seed is not None:
        cands.append(make_candidate(f, k, r, p, seed, f"l2-seed deg {d}"))
    if (math.isinf(p) or p == 1.0) and d >= k:
        try:
            dl = d if lp_degree is None else min(d, lp_degree - r)
            cands.append(make_candidate(f, k, r, p, _solve_lp(f, k, r, p, t, dl), f"lp deg {dl}"))
        except RuntimeError as exc:
            log.warning("%s", exc)
    return cands


def _result(best: Candidate, k, r, p, t, max_degree) -> KFuncResult:
    value = best.objective(t, k)
    term_deriv = value - best.approx
    return KFuncResult(value, best.approx, term_deriv, _to_g(best.h, r, max_degree, p),
                       max_degree, best, best.label)


def k_functional_upper(f: FunctionSpec, k: int, r: int, p, t: float,
                       max_degree: int = DEFAULT_MAX_DEGREE, extra_candidates=()) -> KFuncResult:
    """Smallest objective among the polynomial candidates of degree <= max_degree."""
    _check(f, k, r, p, t, max_degree)
    pool = candidates_for(f, k, r, p, t, max_degree) + list(extra_candidates)
    best = min(pool, key=lambda c: c.objective(t, k))
    return _result(best, k, r, float(p), t, max_degree)


def scaled_degree(t: float, base: int = DEFAULT_MAX_DEGREE, cap: int = SCALED_DEGREE_CAP) -> int:
    """Degree able to resolve features of width t: about 1/t, never below base."""
    return max(base, min(cap, math.ceil(1.0 / t)))


def k_functional_curve(f: FunctionSpec, k: int, r: int, p, ts,
                       max_degree: int = DEFAULT_MAX_DEGREE, scale_with_t: bool = False) -> list:
    """K upper bounds on a t-grid, with every candidate shared across all t.

    With scale_with_t the least-squares seed at each t has degree
    scaled_degree(t, max_degree), the LP stays at max_degree, and interpolants of degree about 1/t join the pool, so small t are not stuck at
    the resolution of a fixed low degree.
    """
    ts = [float(t) for t in ts]
    degs = [scaled_degree(t, max_degree) if scale_with_t else max_degree for t in ts]
    for t, d in zip(ts, degs):
        _check(f, k, r, p, t, d)
    pool = []
    for t, d in zip(ts, degs):
        # the LPs (p = 1, inf) grow too costly at high degree, so only the seed scales
        pool.extend(candidates_for(f, k, r, p, t, d, lp_degree=max_degree))
        if scale_with_t:
            pool.extend(interpolant_candidates(f, k, r, float(p), t))
    out = []
    for t in ts:
        best = min(pool, key=lambda c: c.objective(t, k))
        out.append(_result(best, k, r, float(p), t, max(len(best.h) - 1 + r, max_degree)))
    return out


def k_scaling_check(f: FunctionSpec, k: int, r: int, p, t: float, lam: float,
                    max_degree: int = DEFAULT_MAX_DEGREE):
    """K(lam t) / (lam^k K(t)), or the string "both-zero" when both vanish."""
    if lam < 1:
        raise ValueError("lambda must be >= 1")
    if lam == 1:
        res = k_functional_upper(f, k, r, p, t, max_degree)
        if res.value == 0:
            return "both-zero"
        return 1.0
    small, big = k_functional_curve(f, k, r, p, [t, lam * t], max_degree)
    if small.value == 0:
        if big.value == 0:
            return "both-zero"
        raise ZeroDivisionError("K(t) = 0 but K(lambda t) > 0")
    return big.value / (lam ** k * small.value)
