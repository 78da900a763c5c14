"""Best polynomial approximation E_n(f)_p by polynomials of degree < n.

p = inf uses a multi-point Remez exchange, p = 2 an orthogonal projection,
p = 1 a linear program on a fixed graded grid and other p iteratively
reweighted least squares on the same grid. Polynomials are kept in the
Chebyshev basis.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from numpy.polynomial import chebyshev as C
from numpy.polynomial import legendre as L
from scipy import optimize

from .funcspace import FunctionSpec
from .geometry import _phi_unchecked
from .quadrature import DEFAULT_RULE, QuadratureRule, lp_norm, nodes_weights

log = logging.getLogger(__name__)

LP_GRID_RULE = QuadratureRule(panels=128, nodes_per_panel=16)
REMEZ_TOL = 1e-10
REMEZ_MAXITER = 100


class RemezError(RuntimeError):
    def __init__(self, message, last):
        super().__init__(message)
        self.last = last


@dataclass
class PolyApprox:
    coeffs: np.ndarray
    n: int
    p: float
    error: float
    certificate: Optional[list] = None
    converged: bool = True
    iterations: int = 0
    note: str = field(default="", repr=False)

    def __call__(self, x):
        return C.chebval(np.asarray(x, dtype=float), self.coeffs)

    def deriv(self, nu: int) -> np.ndarray:
        return C.chebder(self.coeffs, nu) if nu else np.asarray(self.coeffs, dtype=float)

    @property
    def degree(self) -> int:
        nz = np.flatnonzero(np.asarray(self.coeffs) != 0)
        return int(nz[-1]) if nz.size else 0


def _target(f):
    return lambda x: f.eval(x, 0)


def _check_bounded(f):
    ends = f.eval(np.array([-1.0, 1.0]), 0)
    if not np.all(np.isfinite(ends)):
        raise ValueError(f"{f.name} is unbounded at +-1; no uniform approximation")


# ------------------------------------------------------------------ Remez

def _search_grid(f, n):
    m = max(2000, 60 * n)
    theta = np.pi * np.arange(m + 1) / m
    pts = np.concatenate([-np.cos(theta), np.asarray(f.singular_points, dtype=float)])
    pts = pts[(pts >= -1.0) & (pts <= 1.0)]
    return np.unique(pts)


def _golden_vec(fun, a, b, iters=60):
    """Vectorised golden-section maximisation of fun on the intervals [a_i, b_i]."""
    g = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = a.copy(), b.copy()
    c = b - g * (b - a)
    d = a + g * (b - a)
    fc, fd = fun(c), fun(d)
    for _ in range(iters):
        left = fc >= fd
        b = np.where(left, d, b)
        a = np.where(left, a, c)
        nc = np.where(left, b - g * (b - a), d)
        nd = np.where(left, c, a + g * (b - a))
        fnew = fun(np.where(left, nc, nd))
        fc, fd = np.where(left, fnew, fd), np.where(left, fc, fnew)
        c, d = nc, nd
    x = np.where(fc >= fd, c, d)
    return x


def _alternating_extrema(resid, grid):
    """One extremum of |resid| per run of constant sign, refined locally."""
    r = resid(grid)
    sgn = np.sign(r)
    keep = sgn != 0
    xs, rs, ss = grid[keep], r[keep], sgn[keep]
    if xs.size == 0:
        return np.array([]), np.array([])
    run_id = np.concatenate([[0], np.cumsum(ss[1:] != ss[:-1])])
    nruns = run_id[-1] + 1
    idx = np.empty(nruns, dtype=int)
    for j in range(nruns):
        members = np.flatnonzero(run_id == j)
        idx[j] = members[np.argmax(np.abs(rs[members]))]
    lo = np.array([xs[max(i - 1, 0)] if run_id[max(i - 1, 0)] == run_id[i] else xs[i] for i in idx])
    hi = np.array([xs[min(i + 1, xs.size - 1)] if run_id[min(i + 1, xs.size - 1)] == run_id[i] else xs[i]
                   for i in idx])
    sign = ss[idx]
    fun = lambda z: sign * resid(z)  # noqa: E731
    xr = _golden_vec(fun, lo, hi)
    better = fun(xr) > sign * rs[idx]
    x_ext = np.where(better, xr, xs[idx])
    return x_ext, resid(x_ext)


def _select_reference(x, r, size):
    """Trim an alternating sequence to `size` consecutive points keeping the global max."""
    x, r = list(x), list(r)
    gmax = int(np.argmax(np.abs(r)))
    while len(x) > size:
        drop_first = abs(r[0]) < abs(r[-1])
        if drop_first and gmax == 0:
            drop_first = False
        elif not drop_first and gmax == len(x) - 1:
            drop_first = True
        if drop_first:
            x.pop(0)
            r.pop(0)
            gmax -= 1
        else:
            x.pop()
            r.pop()
    return np.array(x), np.array(r)


def _single_exchange(ref, resid, grid, rg):
    """Swap the global maximiser of |resid| into the reference, keeping alternation."""
    xs = grid[int(np.argmax(np.abs(rg)))]
    rs = np.sign(resid(np.array([xs]))[0])
    ref = np.array(ref, dtype=float)
    rr = np.sign(resid(ref))
    j = int(np.searchsorted(ref, xs))
    if j < ref.size and ref[j] == xs:
        return ref, resid(ref)
    if j == 0:
        if rr[0] == rs:
            ref[0] = xs
        else:
            ref = np.concatenate([[xs], ref[:-1]])
    elif j == ref.size:
        if rr[-1] == rs:
            ref[-1] = xs
        else:
            ref = np.concatenate([ref[1:], [xs]])
    elif rr[j - 1] == rs:
        ref[j - 1] = xs
    else:
        ref[j] = xs
    return ref, resid(ref)


def remez(f: FunctionSpec, n: int, tol=REMEZ_TOL, maxiter=REMEZ_MAXITER) -> PolyApprox:
    _check_bounded(f)
    target = _target(f)
    grid = _search_grid(f, n)
    fgrid = target(grid)
    scale = max(float(np.max(np.abs(fgrid))), 1e-300)
    ref = -np.cos(np.pi * np.arange(n + 1) / n) if n > 0 else np.array([0.0])
    signs = (-1.0) ** np.arange(n + 1)
    coeffs = np.zeros(n)
    err = math.inf
    last_err = math.inf
    for it in range(1, maxiter + 1):
        A = np.hstack([C.chebvander(ref, n - 1), signs[:, None]])
        sol = np.linalg.solve(A, target(ref))
        coeffs, level = sol[:n], abs(sol[n])
        resid = lambda z, c=coeffs: target(z) - C.chebval(z, c)  # noqa: E731
        rg = resid(grid)
        err = float(np.max(np.abs(rg)))
        if it == 1 and level < 1e-6 * err and n > 1:
            # symmetric reference met a symmetric f: break the tie and restart
            ref = np.sort(np.clip(ref + 0.25 * (1 - ref ** 2) / n, -1.0, 1.0))
            continue
        if err <= 1e-14 * scale:
            return PolyApprox(coeffs, n, math.inf, err, None, True, it, "machine-precision")
        xe, re = _alternating_extrema(resid, grid)
        if xe.size:
            err = max(err, float(np.max(np.abs(re))))
        if xe.size < n + 1:
            ref, rref = _single_exchange(ref, resid, grid, rg)
            signs = np.sign(rref)
            signs[signs == 0] = 1.0
            last_err = err
            continue
        ref, rref = _select_reference(xe, re, n + 1)
        spread = (err - float(np.min(np.abs(rref)))) / err
        if spread < tol or abs(last_err - err) <= tol * err * 1e-2:
            cert = [(float(a), float(b)) for a, b in zip(ref, rref)]
            return PolyApprox(coeffs, n, math.inf, err, cert, True, it)
        last_err = err
        signs = np.sign(rref)
    last = PolyApprox(coeffs, n, math.inf, err, None, False, maxiter, "not converged")
    raise RemezError(f"Remez did not converge for {f.name}, n={n}", last)


# ------------------------------------------------------------------ other p

def _l2_projection(f, n, rule=DEFAULT_RULE):
    x, w = nodes_weights(-1.0, 1.0, rule, f.singular_points)
    fx = f.eval(x, 0)
    V = L.legvander(x, n - 1)
    leg = (V * (w * fx)[:, None]).sum(axis=0) * (2 * np.arange(n) + 1) / 2.0
    return np.polynomial.Legendre(leg).convert(kind=np.polynomial.Chebyshev).coef


def _lp_grid(f):
    x, w = nodes_weights(-1.0, 1.0, LP_GRID_RULE, f.singular_points)
    return x, w, f.eval(x, 0)


def _l1_lp(f, n):
    """min sum_i w_i |f_i - (V c)_i| through the dual LP.

    max f.y subject to V'y = 0, |y_i| <= w_i; the equality multipliers are c.
    """
    x, w, fx = _lp_grid(f)
    V = C.chebvander(x, n - 1)
    res = optimize.linprog(-fx, A_eq=V.T, b_eq=np.zeros(n), bounds=np.stack([-w, w], 1),
                           method="highs")
    if res.status != 0:
        raise RuntimeError(f"L1 linear program failed: {res.message}")
    c = np.asarray(res.eqlin.marginals, dtype=float)
    errs = [float(np.dot(w, np.abs(fx - V @ cc))) for cc in (c, -c)]
    i = int(np.argmin(errs))
    return (c, -c)[i], errs[i]


def _irls(f, n, p, iters=50):
    x, w, fx = _lp_grid(f)
    V = C.chebvander(x, n - 1)
    c = np.linalg.lstsq(V * np.sqrt(w)[:, None], fx * np.sqrt(w), rcond=None)[0]
    eps = 1e-12 * max(1.0, float(np.max(np.abs(fx))))
    for _ in range(iters):
        res = np.abs(fx - V @ c)
        wt = w * np.maximum(res, eps) ** (p - 2.0)
        sw = np.sqrt(wt)
        c = np.linalg.lstsq(V * sw[:, None], fx * sw, rcond=None)[0]
    err = float(np.dot(w, np.abs(fx - V @ c) ** p) ** (1.0 / p))
    return c, err


def best_approx(f: FunctionSpec, n: int, p) -> PolyApprox:
    """Best approximation of f by polynomials of degree < n in L_p[-1, 1]."""
    if n < 1:
        raise ValueError("n must be >= 1")
    p = float(p)
    if f.degree is not None and f.degree < n:
        coeffs = np.zeros(n)
        coeffs[: f.degree + 1] = C.poly2cheb([float(j == f.degree) for j in range(f.degree + 1)])
        cert = None
        return PolyApprox(coeffs, n, p, 0.0, cert, True, 0, "exact")
    if math.isinf(p):
        return remez(f, n)
    if p == 2.0:
        coeffs = _l2_projection(f, n)
        resid = lambda z: f.eval(z, 0) - C.chebval(z, coeffs)  # noqa: E731
        return PolyApprox(coeffs, n, p, lp_norm(resid, 2.0, breakpoints=f.singular_points))
    if p == 1.0:
        coeffs, _ = _l1_lp(f, n)
        coeffs = _l1_newton(f, coeffs)
        return PolyApprox(coeffs, n, p, _residual_norm(f, coeffs, p),
                          note="L1 minimiser on a 2048-point graded grid")
    coeffs, _ = _irls(f, n, p)
    return PolyApprox(coeffs, n, p, _residual_norm(f, coeffs, p), note="IRLS on 2048-point graded grid")


def _sign_changes(g, a=-1.0, b=1.0, m=4096):
    x = np.unique(np.concatenate([-np.cos(np.pi * np.arange(m + 1) / m)]))
    y = g(x)
    out = []
    for i in np.flatnonzero(np.sign(y[:-1]) * np.sign(y[1:]) < 0):
        try:
            out.append(optimize.brentq(lambda z: float(g(np.array([z]))[0]), x[i], x[i + 1], xtol=1e-15))
        except ValueError:
            pass
    return out


def _l1_newton(f, coeffs, iters=8):
    """Newton polish of the continuous L1 objective, started from the grid solution.

    With r = f - P having simple zeros z_m, the gradient in c_j is
    -int sign(r) T_j (exact between zeros) and the Hessian is
    sum_m 2 T_i(z_m) T_j(z_m) / |r'(z_m)|.
    """
    n = coeffs.size
    anti = [C.chebint(np.eye(n)[j]) for j in range(n)]
    best_c, best_v = coeffs, _residual_norm(f, coeffs, 1.0)
    for _ in range(iters):
        resid = lambda z, c=best_c: f.eval(z, 0) - C.chebval(z, c)  # noqa: E731
        zeros = np.array(_sign_changes(resid))
        if zeros.size < n:
            break
        edges = np.concatenate([[-1.0], zeros, [1.0]])
        mids = 0.5 * (edges[:-1] + edges[1:])
        sgn = np.sign(resid(mids))
        grad = np.array([-np.dot(sgn, C.chebval(edges[1:], a) - C.chebval(edges[:-1], a)) for a in anti])
        if f.max_order >= 1:
            slope = f.eval(zeros, 1) - C.chebval(zeros, C.chebder(best_c))
        else:
            slope = (resid(zeros + 1e-7) - resid(zeros - 1e-7)) / 2e-7
        T = C.chebvander(zeros, n - 1)
        H = 2.0 * (T / np.abs(slope)[:, None]).T @ T
        step = np.linalg.lstsq(H, -grad, rcond=None)[0]
        improved = False
        for lam in (1.0, 0.5, 0.25, 0.125):
            cand = best_c + lam * step
            v = _residual_norm(f, cand, 1.0)
            if v < best_v:
                best_c, best_v, improved = cand, v, True
                break
        if not improved or np.max(np.abs(step)) < 1e-15:
            break
    return best_c


def _residual_norm(f, coeffs, p):
    """||f - P||_p with the residual's zeros used as quadrature breakpoints."""
    resid = lambda z: f.eval(z, 0) - C.chebval(z, coeffs)  # noqa: E731
    brk = tuple(sorted(set(f.singular_points) | set(_sign_changes(resid))))
    return lp_norm(resid, p, breakpoints=brk)


def approximants(f: FunctionSpec, n_max: int, p):
    """Best approximants for n = 1..n_max; an earlier one is carried forward if it is better."""
    if n_max > 128:
        raise ValueError("n_max must not exceed 128")
    out = []
    best = None
    for n in range(1, n_max + 1):
        approx = best_approx(f, n, p)
        if best is not None and best.error < approx.error:
            approx = PolyApprox(np.pad(best.coeffs, (0, 1)), n, best.p, best.error, None,
                                best.converged, 0, "carried from n-1")
        best = approx
        out.append(approx)
    return out


def en_sequence(f: FunctionSpec, n_max: int, p):
    """[(n, E_n)] for n = 1..n_max."""
    return [(a.n, a.error) for a in approximants(f, n_max, p)]


# ------------------------------------------------------------------ derivative estimates

def weighted_derivative_norm(coeffs, nu, p, rule=DEFAULT_RULE):
    """|| phi^nu P^(nu) ||_p for P given by Chebyshev coefficients."""
    d = C.chebder(coeffs, nu) if nu else np.asarray(coeffs, dtype=float)
    return lp_norm(lambda x: _phi_unchecked(x) ** nu * C.chebval(x, d), p, rule=rule)


def potapov_ratio(P: PolyApprox, nu: int, p) -> float:
    """|| phi^nu P^(nu) ||_p / (deg^nu || P ||_p), deg the degree of P (at least 1)."""
    if not 1 <= nu <= 4:
        raise ValueError("nu must be in 1..4")
    norm_p = lp_norm(P, p)
    if norm_p == 0:
        raise ZeroDivisionError("||P||_p = 0")
    deg = P.degree
    if deg < nu:
        return 0.0
    return weighted_derivative_norm(P.coeffs, nu, p) / (deg ** nu * norm_p)


def derivative_error(f: FunctionSpec, r: int, n: int, p, approx: Optional[PolyApprox] = None) -> float:
    """|| (f^(r) - P_n^(r)) phi^r ||_p with P_n the best L_p approximant of degree < n."""
    if f.max_order < r:
        raise ValueError(f"{f.name}: no derivative of order {r}")
    P = approx if approx is not None else best_approx(f, n, p)
    d = P.deriv(r)

    def g(x):
        with np.errstate(invalid="ignore"):
            return _phi_unchecked(x) ** r * (f.eval(x, r) - C.chebval(x, d))

    return lp_norm(g, p, breakpoints=f.singular_points)


def chebyshev_T(n: int) -> PolyApprox:
    c = np.zeros(n + 1)
    c[n] = 1.0
    return PolyApprox(c, n + 1, math.inf, 0.0, note=f"T_{n}")
