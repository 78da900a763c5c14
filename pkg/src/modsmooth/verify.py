"""Numerical checks of the approximation-theory inequalities.

Each check assembles moduli, K-functional bounds and best-approximation
errors into rows (params, lhs, rhs, ratio), fits the smallest constant C
with lhs <= C * rhs, and compares C with a fixed cap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import bestapprox as ba
from . import kfunctional as kf
from . import moduli as md
from . import smoothcheck as sc
from .funcspace import FunctionSpec, get

DEGENERATE = 1e-12
TAIL_MARGIN = 0.1

CAPS = {
    "equivalence": 100.0,
    "scaling": 10.0,
    "hierarchy": 20.0,
    "jackson": 50.0,
    "derivative": 50.0,
    "inverse": 100.0,
    "characterization": 0.15,
}

MATRIX_FUNCTIONS = ("exp", "abs_x_1.5", "abs_x_2.5", "one_minus_x_1.5", "tpow_0.3_2", "x^4", "phi_inv_r1")
MATRIX_K = (1, 2, 3)
MATRIX_R = (0, 1)
MATRIX_P = (1.0, 2.0, math.inf)
HIERARCHY_FUNCTIONS = ("exp", "x^4", "x^5")
JACKSON_N = (1, 2, 3, 4, 5, 6, 8, 12, 16, 24, 32, 48, 64)


def t_grid(k, count=8):
    return [(2.0 / k) * 2.0 ** -j for j in range(count)]


@dataclass
class VerificationReport:
    theorem_id: str
    rows: list = field(default_factory=list)
    fitted_constant: float = 0.0
    cap: float = math.inf
    verdict: str = "pass"
    tolerance_note: str = ""

    @property
    def passed(self) -> bool:
        return self.verdict in ("pass", "degenerate-pass", "hypothesis-violated", "skipped")


def fit_constant(rows) -> float:
    """max lhs/rhs over the rows, skipping rows where both sides are below 1e-12.

    Rows are (lhs, rhs) pairs or (params, lhs, rhs, ...) tuples.
    """
    best = 0.0
    for row in rows:
        lhs, rhs = (row[0], row[1]) if len(row) == 2 else (row[1], row[2])
        if abs(lhs) < DEGENERATE and abs(rhs) < DEGENERATE:
            continue
        best = max(best, math.inf if rhs == 0 else lhs / rhs)
    return best


def _finish(rep: VerificationReport, extra_fail=False) -> VerificationReport:
    live = [r for r in rep.rows if not (abs(r[1]) < DEGENERATE and abs(r[2]) < DEGENERATE)]
    if not live:
        rep.fitted_constant = 0.0
        rep.verdict = "degenerate-pass"
        return rep
    rep.fitted_constant = fit_constant(rep.rows)
    finite = all(math.isfinite(r[3]) for r in live)
    ok = finite and rep.fitted_constant <= rep.cap and not extra_fail
    rep.verdict = "pass" if ok else "fail"
    return rep


def _row(params, lhs, rhs):
    if abs(lhs) < DEGENERATE and abs(rhs) < DEGENERATE:
        ratio = 0.0
    else:
        ratio = math.inf if rhs == 0 else lhs / rhs
    return (params, float(lhs), float(rhs), float(ratio))


def _fn(f) -> FunctionSpec:
    return get(f) if isinstance(f, str) else f


# ------------------------------------------------------------------ memo

class Memo:
    """In-process cache of moduli and best approximations."""

    def __init__(self):
        self.omega = {}
        self.star = {}
        self.approx = {}

    def omega_value(self, f, k, r, p, t, kind="omega"):
        t = min(float(t), 2.0 / k) if kind in ("omega", "omega_star") else float(t)
        key = (f.name, k, r, float(p), t, kind)
        if key not in self.omega:
            self.omega[key] = md.compute(kind, md.ModulusQuery(f, k, r, p, t)).value
        return self.omega[key]

    def star_pair(self, f, k, r, p, t):
        """(omega_star, largest step norm met while averaging)."""
        t = float(t)
        key = (f.name, k, r, float(p), t)
        if key not in self.star:
            res = md.omega_star(md.ModulusQuery(f, k, r, p, t))
            self.star[key] = (res.value, res.terms[0] if res.terms else res.value)
        return self.star[key]

    def best(self, f, n, p) -> ba.PolyApprox:
        key = (f.name, n, float(p))
        if key not in self.approx:
            self.approx[key] = ba.best_approx(f, n, p)
        return self.approx[key]

    def en(self, f, n, p):
        return self.best(f, n, p).error


MEMO = Memo()


# ------------------------------------------------------------------ envelopes

@dataclass
class DecayEnvelope:
    """Nondecreasing step function u -> phi(u) with phi(0+) = 0."""

    phi_vals: dict
    source: str = "measured_En"

    @classmethod
    def from_en(cls, en):
        """phi(u) = E_n on [1/(n+1), 1/n), made nondecreasing in u."""
        vals = {}
        running = 0.0
        for n, e in sorted(en, reverse=True):
            running = max(running, e)
            vals[1.0 / n] = running
        return cls(vals, "measured_En")

    def __call__(self, u):
        keys = sorted(self.phi_vals)
        below = [x for x in keys if x <= u]
        return self.phi_vals[below[-1]] if below else 0.0

    def is_nondecreasing(self) -> bool:
        v = [self.phi_vals[x] for x in sorted(self.phi_vals)]
        return all(a <= b for a, b in zip(v[:-1], v[1:]))

    def vanishes(self, tol=DEGENERATE) -> bool:
        return self.phi_vals[min(self.phi_vals)] <= max(tol, 1e-3 * max(self.phi_vals.values()))


# ------------------------------------------------------------------ checks

def check_equivalence(f, k, r, p, tgrid=None, max_degree=kf.DEFAULT_MAX_DEGREE, memo=MEMO):
    f = _fn(f)
    tgrid = list(tgrid) if tgrid is not None else t_grid(k)
    if any(not 0 < t <= 2.0 / k for t in tgrid):
        raise ValueError("t_grid must lie in (0, 2/k]")
    rep = VerificationReport("equivalence", cap=CAPS["equivalence"],
                             tolerance_note="omega <= C sqrt2 K, K <= C omega*; omega* <= omega to 1e-8 rel")
    ks = kf.k_functional_curve(f, k, r, p, tgrid, max_degree, scale_with_t=True)
    chain_ok = True
    for t, kres in zip(tgrid, ks):
        star, tau_max = memo.star_pair(f, k, r, p, t)
        w = max(memo.omega_value(f, k, r, p, t), tau_max)
        if star > w * (1 + 1e-8) + DEGENERATE:
            chain_ok = False
        base = {"f": f.name, "k": k, "r": r, "p": p, "t": t, "omega_star": star, "omega": w, "K": kres.value}
        rep.rows.append(_row(dict(base, relation="omega<=C*sqrt2*K"), w, math.sqrt(2.0) * kres.value))
        rep.rows.append(_row(dict(base, relation="K<=C*omega_star"), kres.value, star))
    if not chain_ok:
        rep.tolerance_note += "; omega* > omega detected"
    return _finish(rep, extra_fail=not chain_ok)


def check_scaling(f, k, r, p, tgrid=None, lambdas=(2.0, 4.0), memo=MEMO):
    f = _fn(f)
    tgrid = list(tgrid) if tgrid is not None else t_grid(k)
    rep = VerificationReport("scaling", cap=CAPS["scaling"], tolerance_note="omega(lam t) <= C lam^k omega(t)")
    for t in tgrid:
        base = memo.omega_value(f, k, r, p, t)
        for lam in lambdas:
            rep.rows.append(_row({"f": f.name, "k": k, "r": r, "p": p, "t": t, "lambda": lam},
                                 memo.omega_value(f, k, r, p, lam * t), lam ** k * base))
    return _finish(rep)


def check_hierarchy(f, k, r, p, tgrid=None, memo=MEMO):
    """omega_{k,r} <= C t omega_{k-1,r+1}(f^(r+1)) and omega_{k,r} <= C omega_{k-1,r}."""
    f = _fn(f)
    if k < 2:
        raise ValueError("hierarchy needs k >= 2")
    if f.max_order < r + 1:
        raise ValueError(f"{f.name}: needs a derivative of order {r + 1}")
    tgrid = list(tgrid) if tgrid is not None else t_grid(k)
    rep = VerificationReport("hierarchy", cap=CAPS["hierarchy"],
                             tolerance_note="two families, cap applies to each")
    use_up = f.in_Bpr(r + 1, p)
    for t in tgrid:
        w = memo.omega_value(f, k, r, p, t)
        params = {"f": f.name, "k": k, "r": r, "p": p, "t": t}
        if use_up:
            rep.rows.append(_row(dict(params, family="t*omega_{k-1,r+1}"), w,
                                 t * memo.omega_value(f, k - 1, r + 1, p, t)))
        rep.rows.append(_row(dict(params, family="omega_{k-1,r}"), w, memo.omega_value(f, k - 1, r, p, t)))
    if not use_up:
        rep.tolerance_note += f"; first family skipped ({f.name} not in B_p^{r + 1})"
    return _finish(rep)


def _n_values(lo, n_max, n_set=None):
    src = n_set if n_set is not None else JACKSON_N
    return [n for n in src if lo <= n <= n_max]


def check_jackson(f, k, r, p, n_max=64, n_set=None, memo=MEMO):
    f = _fn(f)
    rep = VerificationReport("jackson", cap=CAPS["jackson"], tolerance_note="n^r E_n <= C omega(1/n), n >= k+r")
    for n in _n_values(k + r, n_max, n_set):
        rep.rows.append(_row({"f": f.name, "k": k, "r": r, "p": p, "n": n},
                             n ** r * memo.en(f, n, p), memo.omega_value(f, k, r, p, 1.0 / n)))
    return _finish(rep)


def _log_integral(fun, lo, hi, nodes=16):
    """int_lo^hi fun(tau)/tau dtau with tau = e^s and Gauss nodes in s."""
    if hi <= lo:
        return 0.0
    x, w = np.polynomial.legendre.leggauss(nodes)
    a, b = math.log(lo), math.log(hi)
    s = 0.5 * (a + b) + 0.5 * (b - a) * x
    return float(0.5 * (b - a) * sum(wi * fun(math.exp(si)) for si, wi in zip(s, w)))


def check_derivative_error(f, k, r, n_set=(4, 8, 16, 32), p=math.inf, floor=1e-5, memo=MEMO):
    """|| (f^(r) - P_n^(r)) phi^r ||_p against int_0^{1/n} omega(tau)/tau dtau.

    The integral is taken over [floor, 1/n]; dropping [0, floor] only
    shrinks the right side.
    """
    f = _fn(f)
    rep = VerificationReport("derivative", cap=CAPS["derivative"],
                             tolerance_note=f"rhs integral over [{floor:g}, 1/n], tail omitted")
    for n in n_set:
        if n < k + r:
            continue
        P = memo.best(f, n, p)
        lhs = ba.derivative_error(f, r, n, p, approx=P)
        rhs = _log_integral(lambda tau: memo.omega_value(f, k, r, p, tau), floor, 1.0 / n)
        rep.rows.append(_row({"f": f.name, "k": k, "r": r, "p": p, "n": n}, lhs, rhs))
    return _finish(rep)


def _tail_sum(en, r, n_from):
    """sum_{n > n_from} r n^(r-1) E_n using measured values and a power-law tail.

    Returns (sum, convergent).
    """
    if r == 0:
        return 0.0, True
    ns = np.array([n for n, _ in en], dtype=float)
    es = np.array([e for _, e in en])
    total = float(sum(r * n ** (r - 1) * e for n, e in en if n > n_from))
    tail = (ns >= ns.max() / 4) & (es > 0)
    if tail.sum() < 3:
        return total, True
    slope, icpt = np.polyfit(np.log(ns[tail]), np.log(es[tail]), 1)
    alpha = -slope
    # a measured exponent this close to r cannot be told apart from a divergent tail
    if alpha <= r + TAIL_MARGIN:
        return math.inf, False
    nm = ns.max()
    extra = r * math.exp(icpt) * nm ** (r - alpha) / (alpha - r)
    return total + float(extra), True


def inverse_rhs(en, k, r, t):
    """Unit-constant right side of the sum-form inverse estimate with N = k + r."""
    N = k + r
    E = dict(en)
    nt = max(1.0 / t, N)
    s1, ok = _tail_sum([(n, e) for n, e in en], r, max(N, 1.0 / t))
    s2 = t ** k * sum(n ** (k + r - 1) * e for n, e in en if N <= n <= nt)
    s3 = t ** k * E.get(k + r, 0.0)
    return s1 + s2 + s3, ok


def check_inverse(f, k, r, p, n_max=64, tgrid=None, memo=MEMO):
    f = _fn(f)
    tgrid = list(tgrid) if tgrid is not None else [0.5 * 2.0 ** -j for j in range(6)]
    if any(not 0 < t <= 0.5 for t in tgrid):
        raise ValueError("t_grid must lie in (0, 1/2]")
    if min(tgrid) < 1.0 / n_max:
        raise ValueError("1/t must not exceed n_max")
    rep = VerificationReport("inverse", cap=CAPS["inverse"],
                             tolerance_note="sum form with N = k + r; one constant for all three terms")
    en = [(n, memo.en(f, n, p)) for n in range(1, n_max + 1)]
    env = DecayEnvelope.from_en(en)
    if not env.is_nondecreasing():
        raise AssertionError("envelope not monotone")
    for t in tgrid:
        rhs, ok = inverse_rhs(en, k, r, t)
        if not ok:
            rep.verdict = "hypothesis-violated"
            rep.tolerance_note += "; sum r n^(r-1) E_n diverges"
            rep.rows = []
            return rep
        rep.rows.append(_row({"f": f.name, "k": k, "r": r, "p": p, "t": t},
                             memo.omega_value(f, k, r, p, t), rhs))
    return _finish(rep)


def loglog_slope(xs, ys, keep=0.6):
    """Least-squares slope of log y against log x over the middle `keep` of the log range."""
    x, y = np.log(np.asarray(xs, dtype=float)), np.log(np.asarray(ys, dtype=float))
    if keep < 1.0:
        lo, hi = x.min(), x.max()
        pad = 0.5 * (1 - keep) * (hi - lo)
        sel = (x >= lo + pad - 1e-12) & (x <= hi - pad + 1e-12)
        x, y = x[sel], y[sel]
    return float(np.polyfit(x, y, 1)[0])


def check_alpha_characterization(f, k, r, p, alpha, n_range=(8, 64), t_range=(1e-3, 1e-1),
                                 keep=0.6, points=13, memo=MEMO):
    """Slopes of E_n against n and of omega against t, compared with -alpha and alpha - r."""
    f = _fn(f)
    tol = CAPS["characterization"]
    rep = VerificationReport("characterization", cap=tol,
                             tolerance_note=f"slopes within +-{tol:g}; fit over middle {keep:.0%} of the range")
    ns = sorted(set(int(round(v)) for v in np.geomspace(n_range[0], n_range[1], points)))
    es = [memo.en(f, n, p) for n in ns]
    ts = list(np.geomspace(t_range[0], t_range[1], points))
    ws = [memo.omega_value(f, k, r, p, t) for t in ts]
    if max(es) < DEGENERATE:
        rep.verdict = "degenerate-pass"
        rep.tolerance_note += "; E_n vanishes"
        return rep
    s_e = loglog_slope(ns, es, keep)
    s_w = loglog_slope(ts, ws, keep)
    dev = max(abs(s_e + alpha), abs(s_w - (alpha - r)))
    rep.rows = [
        _row({"f": f.name, "quantity": "E_n slope", "expected": -alpha}, s_e, -alpha),
        _row({"f": f.name, "k": k, "r": r, "quantity": "omega slope", "expected": alpha - r}, s_w, alpha - r),
    ]
    rep.fitted_constant = dev
    rep.verdict = "pass" if dev <= tol else "fail"
    return rep


def check_membership(f, r, p, k=None, gamma=None):
    """Truncated-norm and vanishing-limit probes for one (f, r, p)."""
    f = _fn(f)
    k = k or 1
    gamma = float(r) if gamma is None else gamma
    rep = VerificationReport("membership", cap=0.0,
                             tolerance_note=f"{sc.STABLE_INCREMENT:g} increment; decay ratio {sc.DECAY_RATIO:g}"
                             f" or slope >= {sc.DECAY_SLOPE:g}")
    probe = sc.probe_membership(f, r, p, gamma)
    van = sc.vanishing_limit_probe(f, k, r, p)
    rep.rows.append(({"f": f.name, "r": r, "p": p, "gamma": gamma, "quantity": "truncated norm"},
                     probe.norm_estimates[-1][1], float(probe.stabilizes), 0.0))
    rep.rows.append(({"f": f.name, "k": k, "r": r, "p": p, "quantity": "omega final/initial"},
                     van.ratio, float(van.decays), van.slope))
    expect_member = f.in_Bpr(r, p)
    ok = probe.stabilizes == expect_member
    if math.isinf(p) and expect_member:
        ok = ok and van.agreement is not False
        agree = math.nan if van.agreement is None else float(van.agreement)
        rep.rows.append(({"f": f.name, "r": r, "quantity": "endpoint ratio"},
                         van.endpoint_ratio, float(van.endpoint_limit_zero), agree))
    elif expect_member:
        # for p < inf membership forces the modulus to vanish
        ok = ok and van.decays
    rep.verdict = "pass" if ok else "fail"
    return rep


# ------------------------------------------------------------------ suites

def matrix_cells(functions=MATRIX_FUNCTIONS, ks=MATRIX_K, rs=MATRIX_R, ps=MATRIX_P):
    for name in functions:
        f = get(name)
        for k in ks:
            for r in rs:
                for p in ps:
                    if f.max_order >= r and f.in_Bpr(r, p) and k + r <= md.MAX_K_PLUS_R:
                        yield f, k, r, p


SUITES = ("equivalence", "scaling", "hierarchy", "jackson", "derivative", "inverse", "characterization",
          "membership")


def suite_jobs(suite, functions=None):
    """List of (label, callable) for one suite; labels are stable identifiers."""
    fns = tuple(functions) if functions else None
    jobs = []

    def lab(name, f, **kw):
        extra = ",".join(f"{a}={b:g}" if isinstance(b, float) else f"{a}={b}" for a, b in kw.items())
        return f"{name}:{f}" + (f":{extra}" if extra else "")

    if suite in ("equivalence", "scaling", "jackson"):
        fn = {"equivalence": check_equivalence, "scaling": check_scaling, "jackson": check_jackson}[suite]
        for f, k, r, p in matrix_cells(fns or MATRIX_FUNCTIONS):
            jobs.append((lab(suite, f.name, k=k, r=r, p=p), lambda f=f, k=k, r=r, p=p, fn=fn: fn(f, k, r, p)))
    elif suite == "hierarchy":
        for f, k, r, p in matrix_cells(fns or HIERARCHY_FUNCTIONS, ks=(2, 3)):
            if f.max_order >= r + 1:
                jobs.append((lab(suite, f.name, k=k, r=r, p=p),
                             lambda f=f, k=k, r=r, p=p: check_hierarchy(f, k, r, p)))
    elif suite == "derivative":
        cases = [("exp", 2, 1), ("abs_x_2.5", 1, 1), ("abs_x_1.5", 2, 0), ("x^4", 2, 1)]
        for name, k, r in cases:
            if fns and name not in fns:
                continue
            for p in (2.0, math.inf):
                jobs.append((lab(suite, name, k=k, r=r, p=p),
                             lambda name=name, k=k, r=r, p=p: check_derivative_error(name, k, r, p=p)))
    elif suite == "inverse":
        cases = [("abs_x_1", 2, 0), ("abs_x_2.5", 2, 1), ("phi_inv_r1", 1, 1)]
        for name, k, r in cases:
            if fns and name not in fns:
                continue
            jobs.append((lab(suite, name, k=k, r=r, p=math.inf),
                         lambda name=name, k=k, r=r: check_inverse(name, k, r, math.inf)))
    elif suite == "characterization":
        cases = [("abs_x_1", 2, 0, 1.0), ("abs_x_1.5", 2, 0, 1.5), ("abs_x_2.5", 2, 1, 2.5)]
        for name, k, r, a in cases:
            if fns and name not in fns:
                continue
            jobs.append((lab(suite, name, k=k, r=r, alpha=a),
                         lambda name=name, k=k, r=r, a=a: check_alpha_characterization(name, k, r, math.inf, a)))
    elif suite == "membership":
        cases = [("exp", 1, 2.0), ("phi_inv_r1", 1, math.inf), ("phi_inv_r2", 2, math.inf),
                 ("phi_inv_r1", 1, 2.0), ("one_minus_x_0.75", 1, math.inf), ("x^3", 1, 2.0)]
        for name, r, p in cases:
            if fns and name not in fns:
                continue
            jobs.append((lab(suite, name, r=r, p=p), lambda name=name, r=r, p=p: check_membership(name, r, p)))
    else:
        raise ValueError(f"unknown suite {suite!r}")
    return jobs
