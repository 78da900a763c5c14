import math

import numpy as np
import pytest

from modsmooth import funcspace as fs
from modsmooth import kfunctional as kf
from modsmooth import moduli as md
from modsmooth.geometry import _phi_unchecked
from modsmooth.quadrature import lp_norm

INF = math.inf


def weighted_norm(f, r, p):
    return lp_norm(lambda x: _phi_unchecked(x) ** r * f.eval(x, r), p, breakpoints=f.singular_points)


@pytest.mark.parametrize("p", [1.0, 2.0, INF])
def test_low_degree_polynomial_is_zero(p):
    assert kf.k_functional_upper(fs.get("x^1"), 2, 0, p, 0.3).value == 0.0
    assert kf.k_functional_upper(fs.get("x^2"), 2, 1, p, 0.1).value == 0.0


@pytest.mark.parametrize("name, k, r, p", [("exp", 1, 0, INF), ("abs_x_1.5", 2, 1, 1.0),
                                           ("tpow_0.3_2", 3, 0, 2.0), ("phi_inv_r1", 1, 1, 2.0)])
def test_bounded_by_zero_candidate(name, k, r, p):
    f = fs.get(name)
    res = kf.k_functional_upper(f, k, r, p, 0.4, 12)
    assert res.value <= weighted_norm(f, r, p) + 1e-9
    assert res.value == pytest.approx(res.term_approx + res.term_deriv, rel=1e-12, abs=1e-15)
    assert res.term_approx >= 0 and res.term_deriv >= 0


def test_square_bound():
    assert kf.k_functional_upper(fs.get("x^2"), 2, 0, INF, 0.1).value <= 0.02 + 1e-12


def test_within_factor_of_modulus():
    f = fs.get("abs_x_1.5")
    K = kf.k_functional_upper(f, 2, 0, INF, 0.05).value
    w = md.compute("omega", md.ModulusQuery(f, 2, 0, INF, 0.05)).value
    assert w / 100 <= K <= 100 * w


def test_terms_recomputed_from_g():
    f = fs.get("abs_x_2.5")
    k, r, p, t = 2, 1, 2.0, 0.2
    res = kf.k_functional_upper(f, k, r, p, t, 16)
    gr = res.g.deriv(r)
    approx = lp_norm(lambda x: _phi_unchecked(x) ** r * (f.eval(x, r) - np.polynomial.chebyshev.chebval(x, gr)), p,
                     breakpoints=f.singular_points)
    deriv = t ** k * lp_norm(lambda x: _phi_unchecked(x) ** (k + r)
                             * np.polynomial.chebyshev.chebval(x, res.g.deriv(k + r)), p)
    assert res.term_approx == pytest.approx(approx, rel=1e-8)
    assert res.term_deriv == pytest.approx(deriv, rel=1e-8, abs=1e-14)


@pytest.mark.parametrize("p", [1.0, 2.0, INF])
def test_nonincreasing_in_degree(p):
    f = fs.get("abs_x_1.5")
    k, r, t = 2, 0, 0.1
    prev = math.inf
    kept = []
    for d in (k + r, 8, 16, 32):
        # nested candidate sets: pass the smaller-degree winner along
        res = kf.k_functional_upper(f, k, r, p, t, d, extra_candidates=kept)
        kept = [res.candidate]
        assert res.value <= prev + 1e-12
        prev = res.value


def test_curve_shares_candidates():
    f = fs.get("abs_x_1.5")
    k, r, p = 2, 0, 1.0
    ts = [0.02, 0.08, 0.3]
    curve = kf.k_functional_curve(f, k, r, p, ts, 16)
    for i, t1 in enumerate(ts):
        for j, t2 in enumerate(ts):
            assert curve[i].value <= curve[j].candidate.objective(t1, k) + 1e-9
            if t1 <= t2:
                g = curve[i].candidate
                assert g.objective(t1, k) <= g.objective(t2, k)


def test_curve_scaled_degree_never_worse():
    f = fs.get("tpow_0.3_2")
    ts = [0.01, 0.05]
    fixed = kf.k_functional_curve(f, 3, 0, 2.0, ts, 32)
    scaled = kf.k_functional_curve(f, 3, 0, 2.0, ts, 32, scale_with_t=True)
    for a, b in zip(fixed, scaled):
        assert b.value <= a.value + 1e-12
    assert scaled[0].value < 0.5 * fixed[0].value


def test_scaled_degree():
    assert kf.scaled_degree(0.5) == kf.DEFAULT_MAX_DEGREE
    assert kf.scaled_degree(0.01) == 100
    assert kf.scaled_degree(1e-4) == kf.SCALED_DEGREE_CAP


def test_scaling_check():
    assert kf.k_scaling_check(fs.get("x^1"), 2, 0, 2.0, 0.1, 3.0) == "both-zero"
    assert kf.k_scaling_check(fs.get("exp"), 2, 0, 2.0, 0.1, 1.0) == 1.0
    assert kf.k_scaling_check(fs.get("exp"), 2, 0, 2.0, 0.1, 2.0) <= 1 + 1e-6
    assert kf.k_scaling_check(fs.get("abs_x_1.5"), 1, 0, INF, 0.05, 4.0) <= 1 + 1e-6


def test_preconditions():
    with pytest.raises(ValueError):
        kf.k_functional_upper(fs.get("exp"), 2, 1, 2.0, 0.1, 2)
    with pytest.raises(ValueError):
        kf.k_functional_upper(fs.get("abs_x_1"), 1, fs.get("abs_x_1").max_order + 1, 2.0, 0.1)
    with pytest.raises(ValueError):
        kf.k_scaling_check(fs.get("exp"), 1, 0, 2.0, 0.1, 0.5)
