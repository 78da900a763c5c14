import math

import numpy as np
import numpy.polynomial.chebyshev as C
import pytest

from modsmooth import bestapprox as ba
from modsmooth import funcspace as fs
from modsmooth.bestapprox import LP_GRID_RULE
from modsmooth.quadrature import QuadratureRule

INF = math.inf


def shifted(base, poly, scale=1.0):
    """scale * base + poly, poly given by power-basis coefficients."""
    P = np.polynomial.Polynomial(poly)

    def deriv(x, order):
        return scale * base.eval(x, order) + P.deriv(order)(x) if order else scale * base.eval(x, 0) + P(x)

    return fs.FunctionSpec(f"{base.name}_shifted", deriv, base.max_order, base.smoothness_meta)


def test_square_sup_oracle():
    res = ba.best_approx(fs.get("x^2"), 2, INF)
    assert res.error == pytest.approx(0.5, abs=1e-9)
    assert np.allclose(res.coeffs, [0.5, 0.0], atol=1e-9)


def test_linear_l2_oracle():
    res = ba.best_approx(fs.get("x^1"), 1, 2.0)
    assert res.error == pytest.approx(math.sqrt(2 / 3), abs=1e-9)


def test_abs_sup_oracle_with_certificate():
    f = fs.get("abs_x_1")
    res = ba.best_approx(f, 2, INF)
    assert res.error == pytest.approx(0.5, abs=1e-8)
    pts = np.array([x for x, _ in res.certificate])
    assert len(pts) >= 3
    resid = f.eval(pts) - res(pts)
    assert np.all(np.abs(resid) >= res.error * (1 - 1e-8))
    assert np.all(np.sign(resid[1:]) == -np.sign(resid[:-1]))


@pytest.mark.parametrize("p", [1.0, 2.0, 3.0, INF])
def test_polynomial_below_degree_is_exact(p):
    for deg, n in ((0, 1), (2, 3), (3, 6)):
        res = ba.best_approx(fs.get(f"x^{deg}"), n, p)
        assert res.error <= 1e-10
        assert len(res.coeffs) == n


@pytest.mark.parametrize("name, n", [("exp", 4), ("abs_x_1", 5), ("abs_x_1.5", 8), ("tpow_0.3_2", 6)])
def test_certificate_alternates(name, n):
    f = fs.get(name)
    res = ba.best_approx(f, n, INF)
    assert res.converged
    pts = np.array([x for x, _ in res.certificate])
    assert len(pts) >= n + 1
    assert np.all(np.diff(pts) > 0)
    resid = f.eval(pts) - res(pts)
    assert np.all(np.abs(np.abs(resid) - res.error) <= 1e-8 * res.error)
    assert np.all(resid[1:] * resid[:-1] < 0)


@pytest.mark.parametrize("p", [1.0, 2.0, INF])
def test_shift_and_scale_invariance(p):
    base = fs.get("abs_x_1.5")
    n = 5
    e = ba.best_approx(base, n, p).error
    moved = ba.best_approx(shifted(base, [0.3, -1.2, 0.0, 0.7, 2.0]), n, p).error
    assert moved == pytest.approx(e, abs=1e-10)
    scaled = ba.best_approx(shifted(base, [0.0], scale=-2.5), n, p).error
    assert scaled == pytest.approx(2.5 * e, rel=1e-12, abs=1e-12)


@pytest.mark.parametrize("p", [1.0, 2.0, INF])
def test_sequence_nonincreasing(p):
    errs = [e for _, e in ba.en_sequence(fs.get("abs_x_1"), 12, p)]
    assert all(b <= a for a, b in zip(errs[:-1], errs[1:]))


def test_quintic_l2_sequence_hits_zero():
    seq = dict(ba.en_sequence(fs.get("x^5"), 8, 2.0))
    assert seq[5] > 0.01
    assert all(seq[n] <= 1e-12 for n in (6, 7, 8))


def test_exp_superalgebraic():
    assert ba.best_approx(fs.get("exp"), 16, INF).error < 1e-12


def test_abs_rate():
    ns = np.arange(8, 65)
    errs = [e for n, e in ba.en_sequence(fs.get("abs_x_1"), 64, INF) if n >= 8]
    slope = np.polyfit(np.log(ns), np.log(errs), 1)[0]
    assert slope == pytest.approx(-1.0, abs=0.1)


def test_sequence_limit():
    with pytest.raises(ValueError):
        ba.en_sequence(fs.get("exp"), 129, 2.0)


def test_unbounded_sup_rejected():
    pole = fs.FunctionSpec("pole", lambda x, order: 1.0 / (1.0 - x), 0)
    with pytest.raises(ValueError):
        ba.best_approx(pole, 3, INF)


@pytest.mark.parametrize("name", ["abs_x_1", "abs_x_1.5", "one_minus_x_1.5"])
def test_l1_grid_doubling(monkeypatch, name):
    f = fs.get(name)
    coarse = ba.best_approx(f, 6, 1.0).error
    fine_rule = QuadratureRule(panels=2 * LP_GRID_RULE.panels, nodes_per_panel=LP_GRID_RULE.nodes_per_panel)
    monkeypatch.setattr(ba, "LP_GRID_RULE", fine_rule)
    fine = ba.best_approx(f, 6, 1.0).error
    assert abs(fine - coarse) < 1e-6 * coarse


def test_l1_error_matches_residual_norm():
    f = fs.get("abs_x_1.5")
    res = ba.best_approx(f, 4, 1.0)
    x = np.linspace(-1, 1, 200001)
    direct = np.trapezoid(np.abs(f.eval(x) - res(x)), x)
    assert res.error == pytest.approx(direct, rel=1e-6)


@pytest.mark.parametrize("n", [1, 2, 5, 16, 64])
def test_potapov_chebyshev_sup(n):
    assert ba.potapov_ratio(ba.chebyshev_T(n), 1, INF) == pytest.approx(1.0, rel=1e-6)


@pytest.mark.parametrize("p", [2.0, INF])
@pytest.mark.parametrize("nu", [1, 2])
def test_potapov_bounded(p, nu):
    for n in (2, 3, 8, 32, 64):
        assert ba.potapov_ratio(ba.chebyshev_T(n), nu, p) <= 2.0


def test_potapov_edge_cases():
    const = ba.PolyApprox(np.array([3.0]), 1, INF, 0.0)
    assert ba.potapov_ratio(const, 1, INF) == 0.0
    with pytest.raises(ZeroDivisionError):
        ba.potapov_ratio(ba.PolyApprox(np.zeros(2), 2, INF, 0.0), 1, 2.0)
    with pytest.raises(ValueError):
        ba.potapov_ratio(ba.chebyshev_T(3), 0, 2.0)


def test_derivative_error_examples():
    assert ba.derivative_error(fs.get("x^3"), 1, 5, INF) <= 1e-10
    # the error curve is close to E_8 T_8, so its weighted derivative is close to 8 E_8
    e8 = ba.best_approx(fs.get("exp"), 8, INF).error
    assert ba.derivative_error(fs.get("exp"), 1, 8, INF) == pytest.approx(8 * e8, rel=0.05)
    with pytest.raises(ValueError):
        ba.derivative_error(fs.get("abs_x_1"), fs.get("abs_x_1").max_order + 1, 4, INF)


def test_weighted_derivative_norm_identity():
    # phi T_n'(cos th) = n sin(n th)
    c = np.zeros(6)
    c[5] = 1.0
    assert ba.weighted_derivative_norm(c, 1, INF) == pytest.approx(5.0, rel=1e-8)
    x = np.cos(np.linspace(0, np.pi, 9))
    assert np.allclose(np.sqrt(1 - x * x) * C.chebval(x, C.chebder(c)), 5 * np.sin(5 * np.arccos(x)))
