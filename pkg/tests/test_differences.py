import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from modsmooth import differences as d
from modsmooth import funcspace as fs


def sq(x):
    return np.asarray(x) ** 2


def lin(x):
    return np.asarray(x, dtype=float)


def test_stencil_weights_exact():
    assert d.stencil_weights(3) == (-1, 3, -3, 1)
    assert all(isinstance(w, int) for w in d.stencil_weights(20))
    with pytest.raises(ValueError):
        d.stencil_weights(21)


def test_second_difference_of_square():
    # (x+h)^2 - 2x^2 + (x-h)^2 = 2h^2
    assert d.sym_diff(sq, d.DifferenceQuery(2, 0.1, 0.3)) == pytest.approx(0.02, rel=1e-12)


def test_truncated_outside_interval():
    assert d.sym_diff(lin, d.DifferenceQuery(1, 0.2, 0.95)) == 0.0


def test_annihilates_low_degree():
    f = fs.get("x^5")
    for h, x in [(0.05, 0.1), (0.1, -0.3), (0.01, 0.6)]:
        assert abs(d.sym_diff(f, d.DifferenceQuery(6, h, x))) < 1e-12


def test_query_validation():
    with pytest.raises(ValueError):
        d.DifferenceQuery(0, 0.1, 0.0)
    with pytest.raises(ValueError):
        d.DifferenceQuery(1, -0.1, 0.0)
    with pytest.raises(ValueError):
        d.DifferenceQuery(1, 0.1, 0.0, interval=(1.0, 0.0))
    with pytest.raises(ValueError):
        d.DifferenceQuery(1, 0.1, 0.0, flavor="sideways")


def test_phi_step_examples():
    assert d.sym_diff_phi_step(lin, 1, 0.5, 0.0) == pytest.approx(0.5)
    assert d.sym_diff_phi_step(sq, 2, 0.2, 0.0) == pytest.approx(2 * 0.04)
    assert d.sym_diff_phi_step(lin, 1, 1.9, 0.9) == 0.0


def test_phi_step_domain_boundary():
    assert not d.in_domain(1, 1.9, 0.9)
    assert d.in_domain(1, 1.9, 0.05)
    assert not d.in_domain(1, 1.9, 0.052)


def test_phi_step_vectorised_matches_scalar():
    xs = np.linspace(-1, 1, 41)
    f = fs.get("exp")
    vec = d.sym_diff_phi_step(f, 3, 0.2, xs)
    assert np.array_equal(vec, [d.sym_diff_phi_step(f, 3, 0.2, x) for x in xs])


@pytest.mark.parametrize("k, h, x, flavor, want", [
    (1, 0.1, -1.0, "forward", 0.1),
    (2, 0.1, -1.0, "forward", 0.02),
    (1, 0.1, 1.0, "backward", 0.1),
])
def test_directed(k, h, x, flavor, want):
    f = lin if k == 1 else sq
    assert d.directed_diff(f, k, h, x, flavor) == pytest.approx(want, rel=1e-12)


def test_directed_truncation():
    assert d.directed_diff(lin, 2, 0.1, 0.85, "forward") == 0.0
    assert d.directed_diff(lin, 2, 0.1, -0.85, "backward") == 0.0


def test_identity_examples():
    diff, integ = d.iterated_integral_identity_check(fs.get("x^3"), 2, 0.2, 0.1)
    assert diff == pytest.approx(0.024, rel=1e-12) and integ == pytest.approx(0.024, rel=1e-12)
    diff, integ = d.iterated_integral_identity_check(fs.get("exp"), 1, 0.1, 0.0)
    assert diff == pytest.approx(2 * math.sinh(0.05), rel=1e-13)
    assert integ == pytest.approx(2 * math.sinh(0.05), rel=1e-13)
    diff, integ = d.iterated_integral_identity_check(fs.get("x^4"), 3, 0.15, 0.2)
    assert abs(diff - integ) < 1e-10


def test_identity_needs_interior():
    with pytest.raises(ValueError):
        d.iterated_integral_identity_check(fs.get("exp"), 2, 0.5, 0.9)


@settings(max_examples=100, deadline=None)
@given(st.floats(-3, 3), st.floats(-3, 3), st.integers(1, 5), st.floats(1e-3, 0.2), st.floats(-0.5, 0.5))
def test_linearity(a, b, k, h, x):
    f, g = fs.get("exp"), fs.get("x^3")
    q = d.DifferenceQuery(k, h, x)
    combo = d.sym_diff(lambda z: a * f(z) + b * g(z), q)
    assert combo == pytest.approx(a * d.sym_diff(f, q) + b * d.sym_diff(g, q), abs=1e-13)


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 6), st.floats(0.0, 1.0), st.floats(-1.0, 1.0))
def test_truncation_is_exact_zero(k, h, x):
    q = d.DifferenceQuery(k, h, x)
    if x - k * h / 2 < -1 or x + k * h / 2 > 1:
        assert d.sym_diff(fs.get("exp"), q) == 0.0
