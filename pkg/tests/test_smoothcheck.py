import math

import pytest

from modsmooth import funcspace as fs
from modsmooth import smoothcheck as sc

INF = math.inf


def test_exp_stabilizes():
    probe = sc.probe_membership(fs.get("exp"), 1, 2.0, 1.0)
    assert probe.stabilizes
    assert [e for e, _ in probe.norm_estimates] == sorted(sc.DEFAULT_EPS, reverse=True)


def test_exact_cancellation():
    probe = sc.probe_membership(fs.get("phi_inv_r2"), 2, INF, 2.0)
    assert probe.stabilizes
    assert probe.norm_estimates[-1][1] == pytest.approx(1.0, rel=1e-12)


def test_weak_weight_diverges():
    probe = sc.probe_membership(fs.get("phi_inv_r2"), 2, INF, 0.5)
    assert not probe.stabilizes


@pytest.mark.parametrize("name, r, p, gamma", [("phi_inv_r1", 1, 2.0, 0.2), ("abs_x_0.5", 1, 1.0, 0.0),
                                               ("one_minus_x_0.75", 1, 2.0, 1.0)])
def test_estimates_monotone(name, r, p, gamma):
    vals = [v for _, v in sc.probe_membership(fs.get(name), r, p, gamma).norm_estimates]
    assert all(a <= b for a, b in zip(vals[:-1], vals[1:]))


def test_membership_preconditions():
    with pytest.raises(ValueError):
        sc.probe_membership(fs.get("exp"), 1, 2.0, -0.1)
    with pytest.raises(ValueError):
        sc.probe_membership(fs.get("abs_x_1"), fs.get("abs_x_1").max_order + 1, 2.0, 1.0)


def test_cubic_decays():
    probe = sc.vanishing_limit_probe(fs.get("x^3"), 2, 1, 2.0)
    assert probe.decays
    assert probe.rows[-1][1] > 0
    assert probe.slope == pytest.approx(2.0, abs=0.1)


def test_counterexample_does_not_decay():
    probe = sc.vanishing_limit_probe(fs.get("phi_inv_r1"), 1, 1, INF)
    assert not probe.decays
    assert probe.endpoint_limit_zero is False
    assert probe.agreement


def test_counterexample_decays_in_l2():
    assert sc.vanishing_limit_probe(fs.get("phi_inv_r1"), 1, 1, 2.0).decays


@pytest.mark.parametrize("k, r", [(1, 0), (2, 1), (3, 2)])
def test_exp_sup(k, r):
    probe = sc.vanishing_limit_probe(fs.get("exp"), k, r, INF)
    assert probe.decays and probe.endpoint_limit_zero and probe.agreement


@pytest.mark.parametrize("name", fs.names())
def test_sup_agreement_over_catalog(name):
    f = fs.get(name)
    for r in range(min(f.max_order, 2) + 1):
        probe = sc.vanishing_limit_probe(f, 1, r, INF, js=range(1, 9))
        assert probe.agreement is not False, (name, r, probe)
        assert (probe.agreement is None) == (not sc.interior_continuous(f, r))


@pytest.mark.parametrize("name, r, expected", [("abs_x_1", 1, False), ("abs_x_1", 0, True),
                                                ("abs_x_1.5", 1, True), ("abs_x_1.5", 2, False),
                                                ("abs_x_0.5", 1, False), ("tpow_0.3_2", 1, True),
                                                ("tpow_0.3_2", 2, False), ("exp", 3, True)])
def test_interior_continuity(name, r, expected):
    assert sc.interior_continuous(fs.get(name), r) is expected


def test_endpoint_slow_power():
    # phi (1 - x)^-0.25 ~ (1 - x)^0.25 still tends to zero
    assert sc.endpoint_behaviour(fs.get("one_minus_x_0.75"), 1)[0]
    assert sc.endpoint_behaviour(fs.get("phi_inv_r2"), 2) == (False, pytest.approx(1.0))
