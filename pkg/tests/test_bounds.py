import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import optimize, special, stats

from restricted_mg1 import bounds, dist
from restricted_mg1.errors import BracketError, DomainError


def test_arrival_coupling_bound():
    r = bounds.arrival_coupling_bound(1.0, 2.0)
    assert r.value == pytest.approx((1 - math.exp(-1)) ** 2)
    assert r.meaning == bounds.TV_BOUND
    with pytest.raises(DomainError):
        bounds.arrival_coupling_bound(1.0, 0.5)


def test_critical_rate_unit_parameters():
    r = bounds.critical_rate(1.0, 1.0)
    oracle = optimize.brentq(lambda l: -math.expm1(-l) - l * math.exp(1 - l), 1.0, 10.0, xtol=1e-14)
    assert r.value == pytest.approx(oracle, abs=1e-10)
    assert r.value == pytest.approx(1.75, abs=0.01)
    assert r.related[0].value == pytest.approx(1 - math.exp(-oracle))


@settings(max_examples=40, deadline=None)
@given(st.floats(0.05, 1.0), st.floats(0.05, 1.0))
def test_critical_rate_properties(p, beta):
    lam0 = bounds.critical_rate(p, beta).value
    assert lam0 > 1 / (p * beta)
    a, b = bounds.rho_bound_arguments(lam0, p, beta)
    assert a == pytest.approx(b, abs=1e-9)


def test_critical_rate_against_brentq_small_beta():
    p, beta = 0.3, 0.2

    def f(l):
        return math.log(-math.expm1(-l)) - (math.log(l * p) / beta + 1 - l * p)

    oracle = optimize.brentq(f, 1 / (p * beta), 1e4, xtol=1e-13)
    assert bounds.critical_rate(p, beta).value == pytest.approx(oracle, rel=1e-10)


def test_rho_bound_is_min_and_ld_variant():
    r = bounds.rho_bound(4.0, 1.0, 1.0)
    assert r.value == pytest.approx(min(1 - math.exp(-4), 4 * math.exp(-3)))
    ld = r.related[0]
    assert ld.name == "rho_bound_ld" and ld.value == pytest.approx(r.value)
    r2 = bounds.rho_bound(10.0, 1.0, 0.5)
    assert r2.related[0].value != pytest.approx(r2.value)


def test_large_deviation_rate_matches_poisson_tail():
    # P(Poisson(lam p t) <= t/beta)^(1/t) tends to the large-deviation rate
    lam, p, beta, t = 5.0, 0.8, 0.5, 2000.0
    k = np.arange(int(t / beta) + 1)
    empirical = math.exp(special.logsumexp(stats.poisson.logpmf(k, lam * p * t)) / t)
    ld = bounds.rho_bound(lam, p, beta).related[0].value
    assert empirical == pytest.approx(ld, rel=5e-3)


def test_large_jump_bounds():
    lam, p, t = 2.0, 0.3, 3.0
    reps = {r.name: r for r in bounds.large_jump_bounds(lam, p, t)}
    assert reps["large_jump_tv"].value == pytest.approx(math.exp(-lam * p * t))
    assert reps["small_jump_tv"].value == pytest.approx((1 - math.exp(-lam * (1 - p))) ** t)
    a, b = 1 - math.exp(-lam * p), math.exp(-lam * (1 - p))
    assert reps["large_jump_gap_min"].value == pytest.approx(min(a, b))
    assert reps["large_jump_gap_max"].value == pytest.approx(max(a, b))
    lam0 = optimize.brentq(lambda l: 1 - math.exp(-l * p) - math.exp(-l * (1 - p)), 1e-9, 100)
    assert bounds.large_jump_gap_rate(p) == pytest.approx(lam0, abs=1e-10)
    assert reps["large_jump_gap_uniform"].value == pytest.approx(math.exp(-lam0 * (1 - p)))
    assert "small_jump_tv" not in {r.name for r in bounds.large_jump_bounds(lam, p, 0.5)}


def test_compact_support_rate():
    r = bounds.compact_support_rate(1.0, 1.0)
    # the quoted 0.2292 is the same number rounded from a 4-digit log argument
    assert r.value == pytest.approx(0.2292, abs=5e-4)
    assert r.value == pytest.approx(-math.log(1 - math.exp(-1)) / 2)


def test_zero_drift_rate_cancels_step_drift():
    for eps in (0.2, 0.1, 0.01):
        lam = bounds.zero_drift_rate(eps)
        assert bounds.step_drift(eps, lam) == pytest.approx(0.0, abs=1e-15)
    with pytest.raises(DomainError):
        bounds.zero_drift_rate(0.25)


def test_mgf_condition():
    assert bounds.mgf_condition(dist.Uniform(0, 3)).value == 1.0
    assert bounds.mgf_condition(dist.Exponential(0.5)).value == 1.0
    assert bounds.mgf_condition(dist.Uniform(0, 3)).meaning == "predicate"


def test_bisect():
    assert bounds.bisect(lambda x: x * x - 2, 0, 2) == pytest.approx(math.sqrt(2), abs=1e-12)
    with pytest.raises(BracketError):
        bounds.bisect(lambda x: x * x + 1, -1, 1)


def test_report_json():
    r = bounds.critical_rate(0.5, 0.5)
    flat = r.flatten()
    assert [f.name for f in flat] == ["critical_rate", "uniform_rho"]
    assert set(flat[0].to_json()) == {"name", "params", "value", "meaning", "note"}


def test_rho_bound_unit_beta_against_poisson_tail():
    r = bounds.rho_bound(3.0, 1.0, 1.0)
    assert r.value == pytest.approx(3 * math.exp(-2), abs=1e-12)
    assert r.value == pytest.approx(0.4060, abs=1e-4)
    t = 2000.0
    k = np.arange(math.ceil(1 + t))
    tail = math.exp(special.logsumexp(stats.poisson.logpmf(k, 3.0 * t)) / t)
    assert tail == pytest.approx(0.406, abs=2e-3)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.05, 10.0), st.floats(0.05, 1.0))
def test_gap_max_form_dominates_min_form(lam, p):
    p = min(p, 0.99)
    reps = {r.name: r.value for r in bounds.large_jump_bounds(lam, p, 1.0)}
    assert reps["large_jump_gap_max"] >= reps["large_jump_gap_min"]


@settings(max_examples=30, deadline=None)
@given(st.floats(1.01, 20.0))
def test_unit_beta_forms_coincide(z):
    r = bounds.rho_bound(z, 1.0, 1.0)
    assert r.related[0].value == pytest.approx(r.value, rel=1e-12)
