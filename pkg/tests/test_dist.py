import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, stats

from restricted_mg1 import dist
from restricted_mg1.errors import DomainError

LAWS = [
    dist.PointMass(0.7),
    dist.Exponential(2.0),
    dist.Uniform(0.2, 1.5),
    dist.FiniteMixture((0.25, 0.75), (0.3, 1.2)),
    dist.Empirical((0.5, 0.1, 0.9, 0.5)),
]


def test_strict_and_weak_tails_at_atom():
    d = dist.PointMass(2.0)
    assert d.survival(2.0) == 0.0
    assert d.tail_mass(2.0) == 1.0
    assert d.survival(1.999) == 1.0


def test_mixture_tails():
    d = dist.mixture([(0.4, 0.5), (0.6, 1.5)])
    assert d.survival(0.5) == pytest.approx(0.6)
    assert d.tail_mass(0.5) == pytest.approx(1.0)
    assert d.mean == pytest.approx(0.4 * 0.5 + 0.6 * 1.5)


@pytest.mark.parametrize("d", LAWS, ids=lambda d: d.kind)
def test_mean_matches_integrated_survival(d):
    if math.isfinite(d.support_max):
        edges = sorted({0.0, d.support_max, *np.linspace(0, d.support_max, 50)})
        total = sum(integrate.quad(lambda x: d.survival(x), a, b)[0] for a, b in zip(edges, edges[1:]))
    else:
        total = integrate.quad(lambda x: d.survival(x), 0, np.inf)[0]
    assert d.mean == pytest.approx(total, rel=1e-6)


@pytest.mark.parametrize("d", LAWS, ids=lambda d: d.kind)
def test_excess_mean(d):
    c = 0.4
    hi = d.support_max if math.isfinite(d.support_max) else np.inf
    oracle = integrate.quad(lambda x: d.survival(x), c, hi, limit=200)[0]
    assert d.excess_mean(c) == pytest.approx(oracle, abs=1e-6)


@pytest.mark.parametrize("d", LAWS, ids=lambda d: d.kind)
def test_inverse_transform_reproduces_law(d):
    rng = np.random.default_rng(5)
    s = d.sample(rng, 20000)
    for x in (0.15, 0.5, 0.8, 1.3):
        assert np.mean(s > x) == pytest.approx(d.survival(x), abs=0.015)


def test_exponential_sampling_ks():
    s = dist.Exponential(3.0).sample(np.random.default_rng(1), 5000)
    assert stats.kstest(s, "expon", args=(0, 1 / 3.0)).pvalue > 1e-3


def test_empirical_is_uniform_over_samples():
    d = dist.Empirical((3.0, 1.0, 2.0))
    assert d.samples == (1.0, 2.0, 3.0)
    assert d.survival(1.0) == pytest.approx(2 / 3)
    assert d.tail_mass(1.0) == 1.0
    assert d.inverse(0.0) == 1.0 and d.inverse(0.999) == 3.0


@pytest.mark.parametrize("bad", [
    lambda: dist.Exponential(0.0),
    lambda: dist.Uniform(1.0, 0.5),
    lambda: dist.PointMass(-1.0),
    lambda: dist.FiniteMixture((0.5, 0.6), (1.0, 2.0)),
    lambda: dist.Empirical(()),
])
def test_invalid_parameters(bad):
    with pytest.raises(DomainError):
        bad()


def test_negative_argument_rejected():
    with pytest.raises(DomainError):
        dist.Exponential(1.0).survival(-0.1)


def test_mgf_condition_by_kind():
    assert dist.Uniform(0, 2).mgf_finite(10.0)
    assert dist.Exponential(2.0).mgf_finite(math.exp(1.9))
    assert not dist.Exponential(2.0).mgf_finite(math.exp(2.1))
    with pytest.raises(DomainError):
        dist.Uniform(0, 1).mgf_finite(1.0)


@pytest.mark.parametrize("d", LAWS, ids=lambda d: d.kind)
def test_json_round_trip(d):
    assert dist.from_json(d.to_json()) == d


def test_from_json_rejects_unknown():
    with pytest.raises(DomainError):
        dist.from_json({"kind": "exponential", "rate": 1, "scale": 2})
    with pytest.raises(DomainError):
        dist.from_json({"kind": "gamma"})


def test_empirical_file(tmp_path):
    p = tmp_path / "s.txt"
    p.write_text("0.5\n\n1.5\n")
    d = dist.from_json({"kind": "empirical", "path": "s.txt"}, tmp_path)
    assert d.samples == (0.5, 1.5)
    p.write_text("0.5\nabc\n")
    with pytest.raises(DomainError, match=":2:"):
        dist.load_empirical(p)


@settings(max_examples=60, deadline=None)
@given(st.floats(0.1, 5.0), st.lists(st.floats(0, 4), min_size=2, max_size=6))
def test_survival_is_nonincreasing(rate, xs):
    for d in (dist.Exponential(rate), dist.Uniform(0.0, rate), dist.PointMass(rate)):
        xs_sorted = sorted(xs)
        vals = d.survival(np.array(xs_sorted))
        assert np.all(np.diff(vals) <= 0)
        assert np.all((vals >= 0) & (vals <= 1))
        for x in xs:
            assert d.survival(x) <= d.tail_mass(x)
