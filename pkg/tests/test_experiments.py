import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from restricted_mg1 import coupling, dist, experiments as ex, invariant
from restricted_mg1.errors import BinningMismatchError, DomainError


def test_binning_cells():
    h = ex.histogram_from_samples([0.0, 0.0, 0.25, 0.5, 0.51, 1.0, 3.0], 1.0, 4)
    assert h.atom0 == pytest.approx(2 / 7)
    assert h.masses.tolist() == pytest.approx([1 / 7, 1 / 7, 1 / 7, 1 / 7])
    assert h.overflow == pytest.approx(1 / 7)
    assert h.cells().sum() == pytest.approx(1.0)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(0, 3), min_size=1, max_size=60), st.lists(st.floats(0, 3), min_size=1, max_size=60))
def test_tv_is_a_metric_value(a, b):
    ha = ex.histogram_from_samples(a, 2.0, 16)
    hb = ex.histogram_from_samples(b, 2.0, 16)
    tv = ex.tv_between(ha, hb)
    assert 0.0 <= tv <= 1.0
    assert tv == pytest.approx(ex.tv_between(hb, ha))
    assert ex.tv_between(ha, ha) == 0.0


def test_tv_binning_mismatch():
    with pytest.raises(BinningMismatchError):
        ex.tv_between(ex.histogram_from_samples([0.1], 1.0, 16), ex.histogram_from_samples([0.1], 1.0, 32))


def test_point_mass_at_zero_against_invariant():
    inv = invariant.model1_invariant(dist.Exponential(2.0), 1.0)
    h = ex.histogram_from_samples(np.zeros(1000), 1.0, 64)
    assert ex.tv_between(h, inv) == pytest.approx(1 - inv.atom0, abs=1e-12)


def test_transient_histogram_guards():
    with pytest.raises(DomainError):
        ex.transient_histogram(1, 0.0, 1.0, 1.0, dist.Exponential(2.0), 999, 0)
    with pytest.raises(DomainError):
        ex.transient_histogram(1, 0.0, 1.0, 1.0, dist.Exponential(2.0), 1000, 0, bins=8)


def test_paired_tv_identical_paths():
    s = np.linspace(0, 1, 100)
    assert ex.paired_tv(s, s, 1.0, 16) == (0.0, 0.0)


def test_paired_tv_sigma_is_binomial_scale():
    rng = np.random.default_rng(0)
    a = rng.random(20000)
    b = np.where(rng.random(20000) < 0.3, 0.0, a)
    tv, sigma = ex.paired_tv(a, b, 1.0, 16, seed=1)
    assert tv == pytest.approx(0.3, abs=0.02)
    assert sigma == pytest.approx(math.sqrt(0.3 * 0.7 / 20000), rel=0.3)


def test_dbar_bounded_by_coupling_tail():
    # binned TV of coupled copies never exceeds the fraction not yet coupled
    d = dist.Exponential(2.0)
    ts = [0.5, 1.0, 2.0]
    curve = ex.dbar_curve(1, 0.0, 1.0, 1.0, d, ts, 20000, 3, n_boot=0)
    tails = coupling.coupling_tail(1, 0.0, 1.0, 1.0, d, ts, 20000, 3)
    for p, e in zip(curve.points, tails):
        assert p.d_hat <= e.p_hat + 1e-12


def test_fit_rate_recovers_exponential():
    pts = [ex.DecayPoint(t, 0.5 * math.exp(-0.7 * t), 0.0) for t in range(1, 8)]
    assert ex.fit_rate(pts, 10 ** 9) == pytest.approx(0.7)
    assert ex.fit_rate(pts[:1], 10 ** 9) is None
    assert ex.fit_rate(pts, 10) is None


def test_submultiplicativity_report():
    curve = ex.DecayCurve((ex.DecayPoint(1.0, 0.3, 0.01), ex.DecayPoint(2.0, 0.05, 0.01)), 10000)
    rows = ex.submultiplicativity_check(curve, [(1.0, 1.0)])
    assert rows[0]["holds"]
    assert rows[0]["lhs"] == 0.05 and rows[0]["rhs"] == pytest.approx(0.09)


def test_collapse_demo_same_start():
    out = ex.collapse_demo([0.1], 5.0, 0.5, 0.5, 2000, 0)
    assert out[0][1] == 0.0


def test_collapse_demo_preconditions():
    with pytest.raises(DomainError):
        ex.collapse_demo([0.05, 0.1], 5.0, 0.85, 0.15, 2000, 0)
    with pytest.raises(DomainError):
        ex.collapse_demo([0.2], 5.0, 0.85, 0.15, 2000, 0)


def test_collapse_fast_mixing_for_large_eps():
    # starts pushed out to satisfy x >= 3/4 + eps, y <= 1/4 - eps for eps = 0.2
    out = ex.collapse_demo([0.2], 50.0, 0.96, 0.04, 10000, 3)
    tail = coupling.coupling_tail(1, 0.04, 0.96, 5.0, dist.PointMass(0.2), [50.0], 10000, 3)[0]
    assert out[0][1] < 0.2
    assert out[0][1] <= tail.p_hat + tail.ci_halfwidth


def test_model2_rate_fit_rejects_wide_support():
    with pytest.raises(DomainError):
        ex.model2_rate_fit(1.0, dist.Uniform(0, 2), 1.0, 0.0, 2.0, [1, 2], 1000, 0)


def test_tv_to_invariant_reports_sigma():
    d = dist.Exponential(2.0)
    inv = invariant.model1_invariant(d, 1.0)
    pts = ex.tv_to_invariant(1, 0.0, [0.0, 20.0], 1.0, d, inv, 5000, 2, n_boot=50)
    assert pts[0].d_hat == pytest.approx(1 - inv.atom0, abs=1e-12)
    assert pts[1].d_hat < 0.1 and pts[1].sigma > 0
