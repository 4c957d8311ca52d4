import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from restricted_mg1 import coupling, dist, sim
from restricted_mg1.errors import DomainError
from restricted_mg1.sim import EventStream, FixedStream


def test_meeting_at_zero_between_arrivals():
    # no arrival before both copies empty
    r = coupling.coupled_run(1, 0.3, 0.6, 1.0, dist.PointMass(0.5), FixedStream([(2.0, 0.5)]), 10.0)
    assert r.coupling_time == pytest.approx(0.6)
    assert r.u0_top == pytest.approx(0.6)


def test_meeting_by_truncation():
    r = coupling.coupled_run(1, 0.1, 0.5, 1.0, dist.PointMass(0.0), FixedStream([(0.05, 2.0)]), 10.0)
    assert r.coupling_time == pytest.approx(0.05)
    assert r.u1_bottom == pytest.approx(0.05)


def test_identical_starts_and_censoring():
    r = coupling.coupled_run(2, 0.4, 0.4, 1.0, dist.PointMass(1.0), EventStream(0), 5.0)
    assert r.coupling_time == 0.0
    r = coupling.coupled_run(1, 0.0, 0.5, 1.0, dist.PointMass(0.1), FixedStream([(0.1, 0.1)] * 100), 3.0)
    assert r.censored and math.isinf(r.coupling_time)


def test_point_mass_two_couples_by_first_arrival_or_decay():
    # every arrival truncates both copies, so coupling is no later than min(first arrival, 1)
    for seed in range(50):
        stream = EventStream(seed)
        first = next(stream.events(1.0, dist.PointMass(2.0)))[0]
        r = coupling.coupled_run(1, 0.0, 1.0, 1.0, dist.PointMass(2.0), stream, 10.0)
        assert r.coupling_time == pytest.approx(min(first, 1.0))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2 ** 63), st.floats(0, 1), st.floats(0, 1), st.floats(0.2, 5.0))
def test_coupling_dominated_by_hitting_times(seed, x, y, lam):
    d = dist.Exponential(1.5)
    r = coupling.coupled_run(1, x, y, lam, d, EventStream(seed), 200.0)
    assert r.coupling_time <= min(r.u0_top, r.u1_bottom)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2 ** 63), st.floats(0, 1), st.floats(0, 1))
def test_copies_agree_after_coupling(seed, x, y):
    d = dist.Uniform(0, 0.8)
    r = coupling.coupled_run(1, x, y, 1.5, d, EventStream(seed), 100.0)
    if not r.censored:
        def both(t):
            return (sim.workload_at(1, x, t, 1.5, d, EventStream(seed)),
                    sim.workload_at(1, y, t, 1.5, d, EventStream(seed)))

        a, b = both(r.coupling_time)
        # the instant itself is re-derived as clock + (T - clock), which may round
        assert a == pytest.approx(b, abs=1e-12)
        for t in (r.coupling_time + 0.5, r.coupling_time + 3.0):
            a, b = both(t)
            assert a == b


def test_hitting_times_match_coupled_run():
    d = dist.Exponential(2.0)
    for seed in range(30):
        u0, _ = coupling.hitting_times(0.8, 1.0, d, EventStream(seed), 50.0)
        _, u1 = coupling.hitting_times(0.2, 1.0, d, EventStream(seed), 50.0)
        r = coupling.coupled_run(1, 0.2, 0.8, 1.0, d, EventStream(seed), 50.0)
        assert r.u0_top == u0 and r.u1_bottom == u1


def test_batch_matches_reference(kernels):
    d = dist.Exponential(2.0)
    tc, u0, u1 = coupling.coupled_batch(1, 0.0, 1.0, 1.0, d, 200, 9, 20.0, kernels)
    for i in range(200):
        r = coupling.coupled_run(1, 0.0, 1.0, 1.0, d, EventStream(9, i), 20.0)
        assert (tc[i], u0[i], u1[i]) == (r.coupling_time, r.u0_top, r.u1_bottom)


def test_model2_batch_matches_reference(kernels):
    d = dist.Uniform(0, 1)
    tc, u0, _ = coupling.coupled_batch(2, 0.0, 2.0, 1.0, d, 100, 4, 30.0, kernels)
    for i in range(100):
        r = coupling.coupled_run(2, 0.0, 2.0, 1.0, d, EventStream(4, i), 30.0)
        assert (tc[i], u0[i]) == (r.coupling_time, r.u0_top)


def test_coupling_tail():
    est = coupling.coupling_tail(1, 0.0, 1.0, 1.0, dist.PointMass(2.0), [0.5, 1.0], 5000, 1)
    assert est[1].p_hat == 0.0
    assert est[0].p_hat == pytest.approx(math.exp(-0.5), abs=3 * est[0].ci_halfwidth / 3 + 0.02)
    text = coupling.tails_to_csv(est)
    assert text.splitlines()[0] == "t,p_hat,ci,n"
    with pytest.raises(DomainError):
        coupling.coupling_tail(1, 0.0, 1.0, 1.0, dist.PointMass(2.0), [1.0], 10, 1)
