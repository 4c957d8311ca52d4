import numpy as np
import pytest

from restricted_mg1 import backend, dist, sim
from restricted_mg1.sim import EventStream

LAWS = [dist.PointMass(0.3), dist.Exponential(2.0), dist.Uniform(0.1, 1.4),
        dist.FiniteMixture((0.3, 0.7), (0.2, 1.1)), dist.Empirical((0.2, 0.4, 1.7))]

needs_compiled = pytest.mark.skipif("cython" not in backend.available(), reason="extension not built")


@pytest.mark.parametrize("d", LAWS, ids=lambda d: d.kind)
@pytest.mark.parametrize("model", [1, 2])
def test_kernels_match_reference_simulation(kernels, d, model):
    out = kernels.workload_batch(model, 0.5, 3.0, 1.2, d, 17, 0, 50)
    ref = [sim.workload_at(model, 0.5, 3.0, 1.2, d, EventStream(17, i)) for i in range(50)]
    assert np.array_equal(out, np.array(ref))


@needs_compiled
@pytest.mark.parametrize("d", LAWS, ids=lambda d: d.kind)
@pytest.mark.parametrize("model", [1, 2])
def test_backends_bit_identical(d, model):
    c, p = backend.get("cython"), backend.get("python")
    assert np.array_equal(c.workload_batch(model, 0.0, 4.0, 1.0, d, 5, 0, 300),
                          p.workload_batch(model, 0.0, 4.0, 1.0, d, 5, 0, 300))
    for a, b in zip(c.coupled_batch(model, 0.0, 1.0, 1.0, d, 5, 0, 300, 10.0),
                    p.coupled_batch(model, 0.0, 1.0, 1.0, d, 5, 0, 300, 10.0)):
        assert np.array_equal(a, b)
    rc = c.regenerative(model, 1.0, d, 5, 500, 3.0, 32)
    rp = p.regenerative(model, 1.0, d, 5, 500, 3.0, 32)
    assert np.array_equal(rc[0], rp[0]) and rc[1:] == rp[1:]


@needs_compiled
def test_threading_does_not_change_results(monkeypatch):
    k = backend.get("cython")
    d = dist.Exponential(1.0)
    monkeypatch.setenv("QE_THREADS", "1")
    one = k.workload_batch(1, 0.2, 5.0, 1.0, d, 3, 0, 1001)
    monkeypatch.setenv("QE_THREADS", "4")
    four = k.workload_batch(1, 0.2, 5.0, 1.0, d, 3, 0, 1001)
    assert np.array_equal(one, four)


def test_start_offset_selects_replicas(kernels):
    d = dist.Exponential(1.0)
    full = kernels.workload_batch(1, 0.2, 2.0, 1.0, d, 3, 0, 20)
    tail = kernels.workload_batch(1, 0.2, 2.0, 1.0, d, 3, 10, 10)
    assert np.array_equal(full[10:], tail)


def test_unknown_backend():
    with pytest.raises(ValueError):
        backend.get("fortran")


def test_thread_count_env(monkeypatch):
    monkeypatch.setenv("QE_THREADS", "3")
    assert backend.thread_count() == 3
    monkeypatch.setenv("QE_THREADS", "0")
    assert backend.thread_count() >= 1
