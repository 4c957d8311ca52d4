"""Kernel backend selection.

The compiled extension ``_ckernels`` is used when it imports; otherwise the
pure-Python ``_core`` module takes over with identical results. Setting
``RESTRICTED_MG1_PURE_PYTHON=1`` forces the fallback.

Replica batches are split into contiguous chunks and may run on a thread pool
(compiled backend only, since it releases the GIL). Each chunk writes its own
slice of the output, so results never depend on scheduling. ``QE_THREADS``
caps the pool size; 0 or unset means one thread per CPU.
"""
import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import _core
from ._stream import MASK64

try:
    if os.environ.get("RESTRICTED_MG1_PURE_PYTHON"):
        raise ImportError("pure Python forced")
    from . import _ckernels
except ImportError:
    _ckernels = None


def thread_count():
    raw = os.environ.get("QE_THREADS", "0").strip() or "0"
    n = int(raw)
    if n < 0:
        raise ValueError("QE_THREADS must be >= 0")
    return n or (os.cpu_count() or 1)


def _chunks(n, parts):
    parts = max(1, min(parts, n))
    size = -(-n // parts)
    return [(lo, min(n, lo + size)) for lo in range(0, n, size)]


class Kernels:
    """Uniform array-returning front end over one backend module."""

    def __init__(self, compiled):
        if compiled and _ckernels is None:
            raise ImportError("compiled kernels are not built")
        self.compiled = compiled
        self.name = "cython" if compiled else "python"

    def __repr__(self):
        return f"Kernels({self.name!r})"

    def _run(self, n, job):
        spans = _chunks(n, thread_count() if self.compiled else 1)
        if len(spans) == 1:
            for lo, hi in spans:
                job(lo, hi)
            return
        with ThreadPoolExecutor(len(spans)) as pool:
            for f in [pool.submit(job, lo, hi) for lo, hi in spans]:
                f.result()

    def workload_batch(self, model, x, t, lam, dist, seed, start, n):
        code, params = dist.kernel_spec()
        seed &= MASK64
        out = np.empty(n)
        if n == 0:
            return out
        if self.compiled:
            p = np.ascontiguousarray(params, dtype=float)

            def job(lo, hi):
                _ckernels.workload_batch(model, x, t, lam, code, p, seed, start + lo, out[lo:hi])
        else:
            def job(lo, hi):
                out[lo:hi] = _core.workload_batch(model, x, t, lam, code, params, seed, start + lo, hi - lo)
        self._run(n, job)
        return out

    def coupled_batch(self, model, x, y, lam, dist, seed, start, n, t_max):
        code, params = dist.kernel_spec()
        seed &= MASK64
        tc, u0, u1 = np.empty(n), np.empty(n), np.empty(n)
        if n == 0:
            return tc, u0, u1
        if self.compiled:
            p = np.ascontiguousarray(params, dtype=float)

            def job(lo, hi):
                _ckernels.coupled_batch(model, x, y, lam, code, p, seed, start + lo, t_max,
                                        tc[lo:hi], u0[lo:hi], u1[lo:hi])
        else:
            def job(lo, hi):
                a, b, c = _core.coupled_batch(model, x, y, lam, code, params, seed, start + lo, hi - lo, t_max)
                tc[lo:hi], u0[lo:hi], u1[lo:hi] = a, b, c
        self._run(n, job)
        return tc, u0, u1

    def regenerative(self, model, lam, dist, seed, n_cycles, x_max, n_bins):
        """Return ``(bin_times, t_zero, t_over, total)``."""
        code, params = dist.kernel_spec()
        seed &= MASK64
        if self.compiled:
            bins = np.zeros(n_bins)
            t_zero, t_over, total = _ckernels.regenerative(
                model, lam, code, np.ascontiguousarray(params, dtype=float),
                seed, n_cycles, x_max, n_bins, bins)
            return bins, t_zero, t_over, total
        bins, t_zero, t_over, total = _core.regenerative(
            model, lam, code, params, seed, n_cycles, x_max, n_bins)
        return np.asarray(bins), t_zero, t_over, total


def available():
    """Names of the backends importable in this environment."""
    return ["cython", "python"] if _ckernels is not None else ["python"]


def get(name=None):
    """Return kernels by name; ``None`` picks the fastest available."""
    if name is None:
        name = available()[0]
    if name not in ("cython", "python"):
        raise ValueError(f"unknown backend {name!r}")
    return Kernels(name == "cython")


BACKEND = available()[0]
