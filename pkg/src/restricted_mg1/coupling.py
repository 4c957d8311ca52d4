"""Shared-randomness coupling of two copies of a workload process.

Both copies see the same arrival epochs and service requirements. Two
distinct workloads that both only decay can meet only at 0, so between
arrivals the meeting time is ``T_{n-1} + max(a, b)`` whenever that is not
after ``T_n``; at arrivals they meet when the two post-jump values coincide,
which for model 1 happens exactly when both are truncated to 1. Workloads
are compared exactly: both copies go through arithmetically identical
updates, so coincidences are exact in floating point.
"""
from __future__ import annotations

import io
import math
from dataclasses import dataclass

import numpy as np

from . import backend as _backend
from .dist import ServiceDistribution
from .errors import DomainError
from .sim import ModelKind, _check_start, as_model, jump


@dataclass(frozen=True)
class CoupledSample:
    """One coupled run. Times equal to ``inf`` were not reached by ``t_max``.

    ``u0_top`` is when the copy started higher first hits 0; ``u1_bottom``
    when the copy started lower first hits 1 (model 1 only, else ``None``).
    """

    x: float
    y: float
    coupling_time: float
    u0_top: float
    u1_bottom: float | None
    t_max: float

    @property
    def censored(self) -> bool:
        return math.isinf(self.coupling_time)


@dataclass(frozen=True)
class TailEstimate:
    t: float
    p_hat: float
    ci_halfwidth: float
    n: int


def coupled_run(kind, x: float, y: float, lam: float, d: ServiceDistribution, stream, t_max: float) -> CoupledSample:
    kind = as_model(kind)
    _check_start(kind, x)
    _check_start(kind, y)
    if not t_max > 0:
        raise DomainError("t_max must be positive")
    m1 = kind == ModelKind.TRUNCATED_SERVICE
    a, b = min(x, y), max(x, y)
    inf = math.inf
    tc = 0.0 if a == b else inf
    u0 = 0.0 if b == 0.0 else inf
    u1 = 0.0 if (m1 and a == 1.0) else inf
    clock = 0.0
    events = stream.events(lam, d)
    while clock <= t_max and (tc == inf or u0 == inf or (m1 and u1 == inf)):
        ia, s = next(events)
        tn = clock + ia
        dt = tn - clock
        if u0 == inf and b <= dt:
            u0 = clock + b
        if tc == inf and max(a, b) <= dt:
            tc = clock + max(a, b)
        a = max(a - dt, 0.0)
        b = max(b - dt, 0.0)
        a = jump(kind, a, s)
        b = jump(kind, b, s)
        if m1 and u1 == inf and a == 1.0:
            u1 = tn
        if tc == inf and a == b:
            tc = tn
        clock = tn

    def cap(v):
        return inf if v > t_max else v

    return CoupledSample(x, y, cap(tc), cap(u0), cap(u1) if m1 else None, t_max)


def hitting_times(x: float, lam: float, d: ServiceDistribution, stream, t_max: float) -> tuple[float, float]:
    """First times ``(U0, U1)`` at which the model-1 path from ``x`` sits at 0 and at 1."""
    _check_start(ModelKind.TRUNCATED_SERVICE, x)
    inf = math.inf
    u0 = 0.0 if x == 0.0 else inf
    u1 = 0.0 if x == 1.0 else inf
    w = x
    clock = 0.0
    events = stream.events(lam, d)
    while clock <= t_max and (u0 == inf or u1 == inf):
        ia, s = next(events)
        tn = clock + ia
        dt = tn - clock
        if u0 == inf and w <= dt:
            u0 = clock + w
        w = jump(1, max(w - dt, 0.0), s)
        if u1 == inf and w == 1.0:
            u1 = tn
        clock = tn
    return (inf if u0 > t_max else u0), (inf if u1 > t_max else u1)


def coupled_batch(kind, x, y, lam, d, n, seed, t_max, kernels=None):
    """Arrays ``(coupling_time, u0_top, u1_bottom)`` for replicas ``0..n-1``."""
    kind = as_model(kind)
    _check_start(kind, x)
    _check_start(kind, y)
    kernels = kernels or _backend.get()
    return kernels.coupled_batch(int(kind), float(x), float(y), float(lam), d, int(seed), 0, int(n), float(t_max))


def coupling_tail(kind, x: float, y: float, lam: float, d: ServiceDistribution, t_values, n: int, seed: int,
                  kernels=None) -> list[TailEstimate]:
    """Monte Carlo ``P(T > t)`` for each ``t`` with a 3-sigma normal half-width."""
    if n < 100:
        raise DomainError("need at least 100 replicas")
    t_values = [float(t) for t in t_values]
    if not t_values or min(t_values) < 0:
        raise DomainError("t values must be non-empty and >= 0")
    t_max = max(max(t_values), 1e-12)
    tc, _, _ = coupled_batch(kind, x, y, lam, d, n, seed, t_max, kernels)
    out = []
    for t in t_values:
        p = float(np.count_nonzero(tc > t)) / n
        out.append(TailEstimate(t, p, 3.0 * math.sqrt(p * (1.0 - p) / n), n))
    return out


def tails_to_csv(estimates, fh=None) -> str:
    buf = io.StringIO()
    buf.write("t,p_hat,ci,n\n")
    for e in estimates:
        buf.write(f"{e.t:.17g},{e.p_hat:.17g},{e.ci_halfwidth:.17g},{e.n}\n")
    text = buf.getvalue()
    if fh is not None:
        fh.write(text)
    return text
