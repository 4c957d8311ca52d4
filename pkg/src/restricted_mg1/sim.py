"""Exact event-driven simulation of the two restricted workload processes.

Between arrivals the workload decays at unit rate and is absorbed at 0. At an
arrival with service requirement ``s``:

* truncated service (model 1): ``post = min(pre + s, 1)``;
* bounded waiting (model 2): ``post = pre + s`` if ``pre < 1`` else ``pre``.

Decay over ``[T_{n-1}, T_n]`` always uses the rounded difference
``T_n - T_{n-1}`` of the stored epochs, so recorded trajectories satisfy the
decay rule exactly in floating point.
"""
from __future__ import annotations

import enum
import io
import math
from dataclasses import dataclass, field
from math import log1p
from typing import Iterator, Sequence

from . import backend as _backend
from ._stream import stream_key, uniform
from .dist import ServiceDistribution
from .errors import DomainError
from .invariant import GridFunction, InvariantDistribution


class ModelKind(enum.IntEnum):
    TRUNCATED_SERVICE = 1
    BOUNDED_WAITING = 2


def as_model(kind) -> ModelKind:
    try:
        return ModelKind(int(kind))
    except (ValueError, TypeError):
        raise DomainError(f"model must be 1 or 2, got {kind!r}") from None


@dataclass(frozen=True)
class EventStream:
    """Seeded stream of ``(interarrival, service)`` pairs for one replica."""

    seed: int
    replica: int = 0

    def events(self, lam: float, d: ServiceDistribution) -> Iterator[tuple[float, float]]:
        key = stream_key(self.seed, self.replica)
        c = 0
        while True:
            yield -log1p(-uniform(key, c)) / lam, d.inverse(uniform(key, c + 1))
            c += 2


@dataclass(frozen=True)
class FixedStream:
    """Explicit finite list of ``(interarrival, service)`` pairs.

    After the list runs out no further arrivals occur.
    """

    pairs: Sequence[tuple[float, float]] = ()

    def events(self, lam, d):
        yield from self.pairs
        while True:
            yield math.inf, 0.0


def jump(kind, w: float, s: float) -> float:
    """Workload right after an arrival that finds ``w`` and brings ``s``."""
    if as_model(kind) == ModelKind.TRUNCATED_SERVICE:
        w = w + s
        return 1.0 if w > 1.0 else w
    return w + s if w < 1.0 else w


def _check_start(kind, x):
    if x < 0 or (kind == ModelKind.TRUNCATED_SERVICE and x > 1):
        raise DomainError(f"initial workload {x} outside the state space of model {int(kind)}")


def workload_at(kind, x: float, t: float, lam: float, d: ServiceDistribution, stream) -> float:
    """Exact value of the process started at ``x``, at time ``t``."""
    kind = as_model(kind)
    _check_start(kind, x)
    if t < 0:
        raise DomainError("t must be >= 0")
    w = x
    clock = 0.0
    for ia, s in stream.events(lam, d):
        tn = clock + ia
        if tn > t:
            w = w - (t - clock)
            return w if w > 0.0 else 0.0
        w = w - (tn - clock)
        if w < 0.0:
            w = 0.0
        w = jump(kind, w, s)
        clock = tn
    raise AssertionError("unreachable")


@dataclass(frozen=True)
class Epoch:
    t: float
    pre: float
    post: float


@dataclass(frozen=True)
class Trajectory:
    x: float
    horizon: float
    epochs: tuple[Epoch, ...] = field(default=())

    def to_csv(self, fh=None) -> str:
        buf = io.StringIO()
        buf.write("t,pre,post\n")
        for e in self.epochs:
            buf.write(f"{e.t:.17g},{e.pre:.17g},{e.post:.17g}\n")
        text = buf.getvalue()
        if fh is not None:
            fh.write(text)
        return text


def simulate_trajectory(kind, x: float, horizon: float, lam: float, d: ServiceDistribution, stream) -> Trajectory:
    """All arrival epochs in ``[0, horizon]`` with the workload just before and after."""
    kind = as_model(kind)
    _check_start(kind, x)
    epochs = []
    w = x
    clock = 0.0
    for ia, s in stream.events(lam, d):
        tn = clock + ia
        if tn > horizon:
            break
        pre = w - (tn - clock)
        if pre < 0.0:
            pre = 0.0
        w = jump(kind, pre, s)
        epochs.append(Epoch(tn, pre, w))
        clock = tn
    return Trajectory(x, horizon, tuple(epochs))


def regenerative_invariant_estimate(kind, lam: float, d: ServiceDistribution, n_cycles: int, *,
                                    seed: int = 0, n_bins: int = 64, x_max: float | None = None,
                                    kernels=None) -> InvariantDistribution:
    """Occupation-measure estimate of the invariant law over regeneration cycles.

    The path starts in state 1 and a cycle ends at each re-entry into state 1:
    a jump landing on 1 (for model 1, every truncating jump) or, for model 2,
    the decay path reaching 1 from above. Time spent in each bin of
    ``(0, x_max]`` over all cycles is normalised by the total cycle time; the
    result has a piecewise-constant density and carries time above ``x_max``
    as ``tail``.
    """
    kind = as_model(kind)
    if n_cycles < 1:
        raise DomainError("n_cycles must be >= 1")
    if not lam > 0:
        raise DomainError("lam must be positive")
    if x_max is None:
        x_max = 1.0 if kind == ModelKind.TRUNCATED_SERVICE else default_x_max(d)
    kernels = kernels or _backend.get()
    bins, t_zero, t_over, total = kernels.regenerative(int(kind), lam, d, seed, int(n_cycles), float(x_max), int(n_bins))
    width = x_max / n_bins
    density = GridFunction(0.0, width, bins / (total * width))
    return InvariantDistribution(t_zero / total, density, float(x_max), piecewise="constant", tail=t_over / total)


def default_x_max(d: ServiceDistribution) -> float:
    """Right end used for model-2 grids: ``1 + b`` for support in ``[0, b]``."""
    if math.isfinite(d.support_max):
        return 1.0 + d.support_max
    c = 1.0
    while d.survival(c) > 1e-6:
        c *= 2.0
    return 1.0 + c
