"""Monte Carlo total-variation experiments.

Transient laws ``P_x(V_t in .)`` are estimated by running ``n`` independent
replicas to time ``t`` and binning the values: an exact 0 counts toward the
atom, values in ``(0, x_max]`` go to right-closed bins, values above ``x_max``
to an overflow cell. TV between two binned laws is half the L1 distance over
atom, bins and overflow; it is the TV of the coarsened measures and so never
exceeds the true TV.

Two-start comparisons reuse the same seed for both starts, so replica ``i``
of each start is driven by the same arrivals and services.
"""
from __future__ import annotations

import io
import math
from dataclasses import dataclass, field

import numpy as np

from . import backend as _backend
from .bounds import compact_support_rate, zero_drift_rate
from .dist import PointMass, ServiceDistribution
from .errors import BinningMismatchError, DomainError
from .invariant import InvariantDistribution
from .sim import ModelKind, _check_start, as_model, default_x_max

DEFAULT_BINS = 64
N_BOOT = 200


@dataclass(frozen=True)
class WorkloadHistogram:
    atom0: float
    x_max: float
    masses: np.ndarray = field(repr=False)
    overflow: float
    n: int

    @property
    def n_bins(self) -> int:
        return self.masses.size

    @property
    def edges(self) -> np.ndarray:
        return np.linspace(0.0, self.x_max, self.n_bins + 1)

    def cells(self) -> np.ndarray:
        """Atom, bins and overflow as one probability vector."""
        return np.concatenate([[self.atom0], self.masses, [self.overflow]])


def _bin_index(samples, x_max, n_bins):
    """Cell index per sample: 0 = atom, 1..n_bins = bins, n_bins+1 = overflow."""
    s = np.asarray(samples, dtype=float)
    width = x_max / n_bins
    idx = np.ceil(s / width).astype(np.int64)
    idx = np.clip(idx, 1, n_bins)
    idx[s == 0.0] = 0
    idx[s > x_max] = n_bins + 1
    return idx


def histogram_from_samples(samples, x_max: float, n_bins: int = DEFAULT_BINS) -> WorkloadHistogram:
    s = np.asarray(samples, dtype=float)
    n = s.size
    counts = np.bincount(_bin_index(s, x_max, n_bins), minlength=n_bins + 2)
    p = counts / n
    return WorkloadHistogram(float(p[0]), float(x_max), p[1:-1].copy(), float(p[-1]), n)


def _default_x_max(kind, d, *starts):
    if kind == ModelKind.TRUNCATED_SERVICE:
        return 1.0
    return max(default_x_max(d), *starts)


def transient_samples(kind, x, t, lam, d, n, seed, kernels=None) -> np.ndarray:
    kind = as_model(kind)
    _check_start(kind, x)
    if t < 0:
        raise DomainError("t must be >= 0")
    if not lam > 0:
        raise DomainError("lam must be positive")
    kernels = kernels or _backend.get()
    return kernels.workload_batch(int(kind), float(x), float(t), float(lam), d, int(seed), 0, int(n))


def transient_histogram(kind, x: float, t: float, lam: float, d: ServiceDistribution, n: int, seed: int,
                        bins: int = DEFAULT_BINS, x_max: float | None = None, kernels=None) -> WorkloadHistogram:
    """Binned estimate of ``P_x(V_t in .)`` from ``n`` replicas."""
    if n < 1000:
        raise DomainError("need at least 1000 replicas")
    if bins < 16:
        raise DomainError("need at least 16 bins")
    kind = as_model(kind)
    if x_max is None:
        x_max = _default_x_max(kind, d, x)
    return histogram_from_samples(transient_samples(kind, x, t, lam, d, n, seed, kernels), x_max, bins)


def _reference_cells(inv: InvariantDistribution, h: WorkloadHistogram):
    masses = inv.bin_masses(h.edges)
    inside = float(inv._cum(min(h.x_max, inv.x_max)))
    beyond = float(inv._cum(inv.x_max)) - inside + inv.tail
    return np.concatenate([[inv.atom0], masses, [max(beyond, 0.0)]])


def tv_between(a: WorkloadHistogram, b) -> float:
    """Binned TV between a histogram and another histogram or an invariant law."""
    if isinstance(b, InvariantDistribution):
        cb = _reference_cells(b, a)
    else:
        if a.n_bins != b.n_bins or a.x_max != b.x_max:
            raise BinningMismatchError("histograms use different bins")
        cb = b.cells()
    return float(min(1.0, 0.5 * np.abs(a.cells() - cb).sum()))


def invariant_tv(a: InvariantDistribution, b: InvariantDistribution, x_max: float,
                 n_bins: int = DEFAULT_BINS) -> float:
    """Binned TV between two invariant laws on a common grid of ``(0, x_max]``."""
    grid = WorkloadHistogram(0.0, float(x_max), np.zeros(n_bins), 0.0, 0)
    return float(0.5 * np.abs(_reference_cells(a, grid) - _reference_cells(b, grid)).sum())


def paired_tv(sa, sb, x_max, n_bins=DEFAULT_BINS, seed=0, n_boot=N_BOOT):
    """Binned TV of two paired sample sets and its bootstrap standard error.

    Replica pairs are resampled jointly, so the error reflects the common
    random numbers.
    """
    ia = _bin_index(sa, x_max, n_bins)
    ib = _bin_index(sb, x_max, n_bins)
    n = ia.size
    k = n_bins + 2
    tv = 0.5 * np.abs(np.bincount(ia, minlength=k) - np.bincount(ib, minlength=k)).sum() / n
    if n_boot <= 0 or np.array_equal(ia, ib):
        return float(tv), 0.0
    rng = np.random.default_rng([seed & 0xFFFFFFFFFFFFFFFF, 0xB007])
    diff = ia * k + ib
    reps = np.empty(n_boot)
    for r in range(n_boot):
        joint = np.bincount(diff[rng.integers(0, n, n)], minlength=k * k).reshape(k, k)
        reps[r] = 0.5 * np.abs(joint.sum(axis=1) - joint.sum(axis=0)).sum() / n
    return float(tv), float(reps.std(ddof=1))


@dataclass(frozen=True)
class DecayPoint:
    t: float
    d_hat: float
    sigma: float

    @property
    def ci(self) -> float:
        return 3.0 * self.sigma


@dataclass(frozen=True)
class DecayCurve:
    points: tuple[DecayPoint, ...]
    n: int
    rate: float | None = None
    window: tuple[float, float] | None = None
    degenerate: bool = False

    def at(self, t: float) -> DecayPoint:
        for p in self.points:
            if p.t == t:
                return p
        raise DomainError(f"curve has no point at t={t}")

    def to_csv(self, fh=None) -> str:
        buf = io.StringIO()
        buf.write("t,d_hat,ci\n")
        for p in self.points:
            buf.write(f"{p.t:.17g},{p.d_hat:.17g},{p.ci:.17g}\n")
        text = buf.getvalue()
        if fh is not None:
            fh.write(text)
        return text


def fit_rate(points, n: int, window=None) -> float | None:
    """Least-squares decay rate ``-d log d_hat / dt`` over ``window``.

    Points with ``d_hat < 5/n`` sit below Monte Carlo resolution and are
    dropped; ``None`` if fewer than two remain.
    """
    floor = 5.0 / n
    lo, hi = window if window is not None else (-math.inf, math.inf)
    use = [(p.t, p.d_hat) for p in points if lo <= p.t <= hi and p.d_hat >= floor]
    if len(use) < 2:
        return None
    t = np.array([u[0] for u in use])
    y = np.log([u[1] for u in use])
    slope = np.polyfit(t, y, 1)[0]
    return float(-slope)


def dbar_curve(kind, x: float, y: float, lam: float, d: ServiceDistribution, t_values, n: int, seed: int,
               bins: int = DEFAULT_BINS, window=None, x_max: float | None = None, n_boot: int = N_BOOT,
               kernels=None) -> DecayCurve:
    """TV between the laws from ``x`` and ``y`` at each ``t``, with a fitted exponential rate."""
    kind = as_model(kind)
    if n < 1000 or bins < 16:
        raise DomainError("need n >= 1000 and bins >= 16")
    if x_max is None:
        x_max = _default_x_max(kind, d, x, y)
    points = []
    for t in t_values:
        sa = transient_samples(kind, x, t, lam, d, n, seed, kernels)
        sb = sa if x == y else transient_samples(kind, y, t, lam, d, n, seed, kernels)
        tv, sigma = paired_tv(sa, sb, x_max, bins, seed, n_boot)
        points.append(DecayPoint(float(t), tv, sigma))
    if x == y:
        return DecayCurve(tuple(points), n, None, window, degenerate=True)
    rate = fit_rate(points, n, window)
    return DecayCurve(tuple(points), n, rate, window, degenerate=rate is None)


def tv_to_invariant(kind, x, t_values, lam, d, inv, n, seed, bins=DEFAULT_BINS, x_max=None,
                    n_boot=N_BOOT, kernels=None) -> list[DecayPoint]:
    """Binned TV between ``P_x(V_t in .)`` and ``inv`` at each ``t`` (bootstrap sigma)."""
    kind = as_model(kind)
    if x_max is None:
        x_max = _default_x_max(kind, d, x)
    rng = np.random.default_rng([seed & 0xFFFFFFFFFFFFFFFF, 0xB008])
    out = []
    for t in t_values:
        s = transient_samples(kind, x, t, lam, d, n, seed, kernels)
        h = histogram_from_samples(s, x_max, bins)
        ref = _reference_cells(inv, h)
        tv = tv_between(h, inv)
        sigma = 0.0
        if n_boot > 0:
            idx = _bin_index(s, x_max, bins)
            reps = [0.5 * np.abs(np.bincount(idx[rng.integers(0, n, n)], minlength=bins + 2) / n - ref).sum()
                    for _ in range(n_boot)]
            sigma = float(np.std(reps, ddof=1))
        out.append(DecayPoint(float(t), tv, sigma))
    return out


def submultiplicativity_check(curve: DecayCurve, pairs) -> list[dict]:
    """Check ``d(s+t) <= d(s) d(t)`` up to three combined standard errors per pair."""
    out = []
    for s, t in pairs:
        ps, pt, pst = curve.at(s), curve.at(t), curve.at(s + t)
        # the factors come from the same replicas, so their errors add linearly
        prod_sigma = pt.d_hat * ps.sigma + ps.d_hat * pt.sigma
        tol = 3.0 * math.hypot(pst.sigma, prod_sigma)
        rhs = ps.d_hat * pt.d_hat
        out.append({"s": s, "t": t, "lhs": pst.d_hat, "rhs": rhs, "tolerance": tol,
                    "margin": rhs + tol - pst.d_hat, "holds": pst.d_hat <= rhs + tol})
    return out


def collapse_demo(eps_values, t: float, x: float, y: float, n: int, seed: int,
                  bins: int = DEFAULT_BINS, n_boot: int = N_BOOT, kernels=None) -> list[tuple[float, float, float]]:
    """TV between starts ``x`` and ``y`` at time ``t`` for point-mass service ``eps``
    and zero-drift arrival rate ``1/eps``.

    Returns ``(eps, d_hat, sigma)`` per ``eps``. As ``eps`` shrinks the path
    behaves like a driftless walk with small steps and forgets its start ever
    more slowly, so ``d_hat`` should grow toward 1.
    """
    eps_values = [float(e) for e in eps_values]
    if any(b >= a for a, b in zip(eps_values, eps_values[1:])):
        raise DomainError("eps values must be strictly decreasing")
    e_max = max(eps_values)
    if not (x >= 0.75 + e_max and y <= 0.25 - e_max) and x != y:
        raise DomainError("starts must satisfy x >= 3/4 + eps and y <= 1/4 - eps")
    out = []
    for eps in eps_values:
        lam = zero_drift_rate(eps)
        d = PointMass(eps)
        sa = transient_samples(1, x, t, lam, d, n, seed, kernels)
        sb = sa if x == y else transient_samples(1, y, t, lam, d, n, seed, kernels)
        tv, sigma = paired_tv(sa, sb, 1.0, bins, seed, n_boot)
        out.append((eps, tv, sigma))
    return out


@dataclass(frozen=True)
class RateFitReport:
    curve: DecayCurve
    alpha_max: float
    fit_tol: float
    passed: bool | None

    def to_json(self) -> dict:
        return {"rate": self.curve.rate, "window": list(self.curve.window) if self.curve.window else None,
                "alpha_max": self.alpha_max, "fit_tol": self.fit_tol, "passed": self.passed,
                "degenerate": self.curve.degenerate}


def model2_rate_fit(lam: float, d: ServiceDistribution, b: float, x: float, y: float, t_values, n: int, seed: int,
                    window=None, bins: int = DEFAULT_BINS, fit_tol: float = 0.05, n_boot: int = N_BOOT,
                    kernels=None) -> RateFitReport:
    """Fit the model-2 TV decay rate and compare it with the compact-support lower bound."""
    if d.support_max > b:
        raise DomainError(f"service law exceeds declared support bound b={b}")
    for s in (x, y):
        if s > b + 1:
            raise DomainError("starts must lie in [0, b + 1]")
    x_max = b + 1.0
    probe = transient_samples(2, max(x, y), max(t_values), lam, d, 1000, seed, kernels)
    if probe.max() > x_max:
        raise DomainError("simulated workload exceeded b + 1; declared b is violated")
    curve = dbar_curve(2, x, y, lam, d, t_values, n, seed, bins, window, x_max, n_boot, kernels)
    alpha = compact_support_rate(lam, b).value
    passed = None if curve.rate is None else curve.rate >= alpha - fit_tol
    return RateFitReport(curve, alpha, fit_tol, passed)
