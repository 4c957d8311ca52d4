"""Invariant laws by convolution-series quadrature.

Both models share the series ``sum_{i>=1} lam**i * Gbar^{*i}(x)`` where
``Gbar`` is the survival function and ``*`` is the convolution
``(g * f)(x) = int_0^x g(x - y) f(y) dy``. Everything is tabulated on a
uniform grid and integrated with the composite trapezoid rule.

The series is truncated with the bound ``Gbar^{*i}(x) <= x**(i-1)/(i-1)!``,
which makes the remainder an exponential-series tail.
"""
from __future__ import annotations

import io
import math
from dataclasses import dataclass, field

import numpy as np

from .dist import ServiceDistribution
from .errors import DomainError, GridMismatchError, TailDeficitError, TruncationError


@dataclass(frozen=True)
class GridFunction:
    """Real function tabulated at ``x0 + k*h``."""

    x0: float
    h: float
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if not self.h > 0:
            raise DomainError(f"grid step must be positive, got {self.h}")
        if vals.ndim != 1 or vals.size == 0:
            raise DomainError("grid values must be a non-empty 1-d array")
        object.__setattr__(self, "values", vals)

    @property
    def x(self) -> np.ndarray:
        return self.x0 + self.h * np.arange(self.values.size)

    @property
    def x_end(self) -> float:
        return self.x0 + self.h * (self.values.size - 1)

    def integral(self) -> float:
        """Composite trapezoid integral over the whole grid."""
        v = self.values
        if v.size == 1:
            return 0.0
        return float(self.h * (v.sum() - 0.5 * (v[0] + v[-1])))

    def cumulative(self) -> np.ndarray:
        """Trapezoid integral from ``x0`` to each node."""
        v = self.values
        out = np.zeros_like(v)
        out[1:] = np.cumsum(0.5 * self.h * (v[1:] + v[:-1]))
        return out

    def __call__(self, x):
        """Linear interpolation (constant extrapolation outside the grid)."""
        return np.interp(x, self.x, self.values)


@dataclass(frozen=True)
class SeriesConfig:
    h: float = 1.0 / 512
    tol: float = 1e-10
    i_max: int = 200

    def __post_init__(self):
        if not self.h > 0:
            raise DomainError("h must be positive")
        if not self.tol > 0:
            raise DomainError("tol must be positive")
        if int(self.i_max) < 1:
            raise DomainError("i_max must be >= 1")


@dataclass(frozen=True)
class InvariantDistribution:
    """Atom at 0 plus a density on ``(0, x_max]``.

    ``piecewise`` says how to read the density between grid nodes:
    ``"linear"`` (values at nodes, trapezoid rule) or ``"constant"``
    (``values[k]`` is the density on the k-th cell, as for histogram-based
    estimates). ``tail`` is mass beyond ``x_max`` that the grid does not carry.
    """

    atom0: float
    density: GridFunction
    x_max: float
    piecewise: str = "linear"
    tail: float = 0.0
    order: int | None = None
    remainder: float | None = None

    def __post_init__(self):
        if not 0 < self.atom0 <= 1:
            raise DomainError(f"atom0 must lie in (0, 1], got {self.atom0}")
        if self.piecewise not in ("linear", "constant"):
            raise DomainError(f"unknown piecewise mode {self.piecewise!r}")

    def _cum(self, x):
        """Integral of the density from 0 to ``x`` (vectorised)."""
        x = np.clip(np.asarray(x, dtype=float), 0.0, self.x_max)
        g = self.density
        v = g.values
        h = g.h
        if self.piecewise == "constant":
            full = np.concatenate([[0.0], np.cumsum(v * h)])
            k = np.minimum((x / h).astype(int), v.size - 1)
            return full[k] + (x - k * h) * v[k]
        nodes = g.cumulative()
        k = np.minimum(((x - g.x0) / h).astype(int), v.size - 2)
        k = np.maximum(k, 0)
        dx = x - (g.x0 + k * h)
        vx = v[k] + (v[k + 1] - v[k]) * dx / h
        return nodes[k] + 0.5 * dx * (v[k] + vx)

    def total_mass(self) -> float:
        return self.atom0 + float(self._cum(self.x_max)) + self.tail

    def cdf(self, x: float) -> float:
        """``P(V <= x)`` for ``0 <= x <= x_max``."""
        if not 0 <= x <= self.x_max:
            raise DomainError(f"x must lie in [0, {self.x_max}], got {x}")
        return self.atom0 + float(self._cum(x))

    def bin_masses(self, edges) -> np.ndarray:
        """Mass of the density on each ``(edges[k], edges[k+1]]``."""
        return np.diff(self._cum(np.asarray(edges, dtype=float)))

    def to_csv(self, fh=None) -> str:
        """Write ``# atom0=...`` followed by ``x,density`` rows."""
        buf = io.StringIO()
        buf.write(f"# atom0={self.atom0:.17g}\n")
        buf.write("x,density\n")
        g = self.density
        xs = g.x if self.piecewise == "linear" else g.x0 + g.h * (np.arange(g.values.size) + 0.5)
        for xv, dv in zip(xs, g.values):
            buf.write(f"{xv:.17g},{dv:.17g}\n")
        text = buf.getvalue()
        if fh is not None:
            fh.write(text)
        return text


def convolve_survival(g: GridFunction, f: GridFunction) -> GridFunction:
    """Trapezoid-rule ``(g * f)(x) = int_0^x g(x - y) f(y) dy`` on the common grid."""
    if g.x0 != 0 or f.x0 != 0:
        raise GridMismatchError("convolution grids must start at 0")
    if g.h != f.h or g.values.size != f.values.size:
        raise GridMismatchError("convolution grids must share step and length")
    return GridFunction(0.0, g.h, _conv(g.values, f.values, g.h))


def _conv(g, f, h):
    n = g.size
    full = np.convolve(g, f)[:n]
    return h * (full - 0.5 * (g * f[0] + g[0] * f))


def remainder_bound(lam: float, x_max: float, order: int) -> float:
    """Bound on ``sum_{i>order} lam**i Gbar^{*i}(x)`` for ``x <= x_max``.

    Equals ``lam * sum_{k>=order} (lam*x_max)**k / k!``, bounded by its first
    term over ``1 - lam*x_max/(order+1)``; ``inf`` until that ratio drops below 1.
    """
    z = lam * x_max
    if order + 1 <= z:
        return math.inf
    if z == 0:
        return lam if order == 0 else 0.0
    log_first = math.log(lam) + order * math.log(z) - math.lgamma(order + 1)
    return math.exp(log_first) / (1.0 - z / (order + 1))


def truncation_order(lam: float, x_max: float, cfg: SeriesConfig) -> tuple[int, float]:
    """Smallest order whose remainder bound is below ``cfg.tol``."""
    r = math.inf
    for order in range(1, int(cfg.i_max) + 1):
        r = remainder_bound(lam, x_max, order)
        if r < cfg.tol:
            return order, r
    raise TruncationError(
        f"series remainder {r:.3g} still above tol {cfg.tol:g} at i_max={cfg.i_max}",
        remainder=r, order=int(cfg.i_max))


def _grid(x_max, h):
    n = max(1, int(round(x_max / h)))
    return n, x_max / n


def _series(d, lam, cfg, x_max):
    n, hh = _grid(x_max, cfg.h)
    order, rem = truncation_order(lam, x_max, cfg)
    gbar = np.asarray(d.survival(hh * np.arange(n + 1)), dtype=float)
    term = lam * gbar
    total = term.copy()
    for _ in range(order - 1):
        term = lam * _conv(gbar, term, hh)
        total += term
    return GridFunction(0.0, hh, total), order, rem


def survival_series(d: ServiceDistribution, lam: float, cfg: SeriesConfig, x_max: float) -> GridFunction:
    """``sum_i lam**i Gbar^{*i}`` tabulated on ``[0, x_max]``."""
    if not lam > 0:
        raise DomainError("lam must be positive")
    if not x_max > 0:
        raise DomainError("x_max must be positive")
    return _series(d, lam, cfg, x_max)[0]


def model1_invariant(d: ServiceDistribution, lam: float, cfg: SeriesConfig | None = None) -> InvariantDistribution:
    """Invariant law of the truncated-service workload on ``[0, 1]``."""
    cfg = cfg or SeriesConfig()
    if not lam > 0:
        raise DomainError("lam must be positive")
    series, order, rem = _series(d, lam, cfg, 1.0)
    atom0 = 1.0 / (1.0 + series.integral())
    density = GridFunction(0.0, series.h, atom0 * series.values)
    return InvariantDistribution(atom0, density, 1.0, order=order, remainder=atom0 * rem)


def model1_cdf(inv: InvariantDistribution, x: float) -> float:
    return inv.cdf(x)


def _auto_x_max(d, bound_at, tol):
    if math.isfinite(d.support_max):
        return 1.0 + d.support_max
    c = 1.0
    while bound_at(c) >= tol:
        c *= 2.0
    lo = c / 2.0
    for _ in range(40):
        mid = 0.5 * (lo + c)
        if bound_at(mid) < tol:
            c = mid
        else:
            lo = mid
    return 1.0 + c


def model2_invariant(d: ServiceDistribution, lam: float, cfg: SeriesConfig | None = None,
                     x_max: float | None = None) -> InvariantDistribution:
    """Invariant law of the bounded-waiting workload.

    On ``(0, 1]`` the density is ``pi0 * series(x)``; above 1 it is
    ``lam * pi0 * (Gbar(x) + int_0^1 Gbar(x - y) series(y) dy)``.
    With ``x_max=None`` the grid is extended until the mass beyond it is
    below ``cfg.tol``.
    """
    cfg = cfg or SeriesConfig()
    if not lam > 0:
        raise DomainError("lam must be positive")
    n1, hh = _grid(1.0, cfg.h)
    series, order, rem = _series(d, lam, SeriesConfig(hh, cfg.tol, cfg.i_max), 1.0)
    i1 = series.integral()
    pi0 = 1.0 / (1.0 + lam * d.mean * (1.0 + i1))

    # density above x_max is at most lam*pi0*(1 + i1)*Gbar(x - 1)
    def bound_at(c):
        return lam * pi0 * (1.0 + i1) * d.excess_mean(c)

    if x_max is None:
        x_max = _auto_x_max(d, bound_at, cfg.tol)
    if not x_max > 1:
        raise DomainError("x_max must exceed 1")
    deficit = bound_at(x_max - 1.0)
    if deficit > cfg.tol:
        raise TailDeficitError(
            f"mass beyond x_max={x_max:g} may reach {deficit:.3g} > tol {cfg.tol:g}", deficit)
    n = int(math.ceil(x_max / hh - 1e-9))
    gbar = np.asarray(d.survival(hh * np.arange(n + 1)), dtype=float)
    w = series.values.copy()
    w[0] *= 0.5
    w[-1] *= 0.5
    upper = lam * (gbar + hh * np.convolve(gbar, w)[: n + 1])
    dens = np.empty(n + 1)
    dens[: n1 + 1] = series.values
    dens[n1 + 1:] = upper[n1 + 1:]
    density = GridFunction(0.0, hh, pi0 * dens)
    return InvariantDistribution(pi0, density, n * hh, order=order, remainder=pi0 * rem)
