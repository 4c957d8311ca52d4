"""Closed-form convergence bounds and the scalar root-finding they need."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from .dist import ServiceDistribution
from .errors import BracketError, DomainError

TV_BOUND = "TV-upper-bound-at-t"
RHO_BOUND = "rho-upper-bound"
GAP_BOUND = "gap-lower-bound"
RATE_BOUND = "rate-lower-bound"
ROOT = "root"


@dataclass(frozen=True)
class BoundReport:
    name: str
    params: dict
    value: float
    meaning: str
    note: str = ""
    related: tuple["BoundReport", ...] = field(default=())

    def to_json(self) -> dict:
        out = {"name": self.name, "params": dict(self.params), "value": self.value, "meaning": self.meaning}
        if self.note:
            out["note"] = self.note
        return out

    def flatten(self) -> list["BoundReport"]:
        out = [self]
        for r in self.related:
            out.extend(r.flatten())
        return out


def bisect(f, lo: float, hi: float, xtol: float = 1e-12) -> float:
    """Root of ``f`` on ``[lo, hi]`` where ``f(lo)`` and ``f(hi)`` differ in sign."""
    flo, fhi = f(lo), f(hi)
    if flo == 0:
        return lo
    if fhi == 0:
        return hi
    if (flo < 0) == (fhi < 0):
        raise BracketError(f"no sign change on [{lo}, {hi}]")
    while hi - lo > xtol:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        fm = f(mid)
        if fm == 0:
            return mid
        if (fm < 0) == (flo < 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def arrival_coupling_bound(lam: float, t: float) -> BoundReport:
    """Model-1 TV bound ``(1 - exp(-lam))**t`` valid for ``t >= 1``."""
    if not lam > 0:
        raise DomainError("lam must be positive")
    if t < 1:
        raise DomainError("bound holds only for t >= 1")
    return BoundReport("arrival_coupling_tv", {"lam": lam, "t": t}, (-math.expm1(-lam)) ** t, TV_BOUND)


def _check_p_beta(p, beta):
    if not 0 < p <= 1:
        raise DomainError(f"p must lie in (0, 1], got {p}")
    if not 0 < beta <= 1:
        raise DomainError(f"beta must lie in (0, 1], got {beta}")


def _large_jump_rate(lam, p, beta):
    """``(lam p)**(1/beta) * exp(1 - lam p)`` for ``lam p > 1``, else 1."""
    z = lam * p
    if z <= 1:
        return 1.0
    return math.exp(math.log(z) / beta + 1.0 - z)


def _large_deviation_rate(lam, p, beta):
    """``exp(1/beta - lam p) * (lam p beta)**(1/beta)`` for ``lam p beta > 1``, else 1."""
    z = lam * p
    if z * beta <= 1:
        return 1.0
    return math.exp(1.0 / beta - z + math.log(z * beta) / beta)


def critical_rate(p: float, beta: float) -> BoundReport:
    """Arrival rate at which the two rho bounds cross.

    Unique root on ``(1/(p beta), inf)`` of
    ``1 - exp(-lam) = (lam p)**(1/beta) * exp(1 - lam p)``; the right side
    falls from at least 1 to 0 there while the left side stays below 1.
    The resulting rho bound ``1 - exp(-lam0)`` holds for every arrival rate
    and every law putting mass at least ``p`` on ``(beta, 1]``.
    """
    _check_p_beta(p, beta)

    def f(lam):
        # log-space comparison keeps small beta from overflowing
        return math.log(-math.expm1(-lam)) - (math.log(lam * p) / beta + 1.0 - lam * p)

    lo = 1.0 / (p * beta)
    hi = 2.0 * lo + 1.0
    while f(hi) <= 0:
        hi *= 2.0
        if hi > 1e300:
            raise BracketError("could not bracket the critical rate")
    lam0 = bisect(f, lo, hi)
    residual = abs(-math.expm1(-lam0) - _large_jump_rate(lam0, p, beta))
    return BoundReport("critical_rate", {"p": p, "beta": beta}, lam0, ROOT,
                       note=f"residual={residual:.3g}",
                       related=(BoundReport("uniform_rho", {"p": p, "beta": beta}, -math.expm1(-lam0), RHO_BOUND),))


def rho_bound(lam: float, p: float, beta: float) -> BoundReport:
    """Upper bound on ``limsup d(t)**(1/t)`` for model 1 with ``G(beta, 1] >= p``.

    ``min(1 - exp(-lam), large-jump rate)``. The related report
    ``rho_bound_ld`` replaces the large-jump rate by the large-deviation
    limit of the Poisson tail, ``exp(1/beta - lam p) (lam p beta)**(1/beta)``;
    the two agree at ``beta = 1`` only.
    """
    if not lam > 0:
        raise DomainError("lam must be positive")
    _check_p_beta(p, beta)
    arrival = -math.expm1(-lam)
    params = {"lam": lam, "p": p, "beta": beta}
    ld = BoundReport("rho_bound_ld", params, min(arrival, _large_deviation_rate(lam, p, beta)), RHO_BOUND,
                     note="large-deviation evaluation of the Poisson tail")
    return BoundReport("rho_bound", params, min(arrival, _large_jump_rate(lam, p, beta)), RHO_BOUND, related=(ld,))


def rho_bound_arguments(lam: float, p: float, beta: float) -> tuple[float, float]:
    """The two arguments of the minimum in ``rho_bound``."""
    _check_p_beta(p, beta)
    return -math.expm1(-lam), _large_jump_rate(lam, p, beta)


def large_jump_gap_rate(p: float) -> float:
    """Root of ``exp(-lam (1-p)) = 1 - exp(-lam p)`` (for ``0 < p < 1``)."""
    if not 0 < p < 1:
        raise DomainError("p must lie in (0, 1)")

    def f(lam):
        return -math.expm1(-lam * p) - math.exp(-lam * (1 - p))

    hi = 1.0
    while f(hi) <= 0:
        hi *= 2.0
    return bisect(f, 0.0, hi)


def large_jump_bounds(lam: float, p: float, t: float) -> list[BoundReport]:
    """Bounds for model 1 when ``P(S >= 1) = p``.

    Returns, in order: ``exp(-lam p t)``; ``(1 - exp(-lam (1-p)))**t``
    (only for ``t >= 1``); the spectral-gap lower bound in min form
    ``min(1 - exp(-lam p), exp(-lam (1-p)))``; the same in max form (both
    gap inequalities hold at once, so the max is also valid and sharper);
    and the uniform-in-``lam`` gap bound ``exp(-lam0 (1-p))``.
    """
    if not lam > 0:
        raise DomainError("lam must be positive")
    if not 0 < p < 1:
        raise DomainError("p must lie in (0, 1)")
    if t < 0:
        raise DomainError("t must be >= 0")
    params = {"lam": lam, "p": p, "t": t}
    a = -math.expm1(-lam * p)
    b = math.exp(-lam * (1 - p))
    out = [BoundReport("large_jump_tv", params, math.exp(-lam * p * t), TV_BOUND)]
    if t >= 1:
        out.append(BoundReport("small_jump_tv", params, (-math.expm1(-lam * (1 - p))) ** t, TV_BOUND))
    gp = {"lam": lam, "p": p}
    out.append(BoundReport("large_jump_gap_min", gp, min(a, b), GAP_BOUND, note="conservative form"))
    out.append(BoundReport("large_jump_gap_max", gp, max(a, b), GAP_BOUND,
                           note="both gap inequalities hold simultaneously, so the max is valid"))
    lam0 = large_jump_gap_rate(p)
    out.append(BoundReport("large_jump_gap_uniform", {"p": p}, math.exp(-lam0 * (1 - p)), GAP_BOUND,
                           note=f"lam0={lam0!r}"))
    return out


def compact_support_rate(lam: float, b: float) -> BoundReport:
    """Model-2 decay-rate lower bound ``|log(1 - exp(-lam))| / (b + 1)`` for support in ``[0, b]``."""
    if not lam > 0:
        raise DomainError("lam must be positive")
    if b < 0:
        raise DomainError("b must be >= 0")
    return BoundReport("compact_support_rate", {"lam": lam, "b": b},
                       abs(math.log(-math.expm1(-lam))) / (b + 1.0), RATE_BOUND)


def step_drift(eps: float, lam: float) -> float:
    """Mean workload change over one step ``min(eps, T1)`` when ``G`` is a point mass at ``eps``.

    Valid away from the boundaries: ``eps (1 - exp(-u)) (1 - 1/u)`` with ``u = lam eps``.
    """
    u = lam * eps
    return eps * -math.expm1(-u) * (1.0 - 1.0 / u)


def zero_drift_rate(eps: float) -> float:
    """Arrival rate making the interior drift vanish for service ``eps``: ``1/eps``."""
    if not 0 < eps < 0.25:
        raise DomainError("eps must lie in (0, 1/4)")
    return 1.0 / eps


def mgf_condition(d: ServiceDistribution) -> BoundReport:
    """Whether ``E[r**S] < inf`` for some ``r > 1`` (geometric ergodicity of model 2)."""
    if math.isfinite(d.support_max):
        r = 2.0
    else:
        # exponential tails: any r with log r below the rate
        r = math.exp(0.5 * getattr(d, "rate", 0.0)) if getattr(d, "rate", 0.0) > 0 else 1.0
    ok = r > 1 and d.mgf_finite(r)
    return BoundReport("mgf_condition", {"kind": d.kind, "r": r}, 1.0 if ok else 0.0, "predicate",
                       note="geometric ergodicity of model 2 certified" if ok else "not certified")
