"""Service-time distributions.

Time is measured in units of the capacity threshold, which is fixed at 1.
A caller with threshold ``K`` divides all times by ``K`` first.

At atoms the two tail functions differ on purpose: ``survival(x)`` is the
strict ``P(S > x)`` and ``tail_mass(x)`` is the weak ``P(S >= x)``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import _core
from .errors import DomainError


def _check_x(x):
    arr = np.asarray(x, dtype=float)
    if np.any(arr < 0) or np.any(np.isnan(arr)):
        raise DomainError(f"argument must be >= 0, got {x!r}")
    return arr


def _ret(arr, x):
    return float(arr) if np.ndim(x) == 0 else arr


class ServiceDistribution:
    """Common interface; concrete kinds are immutable dataclasses below."""

    kind: str = ""

    def survival(self, x):
        """``P(S > x)`` for scalar or array ``x >= 0``."""
        arr = _check_x(x)
        return _ret(self._survival(arr), x)

    def tail_mass(self, threshold):
        """``P(S >= threshold)``."""
        arr = _check_x(threshold)
        return _ret(self._tail(arr), threshold)

    @property
    def mean(self) -> float:
        raise NotImplementedError

    @property
    def support_max(self) -> float:
        """Right end of the support (``inf`` when unbounded)."""
        raise NotImplementedError

    def excess_mean(self, c: float) -> float:
        """``E[(S - c)^+]``, the integral of the survival function over ``[c, inf)``."""
        raise NotImplementedError

    def mgf_finite(self, r: float) -> bool:
        """Whether ``E[r**S]`` is finite."""
        if not r > 1:
            raise DomainError(f"r must exceed 1, got {r}")
        return math.isfinite(self.support_max)

    def kernel_spec(self) -> tuple[int, tuple[float, ...]]:
        """``(code, params)`` understood by the event kernels."""
        raise NotImplementedError

    def inverse(self, u: float) -> float:
        """Service requirement produced by the kernels from uniform ``u``."""
        code, params = self.kernel_spec()
        return _core.service_draw(code, params, u)

    def sample(self, rng: np.random.Generator, size=None):
        """Draw from the law by inverse transform of ``rng.random``."""
        if size is None:
            return self.inverse(rng.random())
        u = rng.random(size)
        return np.array([self.inverse(v) for v in np.ravel(u)]).reshape(np.shape(u))

    def to_json(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class PointMass(ServiceDistribution):
    value: float
    kind = "point_mass"

    def __post_init__(self):
        if not (self.value >= 0 and math.isfinite(self.value)):
            raise DomainError(f"point mass location must be finite and >= 0, got {self.value}")

    def _survival(self, x):
        return (x < self.value).astype(float)

    def _tail(self, x):
        return (x <= self.value).astype(float)

    @property
    def mean(self):
        return float(self.value)

    @property
    def support_max(self):
        return float(self.value)

    def excess_mean(self, c):
        return max(self.value - c, 0.0)

    def kernel_spec(self):
        return _core.POINT, (float(self.value),)

    def to_json(self):
        return {"kind": self.kind, "value": self.value}


@dataclass(frozen=True)
class Exponential(ServiceDistribution):
    rate: float
    kind = "exponential"

    def __post_init__(self):
        if not (self.rate > 0 and math.isfinite(self.rate)):
            raise DomainError(f"rate must be positive, got {self.rate}")

    def _survival(self, x):
        return np.exp(-self.rate * x)

    _tail = _survival

    @property
    def mean(self):
        return 1.0 / self.rate

    @property
    def support_max(self):
        return math.inf

    def excess_mean(self, c):
        return math.exp(-self.rate * c) / self.rate

    def mgf_finite(self, r):
        super().mgf_finite(r)
        return math.log(r) < self.rate

    def kernel_spec(self):
        return _core.EXPONENTIAL, (float(self.rate),)

    def to_json(self):
        return {"kind": self.kind, "rate": self.rate}


@dataclass(frozen=True)
class Uniform(ServiceDistribution):
    low: float
    high: float
    kind = "uniform"

    def __post_init__(self):
        if not (0 <= self.low < self.high < math.inf):
            raise DomainError(f"need 0 <= low < high, got ({self.low}, {self.high})")

    def _survival(self, x):
        return np.clip((self.high - x) / (self.high - self.low), 0.0, 1.0)

    _tail = _survival

    @property
    def mean(self):
        return 0.5 * (self.low + self.high)

    @property
    def support_max(self):
        return float(self.high)

    def excess_mean(self, c):
        a, b = self.low, self.high
        if c <= a:
            return 0.5 * (a + b) - c
        if c >= b:
            return 0.0
        return (b - c) ** 2 / (2 * (b - a))

    def kernel_spec(self):
        return _core.UNIFORM, (float(self.low), float(self.high))

    def to_json(self):
        return {"kind": self.kind, "low": self.low, "high": self.high}


@dataclass(frozen=True)
class FiniteMixture(ServiceDistribution):
    """Discrete law with ``P(S = atoms[i]) = weights[i]``."""

    weights: tuple[float, ...]
    atoms: tuple[float, ...]
    kind = "mixture"

    def __post_init__(self):
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        object.__setattr__(self, "atoms", tuple(float(a) for a in self.atoms))
        if not self.atoms or len(self.atoms) != len(self.weights):
            raise DomainError("mixture needs equally many (>= 1) weights and atoms")
        if any(w < 0 for w in self.weights) or abs(math.fsum(self.weights) - 1.0) > 1e-12:
            raise DomainError("mixture weights must be >= 0 and sum to 1")
        if any(not (a >= 0 and math.isfinite(a)) for a in self.atoms):
            raise DomainError("mixture atoms must be finite and >= 0")

    def _survival(self, x):
        a = np.asarray(self.atoms)
        w = np.asarray(self.weights)
        return np.sum(w * (a > x[..., None]), axis=-1)

    def _tail(self, x):
        a = np.asarray(self.atoms)
        w = np.asarray(self.weights)
        return np.sum(w * (a >= x[..., None]), axis=-1)

    @property
    def mean(self):
        return math.fsum(w * a for w, a in zip(self.weights, self.atoms))

    @property
    def support_max(self):
        return max(a for a, w in zip(self.atoms, self.weights) if w > 0)

    def excess_mean(self, c):
        return math.fsum(w * max(a - c, 0.0) for w, a in zip(self.weights, self.atoms))

    def kernel_spec(self):
        cum = np.cumsum(self.weights).tolist()
        return _core.MIXTURE, (float(len(self.atoms)), *cum, *self.atoms)

    def to_json(self):
        return {"kind": self.kind, "weights": list(self.weights), "atoms": list(self.atoms)}


@dataclass(frozen=True)
class Empirical(ServiceDistribution):
    """Empirical law of a finite sample; stored sorted."""

    samples: tuple[float, ...] = field()
    kind = "empirical"

    def __post_init__(self):
        s = tuple(sorted(float(v) for v in self.samples))
        if not s:
            raise DomainError("empirical law needs at least one sample")
        if s[0] < 0 or not math.isfinite(s[-1]):
            raise DomainError("empirical samples must be finite and >= 0")
        object.__setattr__(self, "samples", s)

    def _survival(self, x):
        s = np.asarray(self.samples)
        return (len(s) - np.searchsorted(s, x, side="right")) / len(s)

    def _tail(self, x):
        s = np.asarray(self.samples)
        return (len(s) - np.searchsorted(s, x, side="left")) / len(s)

    @property
    def mean(self):
        return math.fsum(self.samples) / len(self.samples)

    @property
    def support_max(self):
        return self.samples[-1]

    def excess_mean(self, c):
        return math.fsum(max(v - c, 0.0) for v in self.samples) / len(self.samples)

    def kernel_spec(self):
        return _core.EMPIRICAL, self.samples

    def to_json(self):
        return {"kind": self.kind, "samples": list(self.samples)}


def load_empirical(path) -> Empirical:
    """Read one nonnegative decimal per line; blank lines are skipped."""
    values = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            text = line.strip()
            if not text:
                continue
            try:
                v = float(text)
            except ValueError:
                raise DomainError(f"{path}:{lineno}: not a number: {text!r}") from None
            if not math.isfinite(v) or v < 0:
                raise DomainError(f"{path}:{lineno}: expected a finite value >= 0, got {text!r}")
            values.append(v)
    return Empirical(tuple(values))


_KEYS = {
    "point_mass": {"value"},
    "exponential": {"rate"},
    "uniform": {"low", "high"},
    "mixture": {"weights", "atoms"},
    "empirical": {"samples", "path"},
}


def from_json(obj, base_dir=None) -> ServiceDistribution:
    """Build a distribution from its JSON form (dict or JSON text).

    ``{"kind": "empirical", "path": ...}`` reads a sample file, relative to
    ``base_dir`` when given.
    """
    if isinstance(obj, str):
        obj = json.loads(obj)
    if not isinstance(obj, dict) or "kind" not in obj:
        raise DomainError("distribution must be an object with a 'kind' key")
    kind = obj["kind"]
    if kind not in _KEYS:
        raise DomainError(f"unknown distribution kind {kind!r}")
    extra = set(obj) - _KEYS[kind] - {"kind"}
    if extra:
        raise DomainError(f"unknown keys for {kind}: {sorted(extra)}")
    try:
        if kind == "point_mass":
            return PointMass(float(obj["value"]))
        if kind == "exponential":
            return Exponential(float(obj["rate"]))
        if kind == "uniform":
            return Uniform(float(obj["low"]), float(obj["high"]))
        if kind == "mixture":
            return FiniteMixture(tuple(obj["weights"]), tuple(obj["atoms"]))
        if "path" in obj:
            p = Path(obj["path"])
            if base_dir is not None and not p.is_absolute():
                p = Path(base_dir) / p
            return load_empirical(p)
        return Empirical(tuple(obj["samples"]))
    except (KeyError, TypeError) as exc:
        raise DomainError(f"malformed {kind} distribution: {exc}") from None


def mixture(pairs: Sequence[tuple[float, float]]) -> FiniteMixture:
    """Mixture from ``(weight, atom)`` pairs."""
    return FiniteMixture(tuple(w for w, _ in pairs), tuple(a for _, a in pairs))
