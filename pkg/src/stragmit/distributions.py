"""Task execution-time distributions and their order-statistic moments.

Five variants: Exp, SExp (shifted exponential), Pareto, TruncatedPareto and
Empirical. Sampling is inverse-CDF throughout so that a seeded
``numpy.random.Generator`` reproduces runs bit-for-bit. Values are immutable
after construction and safe to share across threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Union

import numpy as np

from .errors import DomainError, InfiniteMomentError
from .special_functions import gamma_ratio, gen_harmonic2, harmonic

__all__ = [
    "Exp",
    "SExp",
    "Pareto",
    "TruncatedPareto",
    "Empirical",
    "TaskDist",
    "OrderStatSpec",
    "sample",
    "tail",
    "dist_mean",
    "order_stat_mean",
    "exp_joint_moment",
    "pareto_joint_moment",
    "empirical_from_samples",
    "empirical_from_file",
]


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise DomainError(msg)


@dataclass(frozen=True)
class Exp:
    """Exponential with rate mu."""

    mu: float

    def __post_init__(self):
        _require(math.isfinite(self.mu) and self.mu > 0, f"Exp requires mu > 0, got {self.mu}")

    def sample_array(self, rng: np.random.Generator, size) -> np.ndarray:
        u = rng.random(size)
        return -np.log1p(-u) / self.mu

    def tail(self, t: float) -> float:
        _require(t >= 0, f"tail requires t >= 0, got {t}")
        return math.exp(-self.mu * t)

    def mean(self) -> float:
        return 1.0 / self.mu


@dataclass(frozen=True)
class SExp:
    """Shifted exponential: minimum value s plus an Exp(mu) tail."""

    s: float
    mu: float

    def __post_init__(self):
        _require(math.isfinite(self.s) and self.s > 0, f"SExp requires s > 0, got {self.s}")
        _require(math.isfinite(self.mu) and self.mu > 0, f"SExp requires mu > 0, got {self.mu}")

    def sample_array(self, rng: np.random.Generator, size) -> np.ndarray:
        u = rng.random(size)
        return self.s - np.log1p(-u) / self.mu

    def tail(self, t: float) -> float:
        _require(t >= 0, f"tail requires t >= 0, got {t}")
        if t <= self.s:
            return 1.0
        return math.exp(-self.mu * (t - self.s))

    def mean(self) -> float:
        return self.s + 1.0 / self.mu


@dataclass(frozen=True)
class Pareto:
    """Pareto with minimum value s and tail index alpha."""

    s: float
    alpha: float

    def __post_init__(self):
        _require(math.isfinite(self.s) and self.s > 0, f"Pareto requires s > 0, got {self.s}")
        _require(
            math.isfinite(self.alpha) and self.alpha > 0,
            f"Pareto requires alpha > 0, got {self.alpha}",
        )

    def sample_array(self, rng: np.random.Generator, size) -> np.ndarray:
        u = rng.random(size)
        return self.s * (1.0 - u) ** (-1.0 / self.alpha)

    def tail(self, t: float) -> float:
        _require(t >= 0, f"tail requires t >= 0, got {t}")
        if t <= self.s:
            return 1.0
        return (self.s / t) ** self.alpha

    def mean(self) -> float:
        if self.alpha <= 1:
            raise InfiniteMomentError(f"Pareto mean requires alpha > 1, got {self.alpha}")
        return self.s * self.alpha / (self.alpha - 1.0)


@dataclass(frozen=True)
class TruncatedPareto:
    """Pareto on [s, u] renormalized to the truncated support."""

    s: float
    u: float
    alpha: float

    def __post_init__(self):
        _require(math.isfinite(self.s) and self.s > 0, f"TruncatedPareto requires s > 0, got {self.s}")
        _require(self.u > self.s, f"TruncatedPareto requires u > s, got u={self.u}, s={self.s}")
        _require(
            math.isfinite(self.alpha) and self.alpha > 0,
            f"TruncatedPareto requires alpha > 0, got {self.alpha}",
        )

    @property
    def _mass(self) -> float:
        # Pr{s <= Pareto(s, alpha) <= u}
        return 1.0 - (self.s / self.u) ** self.alpha

    def sample_array(self, rng: np.random.Generator, size) -> np.ndarray:
        u = rng.random(size)
        return self.s * (1.0 - u * self._mass) ** (-1.0 / self.alpha)

    def tail(self, t: float) -> float:
        _require(t >= 0, f"tail requires t >= 0, got {t}")
        if t <= self.s:
            return 1.0
        if t >= self.u:
            return 0.0
        return ((self.s / t) ** self.alpha - (self.s / self.u) ** self.alpha) / self._mass

    def mean(self) -> float:
        s, u, a = self.s, self.u, self.alpha
        if a == 1.0:
            return s * math.log(u / s) / self._mass
        return (a / (a - 1.0)) * s * (1.0 - (s / u) ** (a - 1.0)) / self._mass


@dataclass(frozen=True)
class Empirical:
    """Step distribution over observed execution times (sorted, no binning)."""

    samples: tuple = field(repr=False)

    def __post_init__(self):
        _require(len(self.samples) > 0, "Empirical requires at least one sample")
        arr = np.asarray(self.samples, dtype=float)
        _require(bool(np.all(np.isfinite(arr)) and np.all(arr > 0)), "Empirical samples must be positive")
        _require(bool(np.all(np.diff(arr) >= 0)), "Empirical samples must be sorted ascending")
        object.__setattr__(self, "_arr", arr)

    def sample_array(self, rng: np.random.Generator, size) -> np.ndarray:
        idx = rng.integers(0, len(self._arr), size=size)
        return self._arr[idx]

    def tail(self, t: float) -> float:
        _require(t >= 0, f"tail requires t >= 0, got {t}")
        # fraction of samples strictly greater than t
        pos = np.searchsorted(self._arr, t, side="right")
        return float(len(self._arr) - pos) / len(self._arr)

    def mean(self) -> float:
        return float(self._arr.mean())


TaskDist = Union[Exp, SExp, Pareto, TruncatedPareto, Empirical]


@dataclass(frozen=True)
class OrderStatSpec:
    """The i-th smallest of n i.i.d. draws."""

    n: int
    i: int

    def __post_init__(self):
        _require(self.n >= 1, f"OrderStatSpec requires n >= 1, got {self.n}")
        _require(1 <= self.i <= self.n, f"OrderStatSpec requires 1 <= i <= n, got i={self.i}, n={self.n}")


def sample(dist: TaskDist, rng: np.random.Generator) -> float:
    """One draw from ``dist`` via inverse CDF on the given stream."""
    return float(dist.sample_array(rng, None))


def tail(dist: TaskDist, t: float) -> float:
    """Pr{X > t}."""
    return dist.tail(t)


def dist_mean(dist: TaskDist) -> float:
    """Analytic mean (sample mean for Empirical)."""
    return dist.mean()


def order_stat_mean(dist: TaskDist, spec: OrderStatSpec) -> float:
    """E[X_{n:i}] for Exp or Pareto task times."""
    n, i = spec.n, spec.i
    if isinstance(dist, Exp):
        return (harmonic(n) - harmonic(n - i)) / dist.mu
    if isinstance(dist, Pareto):
        a = dist.alpha
        if a * (n - i + 1) <= 1:
            raise InfiniteMomentError(
                f"E[X_{{{n}:{i}}}] requires alpha > 1/(n-i+1); got alpha={a}"
            )
        return dist.s * gamma_ratio(n + 1, n - i + 1) * gamma_ratio(n - i + 1 - 1 / a, n + 1 - 1 / a)
    raise DomainError(f"order_stat_mean supports Exp and Pareto, got {type(dist).__name__}")


def exp_joint_moment(n: int, i: int, j: int, mu: float) -> float:
    """E[X_{n:i} X_{n:j}] for Exp(mu), j >= i."""
    _require(1 <= i <= j <= n, f"need 1 <= i <= j <= n, got i={i}, j={j}, n={n}")
    _require(mu > 0, f"need mu > 0, got {mu}")
    h = harmonic
    value = (
        gen_harmonic2(n)
        - (gen_harmonic2(n - i) if n > i else 0.0)
        + (h(n) - h(n - i)) * (h(n) - h(n - j))
    )
    return value / mu**2


def pareto_joint_moment(n: int, i: int, j: int, s: float, alpha: float) -> float:
    """E[X_{n:i} X_{n:j}] for Pareto(s, alpha), j >= i.

    Exists when alpha > max(2/(n-i+1), 1/(n-j+1)).
    """
    _require(1 <= i <= j <= n, f"need 1 <= i <= j <= n, got i={i}, j={j}, n={n}")
    _require(s > 0 and alpha > 0, f"need s > 0 and alpha > 0, got s={s}, alpha={alpha}")
    if alpha <= max(2.0 / (n - i + 1), 1.0 / (n - j + 1)):
        raise InfiniteMomentError(
            f"E[X_{{{n}:{i}}} X_{{{n}:{j}}}] requires alpha > max(2/(n-i+1), 1/(n-j+1)); got {alpha}"
        )
    b = 1.0 / alpha
    return (
        s**2
        * gamma_ratio(n + 1, n + 1 - 2 * b)
        * gamma_ratio(n - i + 1 - 2 * b, n - i + 1 - b)
        * gamma_ratio(n - j + 1 - b, n - j + 1)
    )


def empirical_from_samples(samples) -> Empirical:
    """Build the Empirical variant from raw (unsorted) positive times."""
    arr = np.asarray(list(samples), dtype=float)
    if arr.size == 0:
        raise DomainError("empirical_from_samples requires a nonempty sequence")
    if not (np.all(np.isfinite(arr)) and np.all(arr > 0)):
        raise DomainError("empirical_from_samples requires positive finite times")
    return Empirical(tuple(np.sort(arr)))


def empirical_from_file(path) -> Empirical:
    """Load an Empirical distribution from a one-value-per-line text file."""
    values = []
    with open(Path(path)) as fh:
        for line_no, line in enumerate(fh, 1):
            text = line.strip()
            if not text:
                continue
            try:
                values.append(float(text))
            except ValueError as exc:
                raise DomainError(f"{path}:{line_no}: not a number: {text!r}") from exc
    return empirical_from_samples(values)
