"""Maximum-likelihood fitting of Pareto-family tails to execution times.

The plain Pareto fit uses the Hill-type estimator with the (n-1)/n bias
correction; the truncated fit plugs the sample extremes in for the support
and solves the conditional likelihood score for the tail index by bisection.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .distributions import Pareto, TaskDist, TruncatedPareto
from .errors import ConvergenceError, DegenerateError, DomainError

__all__ = ["FitResult", "fit_pareto", "fit_truncated_pareto", "goodness_report", "GoodnessReport"]

ALPHA_BRACKET = (0.01, 50.0)
ALPHA_XTOL = 1e-8


@dataclass(frozen=True)
class FitResult:
    dist: TaskDist
    log_likelihood: float
    n_samples: int

    def to_dict(self) -> dict:
        d = {"log_likelihood": self.log_likelihood, "n_samples": self.n_samples}
        if isinstance(self.dist, Pareto):
            d["dist"] = {"kind": "pareto", "s": self.dist.s, "alpha": self.dist.alpha}
        elif isinstance(self.dist, TruncatedPareto):
            d["dist"] = {
                "kind": "truncated_pareto",
                "s": self.dist.s,
                "u": self.dist.u,
                "alpha": self.dist.alpha,
            }
        else:
            d["dist"] = {"kind": type(self.dist).__name__.lower()}
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def _clean_samples(samples, min_count: int) -> np.ndarray:
    x = np.asarray(list(samples), dtype=float)
    if x.size < min_count:
        raise DomainError(f"need at least {min_count} samples, got {x.size}")
    if not (np.all(np.isfinite(x)) and np.all(x > 0)):
        raise DomainError("samples must be positive and finite")
    if float(x.min()) == float(x.max()):
        raise DegenerateError("all samples are equal; tail index is unidentifiable")
    return x


def fit_pareto(samples) -> FitResult:
    """Fit Pareto(s, alpha): s-hat = min sample, alpha-hat = (n-1)/sum log(x/s)."""
    x = _clean_samples(samples, 2)
    n = x.size
    s_hat = float(x.min())
    log_ratio_sum = float(np.log(x / s_hat).sum())
    if log_ratio_sum <= 0:
        raise DegenerateError("zero spread above the minimum; cannot fit a tail")
    alpha_hat = (n - 1) / log_ratio_sum
    loglik = n * math.log(alpha_hat) + n * alpha_hat * math.log(s_hat) - (alpha_hat + 1) * float(
        np.log(x).sum()
    )
    return FitResult(Pareto(s_hat, alpha_hat), loglik, n)


def fit_truncated_pareto(samples) -> FitResult:
    """Fit TruncatedPareto(s, u, alpha) with s-hat = min, u-hat = max.

    alpha-hat solves n/a + n * b**a * log(b) / (1 - b**a) = sum log(x/s)
    with b = s/u, found by bisection on (0.01, 50].
    """
    x = _clean_samples(samples, 3)
    n = x.size
    s_hat = float(x.min())
    u_hat = float(x.max())
    log_sum = float(np.log(x / s_hat).sum())
    log_b = math.log(s_hat / u_hat)

    def score(a: float) -> float:
        ba = math.exp(a * log_b)  # (s/u)**a
        return n / a + n * ba * log_b / (1.0 - ba) - log_sum

    lo, hi = ALPHA_BRACKET
    f_lo, f_hi = score(lo), score(hi)
    if f_lo * f_hi > 0:
        raise ConvergenceError(
            f"truncated-Pareto score has no root in ({lo}, {hi}]: "
            f"score({lo})={f_lo:.3g}, score({hi})={f_hi:.3g}"
        )
    alpha_hat = float(optimize.bisect(score, lo, hi, xtol=ALPHA_XTOL))
    ba = math.exp(alpha_hat * log_b)
    loglik = (
        n * math.log(alpha_hat)
        + n * alpha_hat * math.log(s_hat)
        - (alpha_hat + 1) * float(np.log(x).sum())
        - n * math.log1p(-ba)
    )
    return FitResult(TruncatedPareto(s_hat, u_hat, alpha_hat), loglik, n)


@dataclass(frozen=True)
class GoodnessReport:
    ks_statistic: float
    tail_points: tuple  # (t, fitted Pr{X > t}) pairs, first point at s-hat

    def to_dict(self) -> dict:
        return {
            "ks_statistic": self.ks_statistic,
            "tail_points": [list(p) for p in self.tail_points],
        }


def goodness_report(fit: FitResult, samples, n_tail_points: int = 50) -> GoodnessReport:
    """Kolmogorov-Smirnov distance between the fitted and empirical CDFs,
    plus fitted-tail points on a log grid for plotting."""
    x = np.sort(np.asarray(list(samples), dtype=float))
    n = x.size
    if n == 0:
        raise DomainError("goodness_report needs samples")
    cdf = np.array([1.0 - fit.dist.tail(v) for v in x])
    upper = np.arange(1, n + 1) / n
    lower = np.arange(0, n) / n
    ks = float(np.max(np.maximum(np.abs(upper - cdf), np.abs(cdf - lower))))
    lo = fit.dist.s if hasattr(fit.dist, "s") else float(x[0])
    hi = float(x[-1])
    if hi <= lo:
        grid = np.array([lo])
    else:
        grid = np.geomspace(lo, hi, n_tail_points)
        grid[0] = lo
    points = tuple((float(t), float(fit.dist.tail(t))) for t in grid)
    return GoodnessReport(ks_statistic=ks, tail_points=points)
