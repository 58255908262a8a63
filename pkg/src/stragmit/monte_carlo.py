"""Trial-based simulation of one job under any policy and task distribution.

This is the independent oracle for the closed forms and the only evaluator
for regimes without one (e.g. delayed redundancy on heavy tails). Trials are
simulated in fixed-size blocks; block b of a run draws from a stream seeded
by (seed, b), so results are bit-identical for a given seed and do not
depend on how blocks are distributed over worker threads.

Semantics: completions at exactly the intervention time delta count as
"before delta". Relaunch cancels the remaining copies at delta (they
contribute their elapsed lifetime delta under both cost conventions) and
launches fresh replacements. Cost with cancellation additionally cancels
sibling replicas at task completion and all outstanding copies at job
completion; cost without cancellation lets every copy that was not
relaunch-cancelled run to its own completion.
"""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .analytic_models import (
    Coding,
    Metrics,
    NoRedundancy,
    PolicyConfig,
    RedLaunch,
    Replication,
)
from .distributions import TaskDist
from .errors import DomainError

__all__ = ["EmpiricalMetrics", "simulate_job", "compare", "CompareReport", "FieldCheck"]

BLOCK_TRIALS = 4096
DEFAULT_TRIALS = 100_000
QUANTILE_GRID = (0.5, 0.9, 0.99)


@dataclass(frozen=True)
class EmpiricalMetrics:
    """Sample means, standard errors and latency quantiles over the trials."""

    trials: int
    latency_mean: float
    latency_se: float
    cost_cancel_mean: float
    cost_cancel_se: float
    cost_nocancel_mean: float
    cost_nocancel_se: float
    latency_quantiles: dict

    def to_dict(self) -> dict:
        return {
            "trials": self.trials,
            "latency_mean": self.latency_mean,
            "latency_se": self.latency_se,
            "cost_cancel_mean": self.cost_cancel_mean,
            "cost_cancel_se": self.cost_cancel_se,
            "cost_nocancel_mean": self.cost_nocancel_mean,
            "cost_nocancel_se": self.cost_nocancel_se,
            "latency_quantiles": {str(p): v for p, v in self.latency_quantiles.items()},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def _block_rng(seed: int, block_index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=(int(seed), block_index)))


def simulate_job(
    config: PolicyConfig,
    dist: TaskDist,
    trials: int = DEFAULT_TRIALS,
    seed: int = 42,
    threads: int = 1,
    dump_trials_to=None,
) -> EmpiricalMetrics:
    """Simulate ``trials`` independent executions of one job.

    ``dump_trials_to`` optionally writes the raw per-trial
    (latency, cost_cancel, cost_nocancel) rows to a CSV file.
    """
    if trials < 1:
        raise DomainError(f"trials must be >= 1, got {trials}")
    n_blocks = (trials + BLOCK_TRIALS - 1) // BLOCK_TRIALS

    def run_block(b: int):
        size = min(BLOCK_TRIALS, trials - b * BLOCK_TRIALS)
        return _simulate_block(config, dist, _block_rng(seed, b), size)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run_block, range(n_blocks)))
    else:
        results = [run_block(b) for b in range(n_blocks)]

    lat = np.concatenate([r[0] for r in results])
    cc = np.concatenate([r[1] for r in results])
    cn = np.concatenate([r[2] for r in results])
    if dump_trials_to is not None:
        with open(dump_trials_to, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["latency", "cost_cancel", "cost_nocancel"])
            for row in zip(lat, cc, cn):
                writer.writerow([repr(v) for v in row])
    return EmpiricalMetrics(
        trials=trials,
        latency_mean=float(lat.mean()),
        latency_se=_se(lat),
        cost_cancel_mean=float(cc.mean()),
        cost_cancel_se=_se(cc),
        cost_nocancel_mean=float(cn.mean()),
        cost_nocancel_se=_se(cn),
        latency_quantiles={p: float(np.quantile(lat, p)) for p in QUANTILE_GRID},
    )


def _se(x: np.ndarray) -> float:
    if len(x) < 2:
        return math.nan
    return float(x.std(ddof=1) / math.sqrt(len(x)))


# ---------------------------------------------------------------------------
# per-block vectorized trial math


def _simulate_block(config: PolicyConfig, dist: TaskDist, rng: np.random.Generator, m: int):
    k = config.k
    red = config.redundancy
    delta = config.delta
    at_zero = config.red_launch is RedLaunch.AT_ZERO

    if isinstance(red, NoRedundancy):
        if config.relaunch_at_delta:
            return _norel_relaunch(dist, rng, m, k, delta)
        x = dist.sample_array(rng, (m, k))
        tot = x.sum(axis=1)
        return x.max(axis=1), tot, tot

    if isinstance(red, Replication):
        c = red.c
        if at_zero and config.relaunch_at_delta:
            return _rep_zero_relaunch(dist, rng, m, k, c, delta)
        if at_zero:
            return _rep_zero(dist, rng, m, k, c)
        if config.relaunch_at_delta:
            return _rep_delta_relaunch(dist, rng, m, k, c, delta)
        return _rep_delta(dist, rng, m, k, c, delta)

    n = red.n
    if at_zero and config.relaunch_at_delta:
        return _cod_zero_relaunch(dist, rng, m, k, n, delta)
    if at_zero:
        return _cod_zero(dist, rng, m, k, n)
    if config.relaunch_at_delta:
        return _cod_delta_relaunch(dist, rng, m, k, n, delta)
    return _cod_delta(dist, rng, m, k, n, delta)


def _norel_relaunch(dist, rng, m, k, delta):
    x = dist.sample_array(rng, (m, k))
    fresh = dist.sample_array(rng, (m, k))
    done = x <= delta
    comp = np.where(done, x, delta + fresh)
    tot = comp.sum(axis=1)  # completion time equals cost contribution per task
    return comp.max(axis=1), tot, tot


def _rep_zero(dist, rng, m, k, c):
    copies = dist.sample_array(rng, (m, k, c + 1))
    y = copies.min(axis=2)
    return y.max(axis=1), (c + 1) * y.sum(axis=1), copies.sum(axis=(1, 2))


def _rep_delta(dist, rng, m, k, c, delta):
    x = dist.sample_array(rng, (m, k))
    reps = dist.sample_array(rng, (m, k, c))
    straggler = x > delta
    y = np.where(straggler, np.minimum(x, delta + reps.min(axis=2)), x)
    cc = np.where(straggler, y + c * (y - delta), x).sum(axis=1)
    cn = np.where(straggler, x + reps.sum(axis=2), x).sum(axis=1)
    return y.max(axis=1), cc, cn


def _rep_zero_relaunch(dist, rng, m, k, c, delta):
    copies = dist.sample_array(rng, (m, k, c + 1))
    fresh = dist.sample_array(rng, (m, k, c + 1))
    m0 = copies.min(axis=2)
    done = m0 <= delta
    mf = fresh.min(axis=2)
    comp = np.where(done, m0, delta + mf)
    cc = np.where(done, (c + 1) * m0, (c + 1) * delta + (c + 1) * mf).sum(axis=1)
    cn = np.where(done, copies.sum(axis=2), (c + 1) * delta + fresh.sum(axis=2)).sum(axis=1)
    return comp.max(axis=1), cc, cn


def _rep_delta_relaunch(dist, rng, m, k, c, delta):
    x = dist.sample_array(rng, (m, k))
    fresh = dist.sample_array(rng, (m, k, c + 1))
    done = x <= delta
    mf = fresh.min(axis=2)
    comp = np.where(done, x, delta + mf)
    cc = np.where(done, x, delta + (c + 1) * mf).sum(axis=1)
    cn = np.where(done, x, delta + fresh.sum(axis=2)).sum(axis=1)
    return comp.max(axis=1), cc, cn


def _cod_zero(dist, rng, m, k, n):
    x = dist.sample_array(rng, (m, n))
    part = np.partition(x, k - 1, axis=1)
    kth = part[:, k - 1]
    cc = part[:, :k].sum(axis=1) + (n - k) * kth
    return kth, cc, x.sum(axis=1)


def _cod_delta(dist, rng, m, k, n, delta):
    x = dist.sample_array(rng, (m, k))
    coded = dist.sample_array(rng, (m, n - k))
    early = x.max(axis=1) <= delta
    comp = np.concatenate([x, delta + coded], axis=1)
    part = np.partition(comp, k - 1, axis=1)
    kth = part[:, k - 1]
    lat = np.where(early, x.max(axis=1), kth)
    t_col = lat[:, None]
    cc_late = np.minimum(x, t_col).sum(axis=1) + (
        np.minimum(delta + coded, t_col) - delta
    ).sum(axis=1)
    cc = np.where(early, x.sum(axis=1), cc_late)
    cn = np.where(early, x.sum(axis=1), x.sum(axis=1) + coded.sum(axis=1))
    return lat, cc, cn


def _cod_zero_relaunch(dist, rng, m, k, n, delta):
    x = dist.sample_array(rng, (m, n))
    fresh = dist.sample_array(rng, (m, n))
    part = np.partition(x, k - 1, axis=1)
    kth_x = part[:, k - 1]
    early = kth_x <= delta
    r = (x <= delta).sum(axis=1)
    # fresh finishing times of the copies still outstanding at delta
    g = np.where(x <= delta, np.inf, fresh)
    g_sorted = np.sort(g, axis=1)
    idx = np.clip(k - r - 1, 0, n - 1)[:, None]
    f_kth = np.take_along_axis(g_sorted, idx, axis=1)[:, 0]
    lat = np.where(early, kth_x, delta + f_kth)

    csum = np.cumsum(np.where(np.isinf(g_sorted), 0.0, g_sorted), axis=1)
    winners_sum = np.take_along_axis(csum, idx, axis=1)[:, 0]
    pre_sum = np.where(x <= delta, x, 0.0).sum(axis=1)
    cc_late = pre_sum + (n - r) * delta + winners_sum + (n - k) * f_kth
    cc_early = part[:, :k].sum(axis=1) + (n - k) * kth_x
    cc = np.where(early, cc_early, cc_late)
    cn_late = pre_sum + (n - r) * delta + np.where(np.isinf(g), 0.0, g).sum(axis=1)
    cn = np.where(early, x.sum(axis=1), cn_late)
    return lat, cc, cn


def _cod_delta_relaunch(dist, rng, m, k, n, delta):
    x = dist.sample_array(rng, (m, k))
    fresh = dist.sample_array(rng, (m, n))
    early = x.max(axis=1) <= delta
    r = (x <= delta).sum(axis=1)
    # replacements for the cancelled originals plus the n-k coded tasks
    g = np.concatenate([np.where(x <= delta, np.inf, fresh[:, :k]), fresh[:, k:]], axis=1)
    g_sorted = np.sort(g, axis=1)
    idx = np.clip(k - r - 1, 0, n - 1)[:, None]
    f_kth = np.take_along_axis(g_sorted, idx, axis=1)[:, 0]
    lat = np.where(early, x.max(axis=1), delta + f_kth)

    csum = np.cumsum(np.where(np.isinf(g_sorted), 0.0, g_sorted), axis=1)
    winners_sum = np.take_along_axis(csum, idx, axis=1)[:, 0]
    pre_sum = np.where(x <= delta, x, 0.0).sum(axis=1)
    cc_late = pre_sum + (k - r) * delta + winners_sum + (n - k) * f_kth
    cc = np.where(early, x.sum(axis=1), cc_late)
    cn_late = pre_sum + (k - r) * delta + np.where(np.isinf(g), 0.0, g).sum(axis=1)
    cn = np.where(early, x.sum(axis=1), cn_late)
    return lat, cc, cn


# ---------------------------------------------------------------------------
# analytic-vs-empirical comparison


@dataclass(frozen=True)
class FieldCheck:
    field: str
    analytic: float
    empirical: float
    se: float
    z: float
    rel_err: float
    mode: str  # "exact" (|z| <= 3), "approx" (rel err <= 5%), or "skipped"
    passed: bool


@dataclass(frozen=True)
class CompareReport:
    checks: tuple
    passed: bool

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "checks": [vars(c) for c in self.checks],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


APPROX_REL_TOL = 0.05
EXACT_Z_BOUND = 3.0


def compare(analytic: Metrics, empirical: EmpiricalMetrics) -> CompareReport:
    """Per-field z-scores (exact formulas) or relative errors (approximate)."""
    checks = []
    for name, emp_mean, emp_se in (
        ("latency_mean", empirical.latency_mean, empirical.latency_se),
        ("cost_cancel_mean", empirical.cost_cancel_mean, empirical.cost_cancel_se),
        ("cost_nocancel_mean", empirical.cost_nocancel_mean, empirical.cost_nocancel_se),
    ):
        value = getattr(analytic, name)
        z = (value - emp_mean) / emp_se if emp_se > 0 else math.inf
        rel = abs(value - emp_mean) / abs(emp_mean)
        if math.isinf(value):
            mode, passed = "skipped", True
        elif name in analytic.approx_flags:
            mode, passed = "approx", rel <= APPROX_REL_TOL
        else:
            mode, passed = "exact", abs(z) <= EXACT_Z_BOUND
        checks.append(FieldCheck(name, value, emp_mean, emp_se, z, rel, mode, passed))
    return CompareReport(checks=tuple(checks), passed=all(c.passed for c in checks))
