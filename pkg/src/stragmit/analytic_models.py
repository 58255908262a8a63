"""Closed-form cost and latency of straggler-mitigation policies.

Covers delayed/zero-delay replication and MDS coding for exponential,
shifted-exponential and Pareto task times, straggler relaunch, their
combinations, second moments, and the derived optima and sufficiency
conditions. Formulas that are only approximate carry an entry in
``Metrics.approx_flags`` naming the affected field; everything else is
exact and is held to Monte-Carlo agreement in the test suite.

Job-tail functions are exposed separately (``rep_delayed_exp_tail``,
``code_delayed_exp_tail``, ``relaunch_tail``) and return plain callables.

Cost conventions (both costs count a relaunch-cancelled copy up to the
relaunch instant):

- ``cost_cancel_mean``: sibling replicas are cancelled the moment their
  task completes, and all outstanding copies are cancelled at job
  completion.
- ``cost_nocancel_mean``: every launched copy runs to its own completion.
"""

from __future__ import annotations

import csv
import enum
import json
import math
from dataclasses import dataclass, replace
from typing import Callable, Sequence, Union

from .distributions import Exp, Pareto, SExp, TaskDist
from .errors import DomainError, InfiniteMomentError, UnsupportedPolicyError
from .special_functions import (
    gamma_fn,
    gamma_ratio,
    gen_harmonic2,
    harmonic,
    inc_beta,
    reg_inc_beta,
)

__all__ = [
    "NoRedundancy",
    "Replication",
    "Coding",
    "Redundancy",
    "RedLaunch",
    "PolicyConfig",
    "Metrics",
    "CurvePoint",
    "TradeoffCurve",
    "rep_delayed_exp",
    "rep_delayed_exp_tail",
    "rep_delayed_sexp",
    "code_delayed_exp",
    "code_delayed_exp_tail",
    "code_delayed_sexp",
    "zero_delay",
    "zero_delay_second_moments",
    "latency_no_cost_replication",
    "latency_no_cost_coding",
    "Verdict",
    "tail_change_verdict",
    "relaunch",
    "relaunch_tail",
    "relaunch_optimum",
    "zero_delay_red_relaunch",
    "red_relaunch_sufficiency",
    "delayed_red_relaunch",
    "evaluate",
    "sweep",
]


# ---------------------------------------------------------------------------
# policy description


@dataclass(frozen=True)
class NoRedundancy:
    pass


@dataclass(frozen=True)
class Replication:
    """c extra replicas per task."""

    c: int

    def __post_init__(self):
        if self.c < 1:
            raise DomainError(f"Replication requires c >= 1, got {self.c}")


@dataclass(frozen=True)
class Coding:
    """Expand k tasks to n with n - k MDS parity tasks; any k of n finish the job."""

    n: int

    def __post_init__(self):
        if self.n < 2:
            raise DomainError(f"Coding requires n >= 2, got {self.n}")


Redundancy = Union[NoRedundancy, Replication, Coding]


class RedLaunch(enum.Enum):
    AT_ZERO = "zero"
    AT_DELTA = "delta"


@dataclass(frozen=True)
class PolicyConfig:
    """One mitigation policy: task count, redundancy, launch delay, relaunch."""

    k: int
    redundancy: Redundancy = NoRedundancy()
    delta: float = 0.0
    red_launch: RedLaunch = RedLaunch.AT_ZERO
    relaunch_at_delta: bool = False

    def __post_init__(self):
        if self.k < 1:
            raise DomainError(f"PolicyConfig requires k >= 1, got {self.k}")
        if isinstance(self.redundancy, Coding) and self.redundancy.n <= self.k:
            raise DomainError(
                f"Coding requires n > k, got n={self.redundancy.n}, k={self.k}"
            )
        if self.delta < 0 or math.isnan(self.delta):
            raise DomainError(f"delta must be >= 0, got {self.delta}")
        uses_delta = self.relaunch_at_delta or (
            not isinstance(self.redundancy, NoRedundancy)
            and self.red_launch is RedLaunch.AT_DELTA
        )
        if not uses_delta and self.delta not in (0.0,):
            raise DomainError("delta is unused for this policy; set it to 0")


# ---------------------------------------------------------------------------
# results


@dataclass(frozen=True)
class Metrics:
    """Expected latency and cost of one policy evaluation.

    ``approx_flags`` names the fields computed from an approximate formula;
    infinite cost values mark nonexistent moments (heavy tails).
    """

    latency_mean: float
    cost_cancel_mean: float
    cost_nocancel_mean: float
    latency_sd: float | None = None
    cost_sd: float | None = None
    approx_flags: frozenset = frozenset()

    def __post_init__(self):
        for name in ("latency_mean", "cost_cancel_mean", "cost_nocancel_mean"):
            v = getattr(self, name)
            if math.isnan(v) or v <= 0:
                raise DomainError(f"Metrics.{name} must be positive, got {v}")
        # tolerate float noise in the ordering check
        if self.cost_cancel_mean > self.cost_nocancel_mean * (1 + 1e-12):
            raise DomainError(
                f"cost_cancel_mean {self.cost_cancel_mean} exceeds "
                f"cost_nocancel_mean {self.cost_nocancel_mean}"
            )

    def to_dict(self) -> dict:
        return {
            "latency_mean": self.latency_mean,
            "cost_cancel_mean": self.cost_cancel_mean,
            "cost_nocancel_mean": self.cost_nocancel_mean,
            "latency_sd": self.latency_sd,
            "cost_sd": self.cost_sd,
            "approx_flags": sorted(self.approx_flags),
        }


@dataclass(frozen=True)
class CurvePoint:
    knob_value: float
    metrics: Metrics | None
    error: str | None = None


@dataclass(frozen=True)
class TradeoffCurve:
    """Ordered (knob value, Metrics) pairs for frontier plots."""

    knob_name: str
    points: tuple

    def __post_init__(self):
        values = [p.knob_value for p in self.points]
        if any(b <= a for a, b in zip(values, values[1:])):
            raise DomainError("knob values must be strictly increasing")

    CSV_COLUMNS = (
        "knob",
        "latency_mean",
        "cost_cancel_mean",
        "cost_nocancel_mean",
        "latency_sd",
        "cost_sd",
        "approx_flags",
    )

    def write_csv(self, path) -> None:
        """CSV with one row per grid point; failed points keep their knob value
        and carry ``error:<reason>`` in the approx_flags column."""
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(self.CSV_COLUMNS)
            for p in self.points:
                if p.metrics is None:
                    writer.writerow([p.knob_value, "", "", "", "", "", f"error:{p.error}"])
                    continue
                m = p.metrics
                writer.writerow(
                    [
                        p.knob_value,
                        repr(m.latency_mean),
                        repr(m.cost_cancel_mean),
                        repr(m.cost_nocancel_mean),
                        "" if m.latency_sd is None else repr(m.latency_sd),
                        "" if m.cost_sd is None else repr(m.cost_sd),
                        ";".join(sorted(m.approx_flags)),
                    ]
                )

    def to_json(self) -> str:
        points = [
            {
                "knob": p.knob_value,
                "metrics": None if p.metrics is None else p.metrics.to_dict(),
                "error": p.error,
            }
            for p in self.points
        ]
        return json.dumps({"knob_name": self.knob_name, "points": points}, indent=2)


# ---------------------------------------------------------------------------
# shared helpers


def _check_pos(**kwargs: float) -> None:
    for name, v in kwargs.items():
        if not (v > 0 and not math.isnan(v)):
            raise DomainError(f"{name} must be positive, got {v}")


def _check_int_ge(value: int, lo: int, name: str) -> int:
    if value != int(value) or value < lo:
        raise DomainError(f"{name} must be an integer >= {lo}, got {value}")
    return int(value)


def pareto_rep_latency(k: int, s: float, alpha_eff: float) -> float:
    """E[max of k] for Pareto(s, alpha_eff) tasks: s k! G(1-b)/G(k+1-b), b=1/alpha_eff."""
    if alpha_eff <= 1:
        raise InfiniteMomentError(
            f"latency requires (c+1)*alpha > 1, got effective index {alpha_eff}"
        )
    b = 1.0 / alpha_eff
    return s * gamma_ratio(k + 1, k + 1 - b) * gamma_fn(1 - b)


def pareto_cod_latency(k: int, n: int, s: float, alpha: float) -> float:
    """E[X_{n:k}] for Pareto(s, alpha); requires alpha > 1/(n-k+1)."""
    if alpha * (n - k + 1) <= 1:
        raise InfiniteMomentError(
            f"E[X_{{{n}:{k}}}] requires alpha > 1/(n-k+1), got {alpha}"
        )
    b = 1.0 / alpha
    return s * gamma_ratio(n + 1, n - k + 1) * gamma_ratio(n - k + 1 - b, n + 1 - b)


def _pareto_baseline(k: int, s: float, alpha: float) -> tuple[float, float]:
    """(latency, cost) with no redundancy and no relaunch."""
    lat = pareto_rep_latency(k, s, alpha)
    cost = k * s * alpha / (alpha - 1.0) if alpha > 1 else math.inf
    return lat, cost


# ---------------------------------------------------------------------------
# delayed redundancy, exponential and shifted-exponential tails (Metrics)


def rep_delayed_exp(k: int, c: int, delta: float, mu: float) -> Metrics:
    """c replicas per remaining task launched at time delta, Exp(mu) tasks.

    Costs are exact; the latency formula is approximate (flagged).
    """
    k = _check_int_ge(k, 1, "k")
    c = _check_int_ge(c, 1, "c")
    _check_pos(mu=mu)
    if delta < 0:
        raise DomainError(f"delta must be >= 0, got {delta}")
    q = 1.0 if math.isinf(delta) else -math.expm1(-mu * delta)
    latency = (harmonic(k) - c / (c + 1.0) * harmonic(k - k * q)) / mu
    return Metrics(
        latency_mean=latency,
        cost_cancel_mean=k / mu,
        cost_nocancel_mean=(c * (1.0 - q) + 1.0) * k / mu,
        approx_flags=frozenset({"latency_mean"}),
    )


def rep_delayed_exp_tail(k: int, c: int, delta: float, mu: float) -> Callable[[float], float]:
    """Exact job tail Pr{T > t} for the policy of :func:`rep_delayed_exp`."""

    def tail(t: float) -> float:
        if t < 0:
            raise DomainError(f"t must be >= 0, got {t}")
        if t <= delta:
            per_task = math.exp(-mu * t)
        else:
            per_task = math.exp(-mu * ((c + 1) * (t - delta) + delta))
        return 1.0 - (1.0 - per_task) ** k

    return tail


def rep_delayed_sexp(k: int, c: int, delta: float, s: float, mu: float) -> Metrics:
    """c replicas per remaining task launched at delta, SExp(s, mu) tasks."""
    k = _check_int_ge(k, 1, "k")
    c = _check_int_ge(c, 1, "c")
    _check_pos(s=s, mu=mu)
    if delta < 0:
        raise DomainError(f"delta must be >= 0, got {delta}")
    latency = s + rep_delayed_exp(k, c, delta, mu).latency_mean
    if delta <= s:
        cost_cancel = k * (c + 1.0) * (
            s + (1.0 - c / (c + 1.0) * (math.exp(-mu * delta) + mu * delta)) / mu
        )
        q = 0.0
    else:
        q = 1.0 if math.isinf(delta) else -math.expm1(-mu * (delta - s))
        e_md = 0.0 if math.isinf(delta) else math.exp(-mu * delta)
        cost_cancel = k * (s + (1.0 + c * (1.0 - q - e_md)) / mu)
    cost_nocancel = k * (c * (1.0 - q) + 1.0) * (s + 1.0 / mu)
    return Metrics(
        latency_mean=latency,
        cost_cancel_mean=cost_cancel,
        cost_nocancel_mean=cost_nocancel,
        approx_flags=frozenset({"latency_mean"}),
    )


def code_delayed_exp(k: int, n: int, delta: float, mu: float) -> Metrics:
    """n - k coded tasks launched at delta if the job is still running, Exp(mu).

    Costs are exact; the latency formula is approximate (flagged).
    """
    k = _check_int_ge(k, 1, "k")
    n = _check_int_ge(n, k + 1, "n")
    _check_pos(mu=mu)
    if delta < 0:
        raise DomainError(f"delta must be >= 0, got {delta}")
    if math.isinf(delta):
        latency = harmonic(k) / mu
        return Metrics(latency, k / mu, k / mu, approx_flags=frozenset({"latency_mean"}))
    q = -math.expm1(-mu * delta)
    latency = (
        delta
        - inc_beta(q, k + 1, 0.0) / mu
        + (harmonic(n - k * q) - harmonic(n - k)) / mu
    )
    cost_nocancel = (k / mu) * q**k + (n / mu) * (1.0 - q**k)
    return Metrics(
        latency_mean=latency,
        cost_cancel_mean=k / mu,
        cost_nocancel_mean=cost_nocancel,
        approx_flags=frozenset({"latency_mean"}),
    )


def code_delayed_exp_tail(k: int, n: int, delta: float, mu: float) -> Callable[[float], float]:
    """Job tail Pr{T > t} for :func:`code_delayed_exp`; approximate for t > delta."""
    if math.isinf(delta):
        return lambda t: 1.0 - (-math.expm1(-mu * t)) ** k
    q = -math.expm1(-mu * delta)

    def tail(t: float) -> float:
        if t < 0:
            raise DomainError(f"t must be >= 0, got {t}")
        if t <= delta:
            return 1.0 - (-math.expm1(-mu * t)) ** k
        z = math.exp(-mu * (t - delta))
        return reg_inc_beta(z, n - k + 1, k * (1.0 - q))

    return tail


def code_delayed_sexp(k: int, n: int, delta: float, s: float, mu: float) -> Metrics:
    """n - k coded tasks launched at delta, SExp(s, mu) tasks.

    The cost-with-cancellation branch for delta > s is approximate (flagged);
    everything else, including the delta <= s cancellation cost, is exact.
    """
    k = _check_int_ge(k, 1, "k")
    n = _check_int_ge(n, k + 1, "n")
    _check_pos(s=s, mu=mu)
    if delta < 0:
        raise DomainError(f"delta must be >= 0, got {delta}")
    latency = s + code_delayed_exp(k, n, delta, mu).latency_mean
    flags = {"latency_mean"}
    if math.isinf(delta):
        base = k * (s + 1.0 / mu)
        return Metrics(latency, base, base, approx_flags=frozenset(flags))
    if delta <= s:
        qt = -math.expm1(-mu * delta)
        cost_nocancel = n * (s + 1.0 / mu)
        cost_cancel = k / mu + n * s - (n - k) * inc_beta(qt, k + 1, 0.0) / mu
    else:
        q = -math.expm1(-mu * (delta - s))
        qt = -math.expm1(-mu * delta)
        zeta = -math.expm1(-mu * s)
        cost_nocancel = (k + (1.0 - q**k) * (n - k)) * (s + 1.0 / mu)
        cost_cancel = cost_nocancel - ((n - k) / mu) * (
            1.0
            - q**k
            + zeta ** (-k * (1.0 - q)) * inc_beta(zeta, k - k * q + 1.0, 0.0) * (qt**k - q**k)
        )
        flags.add("cost_cancel_mean")
    return Metrics(
        latency_mean=latency,
        cost_cancel_mean=cost_cancel,
        cost_nocancel_mean=cost_nocancel,
        approx_flags=frozenset(flags),
    )


# ---------------------------------------------------------------------------
# zero-delay redundancy (exact, SExp and Pareto)


def zero_delay(k: int, redundancy: Redundancy, dist: TaskDist) -> Metrics:
    """Redundant tasks launched together with the initial k tasks (exact)."""
    k = _check_int_ge(k, 1, "k")
    if isinstance(dist, SExp):
        return _zero_delay_sexp(k, redundancy, dist.s, dist.mu)
    if isinstance(dist, Pareto):
        return _zero_delay_pareto(k, redundancy, dist.s, dist.alpha)
    raise UnsupportedPolicyError(
        f"zero_delay covers SExp and Pareto tasks, not {type(dist).__name__}"
    )


def _zero_delay_sexp(k: int, red: Redundancy, s: float, mu: float) -> Metrics:
    if isinstance(red, NoRedundancy):
        base = k * (s + 1.0 / mu)
        return Metrics(s + harmonic(k) / mu, base, base)
    if isinstance(red, Replication):
        c = red.c
        return Metrics(
            latency_mean=s + harmonic(k) / ((c + 1.0) * mu),
            cost_cancel_mean=k * ((c + 1.0) * s + 1.0 / mu),
            cost_nocancel_mean=k * (c + 1.0) * (s + 1.0 / mu),
        )
    n = _check_int_ge(red.n, k + 1, "n")
    return Metrics(
        latency_mean=s + (harmonic(n) - harmonic(n - k)) / mu,
        cost_cancel_mean=n * s + k / mu,
        cost_nocancel_mean=n * (s + 1.0 / mu),
    )


def _zero_delay_pareto(k: int, red: Redundancy, s: float, alpha: float) -> Metrics:
    if isinstance(red, NoRedundancy):
        lat, cost = _pareto_baseline(k, s, alpha)
        return Metrics(lat, cost, cost)
    if isinstance(red, Replication):
        c = red.c
        a_eff = (c + 1.0) * alpha
        lat = pareto_rep_latency(k, s, a_eff)
        cost_cancel = k * (c + 1.0) * s * a_eff / (a_eff - 1.0)
        cost_nocancel = (
            k * (c + 1.0) * s * alpha / (alpha - 1.0) if alpha > 1 else math.inf
        )
        return Metrics(lat, cost_cancel, cost_nocancel)
    n = _check_int_ge(red.n, k + 1, "n")
    lat = pareto_cod_latency(k, n, s, alpha)
    if alpha > 1:
        cost_cancel = (n * s * alpha - (n - k) * lat) / (alpha - 1.0)
        cost_nocancel = n * s * alpha / (alpha - 1.0)
    else:
        # closed form has a removable singularity at alpha = 1; fall back to
        # the order-statistic sum, which is exact whenever the latency exists
        cost_cancel = (n - k) * lat + sum(
            pareto_cod_latency(i, n, s, alpha) for i in range(1, k + 1)
        )
        cost_nocancel = math.inf
    return Metrics(lat, cost_cancel, cost_nocancel)


# ---------------------------------------------------------------------------
# zero-delay second moments (exact)


def _sum_exp_joint(n: int, k: int, mu: float) -> float:
    """sum over i,j in 1..k of E[X_{n:i} X_{n:j}] for Exp(mu)."""
    h = [harmonic(m) for m in range(n + 1)]
    h2 = [0.0] + [gen_harmonic2(m) for m in range(1, n + 1)]
    total = 0.0
    for i in range(1, k + 1):
        for j in range(i, k + 1):
            v = h2[n] - h2[n - i] + (h[n] - h[n - i]) * (h[n] - h[n - j])
            total += v if i == j else 2.0 * v
    return total / mu**2


def _sum_pareto_joint(n: int, k: int, s: float, alpha: float) -> float:
    """sum over i,j in 1..k of E[X_{n:i} X_{n:j}] for Pareto(s, alpha)."""
    if alpha * (n - k + 1) <= 2:
        raise InfiniteMomentError(
            f"second moments require alpha > 2/(n-k+1), got {alpha}"
        )
    b = 1.0 / alpha
    lead = gamma_ratio(n + 1, n + 1 - 2 * b)
    a_terms = [gamma_ratio(n - i + 1 - 2 * b, n - i + 1 - b) for i in range(1, k + 1)]
    b_terms = [gamma_ratio(n - j + 1 - b, n - j + 1) for j in range(1, k + 1)]
    total = 0.0
    for i in range(1, k + 1):
        for j in range(i, k + 1):
            v = a_terms[i - 1] * b_terms[j - 1]
            total += v if i == j else 2.0 * v
    return s**2 * lead * total


def zero_delay_second_moments(k: int, redundancy: Redundancy, dist: TaskDist) -> Metrics:
    """Zero-delay metrics with exact standard deviations from joint moments."""
    k = _check_int_ge(k, 1, "k")
    base = zero_delay(k, redundancy, dist)
    if isinstance(dist, SExp):
        s, mu = dist.s, dist.mu
        if isinstance(redundancy, (NoRedundancy, Replication)):
            c = 0 if isinstance(redundancy, NoRedundancy) else redundancy.c
            mu_eff = (c + 1.0) * mu
            et2 = (s + harmonic(k) / mu_eff) ** 2 + gen_harmonic2(k) / mu_eff**2
            ec2 = (
                (k * (c + 1.0) * s) ** 2
                + 2.0 * k * (c + 1.0) * s * k / mu
                + (c + 1.0) ** 2 * _sum_exp_joint(k, k, mu_eff)
            )
        else:
            n = redundancy.n
            et2 = ((harmonic(n) - harmonic(n - k)) / mu + s) ** 2 + (
                gen_harmonic2(n) - (gen_harmonic2(n - k) if n > k else 0.0)
            ) / mu**2
            exp_joint = _sum_exp_joint(n, k, mu)
            kth2 = _exp_joint_one(n, k, k, mu)
            cross = sum(_exp_joint_one(n, i, k, mu) for i in range(1, k + 1))
            ec2 = (
                (n * s) ** 2
                + 2.0 * n * s * k / mu
                + exp_joint
                + 2.0 * (n - k) * cross
                + (n - k) ** 2 * kth2
            )
    elif isinstance(dist, Pareto):
        s, alpha = dist.s, dist.alpha
        if isinstance(redundancy, (NoRedundancy, Replication)):
            c = 0 if isinstance(redundancy, NoRedundancy) else redundancy.c
            a_eff = (c + 1.0) * alpha
            et2 = _pareto_joint_one(k, k, k, s, a_eff)
            ec2 = (c + 1.0) ** 2 * _sum_pareto_joint(k, k, s, a_eff)
        else:
            n = redundancy.n
            et2 = _pareto_joint_one(n, k, k, s, alpha)
            cross = sum(_pareto_joint_one(n, i, k, s, alpha) for i in range(1, k + 1))
            ec2 = (
                (n - k) ** 2 * et2
                + 2.0 * (n - k) * cross
                + _sum_pareto_joint(n, k, s, alpha)
            )
    else:
        raise UnsupportedPolicyError(
            f"second moments cover SExp and Pareto tasks, not {type(dist).__name__}"
        )
    lat_var = max(et2 - base.latency_mean**2, 0.0)
    cost_var = max(ec2 - base.cost_cancel_mean**2, 0.0)
    return replace(base, latency_sd=math.sqrt(lat_var), cost_sd=math.sqrt(cost_var))


def _exp_joint_one(n: int, i: int, j: int, mu: float) -> float:
    v = (
        gen_harmonic2(n)
        - (gen_harmonic2(n - i) if n > i else 0.0)
        + (harmonic(n) - harmonic(n - i)) * (harmonic(n) - harmonic(n - j))
    )
    return v / mu**2


def _pareto_joint_one(n: int, i: int, j: int, s: float, alpha: float) -> float:
    if alpha <= max(2.0 / (n - i + 1), 1.0 / (n - j + 1)):
        raise InfiniteMomentError(
            f"joint moment (n={n}, i={i}, j={j}) requires a heavier-tail bound on alpha"
        )
    b = 1.0 / alpha
    return (
        s**2
        * gamma_ratio(n + 1, n + 1 - 2 * b)
        * gamma_ratio(n - i + 1 - 2 * b, n - i + 1 - b)
        * gamma_ratio(n - j + 1 - b, n - j + 1)
    )


# ---------------------------------------------------------------------------
# latency reduction at no extra cost (Pareto, zero delay)


@dataclass(frozen=True)
class ReplicationNoCost:
    feasible: bool
    c_max: int
    t_min: float


def latency_no_cost_replication(k: int, s: float, alpha: float) -> ReplicationNoCost:
    """Largest replica count whose cost stays at or below the no-redundancy cost.

    Replication can cut latency for free only when alpha < 1.5; the replica
    bound is the largest integer c with c < 1/(alpha-1) - 1 (strict, so an
    exactly-integer 1/(alpha-1) decrements the floor).
    """
    k = _check_int_ge(k, 1, "k")
    _check_pos(s=s)
    if alpha <= 1:
        raise DomainError(f"requires alpha > 1, got {alpha}")
    ratio = 1.0 / (alpha - 1.0)
    if ratio == math.floor(ratio):
        c_max = max(int(ratio) - 2, 0)
    else:
        c_max = max(math.floor(ratio) - 1, 0)
    t_min = pareto_rep_latency(k, s, (c_max + 1.0) * alpha)
    return ReplicationNoCost(feasible=alpha < 1.5, c_max=c_max, t_min=t_min)


@dataclass(frozen=True)
class CodingNoCost:
    n_max: int
    t_min: float
    sufficient_ok: bool
    necessary_ok: bool
    t_min_bound: float


_N_SCAN_GUARD = 10**6


def latency_no_cost_coding(k: int, s: float, alpha: float) -> CodingNoCost:
    """Largest coded expansion whose cost stays at or below the baseline cost.

    Adding coded tasks keeps the cost at or below the no-redundancy cost
    exactly while the (dimensionless) latency f(n) = E[T_n]/s stays >= alpha;
    n_max is found by scanning n upward (latency is monotone in n). The
    sufficient/necessary booleans report whether any n can qualify:
    alpha**alpha <= (k+1)/2 (sufficient) and alpha**alpha <= k+2 (necessary).
    """
    k = _check_int_ge(k, 1, "k")
    _check_pos(s=s)
    if alpha <= 1:
        raise DomainError(f"requires alpha > 1, got {alpha}")
    f = lambda n: pareto_cod_latency(k, n, s, alpha) / s
    n_max = k
    n = k + 1
    while n < _N_SCAN_GUARD and f(n) >= alpha:
        n_max = n
        n += 1
    t_min = s * (f(n_max) if n_max > k else gamma_ratio(k + 1, k + 1 - 1 / alpha) * gamma_fn(1 - 1 / alpha))
    aa = alpha**alpha
    return CodingNoCost(
        n_max=n_max,
        t_min=t_min,
        sufficient_ok=aa <= (k + 1) / 2.0,
        necessary_ok=aa <= k + 2.0,
        t_min_bound=s * (alpha + gamma_ratio(k + 1, k + 1 - 1 / alpha) * gamma_fn(1 - 1 / alpha)),
    )


# ---------------------------------------------------------------------------
# latency change when redundancy makes the tail heavier


class Verdict(enum.Enum):
    GUARANTEED_REDUCE = "guaranteed_reduce"
    GUARANTEED_INCREASE = "guaranteed_increase"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class TailChangeVerdict:
    verdict: Verdict
    approx_threshold: float


def tail_change_verdict(
    k: int,
    r_i: float,
    r_j: float,
    alpha_i: float,
    alpha_j: float,
    kind: str,
) -> TailChangeVerdict:
    """Does raising the expansion rate r_i -> r_j reduce latency when the tail
    index simultaneously moves alpha_i -> alpha_j?

    ``kind`` is "coded" or "replicated". For replication the condition
    alpha_i/alpha_j < r_j/r_i is an exact iff. For coding the one-sided
    sufficient conditions are checked (with n = floor(k r)); a non-shrinking
    tail index (alpha_j >= alpha_i) guarantees a reduction outright because
    latency is monotone in both n and alpha. ``approx_threshold`` reports the
    Stirling-approximation growth ratio for a single coded increment at n_i
    (for replication, the exact threshold r_j/r_i).
    """
    k = _check_int_ge(k, 1, "k")
    if not (r_j > r_i > 1):
        raise DomainError(f"requires r_j > r_i > 1, got r_i={r_i}, r_j={r_j}")
    if alpha_i <= 1 or alpha_j <= 1:
        raise DomainError("requires alpha_i, alpha_j > 1")
    ratio = alpha_i / alpha_j
    if kind == "replicated":
        threshold = r_j / r_i
        if ratio < threshold:
            verdict = Verdict.GUARANTEED_REDUCE
        elif ratio > threshold:
            verdict = Verdict.GUARANTEED_INCREASE
        else:
            verdict = Verdict.INCONCLUSIVE
        return TailChangeVerdict(verdict, threshold)
    if kind != "coded":
        raise DomainError(f"kind must be 'coded' or 'replicated', got {kind!r}")
    n_i, n_j = math.floor(k * r_i), math.floor(k * r_j)
    if not (n_j > n_i > k):
        raise DomainError(
            f"coded verdict needs floor(k r_j) > floor(k r_i) > k, got n_i={n_i}, n_j={n_j}"
        )
    threshold = math.log1p(k / (n_i - k + 2)) / math.log1p(k / (n_i - k + 1))
    reduce_bound = math.log(n_i / (n_i - k + 1)) / math.log((n_j + 1) / (n_j - k))
    increase_bound = math.log((n_i + 1) / (n_i - k)) / math.log(n_j / (n_j - k + 1))
    if alpha_j >= alpha_i or ratio <= reduce_bound:
        verdict = Verdict.GUARANTEED_REDUCE
    elif ratio >= increase_bound:
        verdict = Verdict.GUARANTEED_INCREASE
    else:
        verdict = Verdict.INCONCLUSIVE
    return TailChangeVerdict(verdict, threshold)


# ---------------------------------------------------------------------------
# straggler relaunch (Pareto, exact)


def relaunch(k: int, delta: float, s: float, alpha: float) -> Metrics:
    """Cancel every remaining task at delta and launch fresh replacements.

    Exact. With no redundant copies in play the two cost conventions agree:
    a relaunch-cancelled copy contributes its elapsed time delta and the
    replacement runs to completion, in both accountings.
    """
    k = _check_int_ge(k, 1, "k")
    _check_pos(s=s)
    if alpha <= 1:
        raise DomainError(f"requires alpha > 1, got {alpha}")
    if delta < 0:
        raise DomainError(f"delta must be >= 0, got {delta}")
    base_lat, base_cost = _pareto_baseline(k, s, alpha)
    if math.isinf(delta):
        return Metrics(base_lat, base_cost, base_cost)
    if delta <= s:
        latency = delta + base_lat
        cost = k * delta + base_cost
    else:
        q = 1.0 - (s / delta) ** alpha
        latency = delta * (1.0 - q**k) + base_lat * (
            (s / delta - 1.0) * reg_inc_beta(1.0 - q, 1.0 - 1.0 / alpha, k) + 1.0
        )
        mean_x = s * alpha / (alpha - 1.0)
        cost = (
            k * alpha / (alpha - 1.0) * (s - delta * (1.0 - q))
            + k * (1.0 - q) * delta
            + k * (1.0 - q) * mean_x
        )
    return Metrics(latency, cost, cost)


def relaunch_tail(k: int, delta: float, s: float, alpha: float) -> Callable[[float], float]:
    """Exact job tail Pr{T > t} under straggler relaunch at delta."""
    _check_pos(s=s, alpha=alpha)

    def per_task_cdf(t: float) -> float:
        if t <= delta:
            return 1.0 - (s / t) ** alpha if t > s else 0.0
        q = 1.0 - (s / delta) ** alpha if delta > s else 0.0
        fresh = 1.0 - (s / (t - delta)) ** alpha if t > delta + s else 0.0
        return q + (1.0 - q) * fresh

    def tail(t: float) -> float:
        if t < 0:
            raise DomainError(f"t must be >= 0, got {t}")
        return 1.0 - per_task_cdf(t) ** k

    return tail


@dataclass(frozen=True)
class RelaunchOptimum:
    delta_star: float
    p_star: float
    sufficient_T: bool
    sufficient_alpha: bool


def relaunch_optimum(k: int, s: float, alpha: float) -> RelaunchOptimum:
    """Asymptotically optimal relaunch time and the relaunched-task fraction.

    delta* = sqrt(s E[T]) for the no-relaunch latency E[T]; the expected
    fraction of tasks still running at delta* is G(1-1/alpha)^(-alpha/2) /
    sqrt(k+1). Both become exact as k grows. Relaunch is guaranteed to help
    when E[T] > 4s, or (more loosely) when alpha < ln(k)/ln(4).
    """
    k = _check_int_ge(k, 1, "k")
    _check_pos(s=s)
    if alpha <= 1:
        raise DomainError(f"requires alpha > 1, got {alpha}")
    e_norel = pareto_rep_latency(k, s, alpha)
    return RelaunchOptimum(
        delta_star=math.sqrt(s * e_norel),
        p_star=gamma_fn(1.0 - 1.0 / alpha) ** (-alpha / 2.0) / math.sqrt(k + 1.0),
        sufficient_T=e_norel > 4.0 * s,
        sufficient_alpha=alpha < math.log(k) / math.log(4.0),
    )


# ---------------------------------------------------------------------------
# redundancy combined with relaunch (Pareto)


def zero_delay_red_relaunch(
    k: int, redundancy: Redundancy, delta: float, s: float, alpha: float
) -> float:
    """Latency when redundancy is launched at time zero and every remaining
    copy is relaunched at delta. Exact."""
    k = _check_int_ge(k, 1, "k")
    _check_pos(s=s)
    if alpha <= 1:
        raise DomainError(f"requires alpha > 1, got {alpha}")
    if delta < 0:
        raise DomainError(f"delta must be >= 0, got {delta}")
    if isinstance(redundancy, Coding):
        n = redundancy.n
        e_norel = pareto_cod_latency(k, n, s, alpha)
        if math.isinf(delta):
            return e_norel
        if delta <= s:
            return delta + e_norel
        q = 1.0 - (s / delta) ** alpha
        return delta * reg_inc_beta(1.0 - q, n - k + 1.0, k) + e_norel * (
            1.0 + (s / delta - 1.0) * reg_inc_beta(1.0 - q, n - k + 1.0 - 1.0 / alpha, k)
        )
    c = 0 if isinstance(redundancy, NoRedundancy) else redundancy.c
    a_eff = (c + 1.0) * alpha
    e_norel = pareto_rep_latency(k, s, a_eff)
    if math.isinf(delta):
        return e_norel
    if delta <= s:
        return delta + e_norel
    q = 1.0 - (s / delta) ** a_eff
    return delta * (1.0 - q**k) + e_norel * (
        1.0 + (s / delta - 1.0) * reg_inc_beta(1.0 - q, 1.0 - 1.0 / a_eff, k)
    )


@dataclass(frozen=True)
class RedRelaunchSufficiency:
    sufficient_T: bool
    sufficient_alpha: bool
    delta_star: float


def red_relaunch_sufficiency(
    k: int, redundancy: Redundancy, s: float, alpha: float
) -> RedRelaunchSufficiency:
    """When does relaunching still help on top of zero-delay redundancy?

    Sufficient when the redundant-execution latency exceeds 4s; the looser
    tail-index thresholds shrink with the redundancy level (by 1/(c+1) for
    replication, to ln(n/(n-k+1))/ln 4 for coding). delta* keeps the
    sqrt(s E[T]) form.
    """
    k = _check_int_ge(k, 1, "k")
    _check_pos(s=s)
    if alpha <= 1:
        raise DomainError(f"requires alpha > 1, got {alpha}")
    if isinstance(redundancy, Coding):
        n = redundancy.n
        e_norel = pareto_cod_latency(k, n, s, alpha)
        alpha_bound = math.log(n / (n - k + 1.0)) / math.log(4.0)
    else:
        c = 0 if isinstance(redundancy, NoRedundancy) else redundancy.c
        e_norel = pareto_rep_latency(k, s, (c + 1.0) * alpha)
        alpha_bound = math.log(k) / ((c + 1.0) * math.log(4.0))
    return RedRelaunchSufficiency(
        sufficient_T=e_norel > 4.0 * s,
        sufficient_alpha=alpha < alpha_bound,
        delta_star=math.sqrt(s * e_norel),
    )


def _beta_neg(m: float, y: float) -> float:
    """B(m, y) for y < 0 non-integer via the Gamma relation."""
    return gamma_fn(y) * gamma_ratio(m, m + y)


def delayed_red_relaunch(
    k: int, redundancy: Redundancy, delta: float, s: float, alpha: float
) -> Metrics:
    """Relaunch remaining tasks at delta and add redundancy at the same instant.

    Replication costs are exact; its delta > s latency is approximate.
    Coding: cost without cancellation is exact, the delta > s latency and
    cost with cancellation are approximate (flagged).
    """
    k = _check_int_ge(k, 1, "k")
    _check_pos(s=s)
    if alpha <= 1:
        raise DomainError(f"requires alpha > 1, got {alpha}")
    if delta < 0:
        raise DomainError(f"delta must be >= 0, got {delta}")
    if isinstance(redundancy, NoRedundancy):
        return relaunch(k, delta, s, alpha)
    if math.isinf(delta):
        base_lat, base_cost = _pareto_baseline(k, s, alpha)
        return Metrics(base_lat, base_cost, base_cost)
    mean_x = s * alpha / (alpha - 1.0)
    q = 1.0 - (s / delta) ** alpha if delta > s else 0.0

    if isinstance(redundancy, Replication):
        c = redundancy.c
        a_eff = (c + 1.0) * alpha
        mean_min = s * a_eff / (a_eff - 1.0)
        if delta <= s:
            latency = delta + pareto_rep_latency(k, s, a_eff)
            cost_cancel = k * delta + k * (c + 1.0) * mean_min
            cost_nocancel = k * delta + k * (c + 1.0) * mean_x
            flags: set = set()
        else:
            f_eff = s * gamma_fn(1.0 - 1.0 / a_eff) * gamma_ratio(
                k - k * q + 1.0, k - k * q + 1.0 - 1.0 / a_eff
            )
            f_plain = s * gamma_fn(1.0 - 1.0 / alpha) * gamma_ratio(
                k - k * q + 1.0, k - k * q + 1.0 - 1.0 / alpha
            )
            latency = relaunch(k, delta, s, alpha).latency_mean + f_eff - f_plain
            common = k * alpha / (alpha - 1.0) * (s - delta * (1.0 - q)) + k * (1.0 - q) * delta
            cost_cancel = common + k * (c + 1.0) * (1.0 - q) * mean_min
            cost_nocancel = common + k * (c + 1.0) * (1.0 - q) * mean_x
            flags = {"latency_mean"}
        return Metrics(latency, cost_cancel, cost_nocancel, approx_flags=frozenset(flags))

    n = _check_int_ge(redundancy.n, k + 1, "n")
    if delta <= s:
        base = _zero_delay_pareto(k, Coding(n), s, alpha)
        return Metrics(
            latency_mean=delta + base.latency_mean,
            cost_cancel_mean=k * delta + base.cost_cancel_mean,
            cost_nocancel_mean=k * delta + n * mean_x,
        )
    b = 1.0 / alpha
    beta_ratio = _beta_neg(n - k * q + 1.0, -b) / _beta_neg(n - k + 1.0, -b)
    latency = delta * (1.0 - q**k) + s * (
        beta_ratio + k * inc_beta(q, float(k), 1.0 - b) - q**k
    )
    cost_cancel = (
        alpha / (alpha - 1.0) * (k * (1.0 - q) * (s - delta) + n * s)
        + k * (1.0 - q) * delta
        - s * (n - k) * q**k
        - s / (alpha - 1.0) * (n - k) * beta_ratio
    )
    cost_nocancel = (
        alpha / (alpha - 1.0) * (k * s * (1.0 - q + q**k) + n * s * (1.0 - q**k))
        - k * delta * (1.0 - q) / (alpha - 1.0)
    )
    return Metrics(
        latency_mean=latency,
        cost_cancel_mean=cost_cancel,
        cost_nocancel_mean=cost_nocancel,
        approx_flags=frozenset({"latency_mean", "cost_cancel_mean"}),
    )


# ---------------------------------------------------------------------------
# config-driven evaluation and sweeps


def evaluate(config: PolicyConfig, dist: TaskDist) -> Metrics:
    """Route a PolicyConfig to the matching closed form.

    Raises :class:`UnsupportedPolicyError` for regimes with no closed form
    (delayed redundancy on heavy tails without relaunch, empirical task
    times, and the zero-delay-redundancy-with-relaunch costs); the
    Monte-Carlo simulator covers those.
    """
    k = config.k
    red = config.redundancy
    delta = config.delta

    if config.relaunch_at_delta:
        if not isinstance(dist, Pareto):
            raise UnsupportedPolicyError("relaunch closed forms need Pareto task times")
        if isinstance(red, NoRedundancy):
            return relaunch(k, delta, dist.s, dist.alpha)
        if config.red_launch is RedLaunch.AT_DELTA:
            return delayed_red_relaunch(k, red, delta, dist.s, dist.alpha)
        raise UnsupportedPolicyError(
            "zero-delay redundancy with relaunch has a closed form for latency "
            "only; call zero_delay_red_relaunch or simulate"
        )

    if isinstance(red, NoRedundancy):
        if isinstance(dist, Exp):
            base = k / dist.mu
            return Metrics(harmonic(k) / dist.mu, base, base)
        if isinstance(dist, SExp):
            return _zero_delay_sexp(k, red, dist.s, dist.mu)
        if isinstance(dist, Pareto):
            return _zero_delay_pareto(k, red, dist.s, dist.alpha)
        raise UnsupportedPolicyError(
            f"no closed-form baseline for {type(dist).__name__} task times"
        )

    at_zero = config.red_launch is RedLaunch.AT_ZERO or delta == 0.0
    if at_zero:
        if isinstance(dist, Exp):
            if isinstance(red, Replication):
                return rep_delayed_exp(k, red.c, 0.0, dist.mu)
            return code_delayed_exp(k, red.n, 0.0, dist.mu)
        return zero_delay(k, red, dist)

    if isinstance(dist, Exp):
        if isinstance(red, Replication):
            return rep_delayed_exp(k, red.c, delta, dist.mu)
        return code_delayed_exp(k, red.n, delta, dist.mu)
    if isinstance(dist, SExp):
        if isinstance(red, Replication):
            return rep_delayed_sexp(k, red.c, delta, dist.s, dist.mu)
        return code_delayed_sexp(k, red.n, delta, dist.s, dist.mu)
    raise UnsupportedPolicyError(
        "delayed redundancy without relaunch has closed forms only for "
        "exponential-tailed task times; simulate instead"
    )


_KNOBS = ("delta", "c", "n", "r")


def sweep(
    base: PolicyConfig,
    knob: str,
    grid: Sequence[float],
    dist: TaskDist,
) -> TradeoffCurve:
    """Evaluate the closed forms along a knob grid; per-point failures become
    flagged gaps instead of aborting the sweep."""
    if knob not in _KNOBS:
        raise DomainError(f"knob must be one of {_KNOBS}, got {knob!r}")
    values = [float(v) for v in grid]
    if any(b <= a for a, b in zip(values, values[1:])):
        raise DomainError("grid must be strictly increasing")
    points = []
    for v in values:
        try:
            config = _with_knob(base, knob, v)
            metrics = evaluate(config, dist)
            points.append(CurvePoint(v, metrics))
        except (DomainError, UnsupportedPolicyError, InfiniteMomentError) as exc:
            points.append(CurvePoint(v, None, error=str(exc)))
    return TradeoffCurve(knob_name=knob, points=tuple(points))


def _with_knob(base: PolicyConfig, knob: str, value: float) -> PolicyConfig:
    if knob == "delta":
        return replace(base, delta=value)
    if knob == "c":
        c = int(value)
        if c != value:
            raise DomainError(f"c grid values must be integers, got {value}")
        red = Replication(c) if c >= 1 else NoRedundancy()
        return replace(base, redundancy=red)
    if knob == "n":
        n = int(value)
        if n != value:
            raise DomainError(f"n grid values must be integers, got {value}")
        red = Coding(n) if n > base.k else NoRedundancy()
        return replace(base, redundancy=red)
    n = math.floor(value * base.k)
    red = Coding(n) if n > base.k else NoRedundancy()
    return replace(base, redundancy=red)
